#include "tipiscale/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tipiscale/metrics.hpp"
#include "tipiscale/policy.hpp"

namespace tipiscale {

machine_model machine_model::parametric(parametric_params params, frequency_grid core,
                                        frequency_grid uncore, double slab_width) {
    if (params.a_cycles_per_instr <= 0 || params.m_cycles_per_miss <= 0 ||
        params.p0_watts <= 0 || params.pc_core_coeff <= 0 || params.pu_uncore_coeff <= 0)
        throw std::invalid_argument("parametric coefficients must be positive");
    machine_model m;
    m.params_ = params;
    m.core_ = core;
    m.uncore_ = uncore;
    m.slab_width_ = slab_width;
    return m;
}

machine_model machine_model::default_parametric() {
    return parametric(parametric_params{}, haswell_core_grid(), haswell_uncore_grid());
}

machine_model machine_model::tabular(std::map<int, slab_tables> slabs, frequency_grid core,
                                     frequency_grid uncore, double slab_width) {
    if (slabs.empty()) throw std::invalid_argument("tabular model needs at least one slab");
    for (const auto& [slab, tab] : slabs) {
        const auto shaped = [&](const std::vector<std::vector<double>>& t) {
            if (static_cast<int>(t.size()) != core.levels) return false;
            for (const auto& row : t)
                if (static_cast<int>(row.size()) != uncore.levels) return false;
            return true;
        };
        if (!shaped(tab.jpi) || !shaped(tab.throughput))
            throw std::invalid_argument("tabular grids must cover both frequency grids");
    }
    machine_model m;
    m.tables_ = std::move(slabs);
    m.core_ = core;
    m.uncore_ = uncore;
    m.slab_width_ = slab_width;
    return m;
}

const slab_tables& machine_model::tables_for(double tipi) const {
    const int slab = quantize_tipi(tipi, slab_width_);
    auto it = tables_.find(slab);
    if (it == tables_.end())
        throw std::out_of_range("tabular model has no slab " + std::to_string(slab));
    return it->second;
}

double machine_model::throughput(double tipi, freq_pair pair) const {
    if (!core_.contains(pair.cf) || !uncore_.contains(pair.uf))
        throw std::out_of_range("frequency pair outside the grids");
    if (!is_parametric()) return tables_for(tipi).throughput[pair.cf][pair.uf];
    const double cf_ghz = core_.mhz(pair.cf) * 1e-3;
    const double uf_ghz = uncore_.mhz(pair.uf) * 1e-3;
    const double ns_per_instr =
        params_.a_cycles_per_instr / cf_ghz + tipi * params_.m_cycles_per_miss / uf_ghz;
    return 1e9 / ns_per_instr;
}

double machine_model::power(freq_pair pair) const {
    if (!is_parametric()) throw std::logic_error("power is defined for the parametric mode");
    if (!core_.contains(pair.cf) || !uncore_.contains(pair.uf))
        throw std::out_of_range("frequency pair outside the grids");
    const double cf_ghz = core_.mhz(pair.cf) * 1e-3;
    const double uf_ghz = uncore_.mhz(pair.uf) * 1e-3;
    return params_.p0_watts + params_.pc_core_coeff * cf_ghz * cf_ghz * cf_ghz +
           params_.pu_uncore_coeff * uf_ghz * uf_ghz;
}

double machine_model::jpi(double tipi, freq_pair pair) const {
    if (!is_parametric()) return tables_for(tipi).jpi[pair.cf][pair.uf];
    return power(pair) / throughput(tipi, pair);
}

workload_sim::workload_sim(machine_model model, workload_script script)
    : model_(std::move(model)), script_(std::move(script)), rng_(script_.seed) {
    if (script_.phases.empty()) throw std::invalid_argument("workload script has no phases");
    for (const auto& ph : script_.phases) {
        if (ph.work_units == 0) throw std::invalid_argument("phase work must be positive");
        if (ph.tipi < 0.0) throw std::invalid_argument("phase tipi must be non-negative");
        if (ph.noise_sigma < 0.0) throw std::invalid_argument("noise sigma must be non-negative");
    }
}

std::optional<counter_sample> workload_sim::advance(freq_pair pair, std::uint64_t dt_us) {
    if (phase_idx_ >= script_.phases.size()) return std::nullopt;
    if (dt_us == 0) throw std::invalid_argument("interval must be positive");

    const double sigma = script_.phases[phase_idx_].noise_sigma;
    double remaining_us = static_cast<double>(dt_us);
    double instr_acc = 0.0;
    double time_acc_us = 0.0;
    double energy_acc_uj = 0.0;
    std::uint64_t tor_acc = 0;

    while (remaining_us > 1e-6 && phase_idx_ < script_.phases.size()) {
        const workload_phase& ph = script_.phases[phase_idx_];
        const double rate = model_.throughput(ph.tipi, pair);  // instr/s
        const double work_left = static_cast<double>(ph.work_units) - phase_done_;
        const double instr_possible = rate * remaining_us * 1e-6;

        double instr_seg, time_seg_us;
        if (instr_possible < work_left) {
            instr_seg = instr_possible;
            time_seg_us = remaining_us;
        } else {
            instr_seg = work_left;
            time_seg_us = work_left / rate * 1e6;
        }

        tor_acc += static_cast<std::uint64_t>(std::llround(ph.tipi * instr_seg));
        if (!model_.is_parametric())
            energy_acc_uj += model_.jpi(ph.tipi, pair) * instr_seg * 1e6;
        instr_acc += instr_seg;
        time_acc_us += time_seg_us;
        remaining_us -= time_seg_us;
        phase_done_ += instr_seg;
        if (phase_done_ >= static_cast<double>(ph.work_units)) {
            ++phase_idx_;
            phase_done_ = 0.0;
        }
    }

    counter_sample s;
    s.elapsed_us = std::max<std::uint64_t>(1, std::llround(time_acc_us));
    s.instructions = std::max<std::uint64_t>(1, std::llround(instr_acc));
    s.tor_local = (tor_acc + 1) / 2;
    s.tor_remote = tor_acc / 2;
    if (model_.is_parametric())
        energy_acc_uj = model_.power(pair) * static_cast<double>(s.elapsed_us);
    if (sigma > 0.0) {
        std::normal_distribution<double> gauss(0.0, 1.0);
        energy_acc_uj *= std::exp(sigma * gauss(rng_));
    }
    s.energy_uj = static_cast<std::uint64_t>(std::llround(energy_acc_uj));
    now_us_ += s.elapsed_us;
    return s;
}

simulator_port::simulator_port(machine_model model, workload_script script,
                               std::uint64_t t_inv_us)
    : sim_(std::move(model), std::move(script)),
      t_inv_us_(t_inv_us),
      current_{sim_.model().core_grid().max_index(), sim_.model().uncore_grid().max_index()} {}

std::optional<counter_sample> simulator_port::read_counters() {
    return sim_.advance(current_, t_inv_us_);
}

void simulator_port::apply(mhz_pair p) {
    current_ = {sim_.model().core_grid().index_of(p.cf_mhz),
                sim_.model().uncore_grid().index_of(p.uf_mhz)};
}

namespace {

// Algorithm-2 bound recurrence over an exact JPI column. Kept independent of
// the engine's find() so the two routes can be checked against each other.
int descend(const std::vector<double>& col, int lb0, int rb0, domain_kind kind) {
    int lb = lb0;
    int rb = rb0;
    const int initial_rb = rb0;
    while (true) {
        if (lb == rb) return rb;
        if (rb - lb == 1) {
            if (kind == domain_kind::uf) return rb;
            return rb == initial_rb ? rb : lb;
        }
        const int probe = std::max(rb - 2, lb);
        if (col[probe] < col[rb])
            rb = probe;
        else
            lb = rb - 1;
    }
}

int column_argmin(const std::vector<double>& col, int lb, int rb) {
    int best = lb;
    for (int i = lb + 1; i <= rb; ++i)
        if (col[i] < col[best]) best = i;
    return best;
}

}  // namespace

oracle_result oracle_cf_opt(const machine_model& model, int slab) {
    const double tipi = model.slab_center(slab);
    const int uf_max = model.uncore_grid().max_index();
    std::vector<double> col(model.core_grid().levels);
    for (int c = 0; c < model.core_grid().levels; ++c)
        col[c] = model.jpi(tipi, {c, uf_max});
    const int rb0 = model.core_grid().max_index();
    return {descend(col, 0, rb0, domain_kind::cf), column_argmin(col, 0, rb0)};
}

oracle_result oracle_uf_opt(const machine_model& model, int slab, int cf_opt,
                            int range_multiplier) {
    const double tipi = model.slab_center(slab);
    std::vector<double> col(model.uncore_grid().levels);
    for (int u = 0; u < model.uncore_grid().levels; ++u)
        col[u] = model.jpi(tipi, {cf_opt, u});
    const uf_range window =
        estimate_uf_range(cf_opt, model.core_grid(), model.uncore_grid(), range_multiplier);
    return {descend(col, window.lb, window.rb, domain_kind::uf),
            column_argmin(col, 0, model.uncore_grid().max_index())};
}

}  // namespace tipiscale
