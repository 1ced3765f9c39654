#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "tipiscale/frequency.hpp"
#include "tipiscale/metrics.hpp"
#include "tipiscale/platform.hpp"

namespace tipiscale {

// Synthetic machine surface: time per instruction is a compute term plus a
// memory term weighted by tipi, power is a static floor plus a cubic core
// and a quadratic uncore component.
struct parametric_params {
    double a_cycles_per_instr = 0.5;
    double m_cycles_per_miss = 90.0;
    double p0_watts = 40.0;
    double pc_core_coeff = 1.2;
    double pu_uncore_coeff = 3.3;
};

// Exact per-slab surfaces for injecting JPI tables; row = cf index,
// column = uf index.
struct slab_tables {
    std::vector<std::vector<double>> jpi;
    std::vector<std::vector<double>> throughput;
};

class machine_model {
public:
    static machine_model parametric(parametric_params params, frequency_grid core,
                                    frequency_grid uncore, double slab_width = 0.004);
    static machine_model default_parametric();
    static machine_model tabular(std::map<int, slab_tables> slabs, frequency_grid core,
                                 frequency_grid uncore, double slab_width = 0.004);

    double throughput(double tipi, freq_pair pair) const;  // instructions per second
    double power(freq_pair pair) const;                    // parametric mode only
    double jpi(double tipi, freq_pair pair) const;         // joules per instruction

    bool is_parametric() const { return tables_.empty(); }
    const parametric_params& params() const { return params_; }
    const frequency_grid& core_grid() const { return core_; }
    const frequency_grid& uncore_grid() const { return uncore_; }
    double slab_width() const { return slab_width_; }
    double slab_center(int slab) const { return (slab + 0.5) * slab_width_; }

private:
    machine_model() = default;
    const slab_tables& tables_for(double tipi) const;

    parametric_params params_;
    std::map<int, slab_tables> tables_;
    frequency_grid core_;
    frequency_grid uncore_;
    double slab_width_ = 0.004;
};

struct workload_phase {
    std::uint64_t work_units = 0;  // instructions to retire in this phase
    double tipi = 0.0;
    double noise_sigma = 0.0;  // relative log-normal noise on energy
};

struct workload_script {
    std::uint64_t seed = 0;
    std::vector<workload_phase> phases;
};

// Steps a script through a machine model, producing counter samples as a
// function of the applied frequency pair. Deterministic for a given seed.
class workload_sim {
public:
    workload_sim(machine_model model, workload_script script);

    // Consumes up to dt_us of simulated time; returns the interval's counter
    // deltas, or nothing once the script's work is exhausted. An interval
    // spanning a phase boundary blends the phases proportionally.
    std::optional<counter_sample> advance(freq_pair pair, std::uint64_t dt_us);

    std::uint64_t now_us() const { return now_us_; }
    const machine_model& model() const { return model_; }

private:
    machine_model model_;
    workload_script script_;
    std::size_t phase_idx_ = 0;
    double phase_done_ = 0.0;
    std::uint64_t now_us_ = 0;
    std::mt19937_64 rng_;
};

// Adapts a workload simulation to the platform port interface: apply() sets
// the pair, read_counters() advances one decision interval at it.
class simulator_port final : public platform_port {
public:
    simulator_port(machine_model model, workload_script script, std::uint64_t t_inv_us);

    std::optional<counter_sample> read_counters() override;
    void apply(mhz_pair p) override;

    const workload_sim& sim() const { return sim_; }

private:
    workload_sim sim_;
    std::uint64_t t_inv_us_;
    freq_pair current_;
};

// Ground truth for the exploration: a direct re-execution of the bound
// recurrence over exact JPI values, without the engine's state machine.
// argmin is the unconstrained column minimum, reported for diagnostics.
struct oracle_result {
    int opt = 0;
    int argmin = 0;
};

// Core column with the uncore pinned at its maximum, full default range.
oracle_result oracle_cf_opt(const machine_model& model, int slab);

// Uncore column with the core pinned at cf_opt, over the estimated window.
oracle_result oracle_uf_opt(const machine_model& model, int slab, int cf_opt,
                            int range_multiplier = 4);

}  // namespace tipiscale
