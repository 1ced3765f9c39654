#include "tipiscale/policy.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>
#include <string>

namespace tipiscale {

void policy_config::validate() const {
    if (t_inv_us == 0) throw std::invalid_argument("t_inv must be positive");
    if (slab_width <= 0.0) throw std::invalid_argument("slab width must be positive");
    if (avg_window < 1) throw std::invalid_argument("averaging window must be at least 1");
    if (range_multiplier < 1) throw std::invalid_argument("range multiplier must be at least 1");
    if (core_grid.levels < 2 || uncore_grid.levels < 2)
        throw std::invalid_argument("grids need at least 2 levels");
}

policy_state::policy_state(policy_config cfg) : config(cfg) {
    config.validate();
    prev_pair = {config.core_grid.max_index(), config.uncore_grid.max_index()};
}

domain_state& dom(tipi_node& node, domain_kind kind) {
    return kind == domain_kind::cf ? node.cf : node.uf;
}

const domain_state& dom(const tipi_node& node, domain_kind kind) {
    return kind == domain_kind::cf ? node.cf : node.uf;
}

std::optional<std::size_t> node_index_of(const policy_state& st, int slab) {
    auto it = std::lower_bound(st.nodes.begin(), st.nodes.end(), slab,
                               [](const tipi_node& n, int s) { return n.slab < s; });
    if (it == st.nodes.end() || it->slab != slab) return std::nullopt;
    return static_cast<std::size_t>(it - st.nodes.begin());
}

namespace {

const jpi_accumulator* lookup(const std::map<int, jpi_accumulator>& table, int idx) {
    auto it = table.find(idx);
    return it == table.end() ? nullptr : &it->second;
}

bool avg_complete(const domain_state& d, int idx, int window) {
    const jpi_accumulator* acc = lookup(d.jpi_table, idx);
    return acc != nullptr && acc->complete(window);
}

// Sets opt at most once. Under the core-only variant concluding the core
// domain pins the uncore at its maximum without any uncore exploration.
void set_opt(policy_state& st, tipi_node& node, domain_kind kind, int value) {
    domain_state& d = dom(node, kind);
    if (!d.opt) d.opt = value;
    if (kind == domain_kind::cf && st.config.variant == policy_variant::core_only && !node.uf.opt)
        node.uf.opt = st.config.uncore_grid.max_index();
}

bool domain_enabled(const policy_state& st, domain_kind kind) {
    if (st.config.variant == policy_variant::core_only) return kind == domain_kind::cf;
    if (st.config.variant == policy_variant::uncore_only) return kind == domain_kind::uf;
    return true;
}

}  // namespace

uf_range estimate_uf_range(int cf_opt, const frequency_grid& core, const frequency_grid& uncore,
                           int multiplier) {
    if (!core.contains(cf_opt)) throw std::out_of_range("cf_opt outside the core grid");
    const int max_idx = uncore.max_index();
    const int range = multiplier * uncore.levels / core.levels;
    const int half = range / 2;
    // alpha = (uncore levels - 1) / (core levels - 1); est is rounded half-up.
    const long long p = uncore.levels - 1;
    const long long q = core.levels - 1;
    const int est = max_idx - static_cast<int>((2 * p * cf_opt + q) / (2 * q));
    int lb = std::max(0, est - half);
    int rb = std::min(max_idx, est + half);
    if (max_idx - est <= half) lb -= est + half - max_idx;
    if (est <= half) rb += half - est;
    lb = std::clamp(lb, 0, max_idx);
    rb = std::clamp(rb, 0, max_idx);
    if (lb > rb) lb = rb;
    return {lb, rb, est};
}

int resolve_adjacent(domain_state& d, domain_kind kind, bool rb_is_default_max) {
    assert(d.rb - d.lb == 1);
    int value;
    if (kind == domain_kind::uf)
        value = d.rb;  // a worsened downward probe signals memory sensitivity
    else
        value = rb_is_default_max ? d.rb : d.lb;
    if (!d.opt) d.opt = value;
    return *d.opt;
}

void propagate_bounds(policy_state& st, std::size_t origin, domain_kind kind,
                      bound_change change) {
    if (!domain_enabled(st, kind)) return;
    if (st.nodes.size() < 2) return;

    struct event {
        std::size_t idx;
        bound_change change;
    };
    std::vector<event> queue{{origin, change}};

    while (!queue.empty()) {
        const event ev = queue.back();
        queue.pop_back();
        const domain_state& od = dom(st.nodes[ev.idx], kind);

        // Core bounds fall moving right (towards memory-bound slabs); uncore
        // bounds rise. An rb drop therefore clamps the side whose ceiling it
        // caps, an lb raise (or a settled opt) clamps the side whose floor it
        // lifts.
        const bool rb_clamp = ev.change == bound_change::rb_lowered;
        const int value = rb_clamp ? od.rb : (od.opt ? *od.opt : od.lb);
        const bool towards_right = (kind == domain_kind::cf) == rb_clamp;

        const auto apply = [&](std::size_t ti) {
            tipi_node& target = st.nodes[ti];
            domain_state& td = dom(target, kind);
            if (td.opt) return;
            bool changed = false;
            if (rb_clamp) {
                const int clamped = std::clamp(value, td.lb, td.rb);
                if (clamped < td.rb) {
                    td.rb = clamped;
                    changed = true;
                }
            } else {
                const int clamped = std::clamp(value, td.lb, td.rb);
                if (clamped > td.lb) {
                    td.lb = clamped;
                    changed = true;
                }
            }
            if (changed && td.lb == td.rb) {
                set_opt(st, target, kind, td.rb);
                queue.push_back({ti, bound_change::opt_set});
            }
        };

        if (towards_right) {
            for (std::size_t ti = ev.idx + 1; ti < st.nodes.size(); ++ti) apply(ti);
        } else {
            for (std::size_t ti = ev.idx; ti-- > 0;) apply(ti);
        }
    }
}

void narrow_on_insert(policy_state& st, std::size_t inserted) {
    if (st.nodes.size() < 2) return;
    if (!domain_enabled(st, domain_kind::cf)) return;

    domain_state& d = st.nodes[inserted].cf;
    const tipi_node* left = inserted > 0 ? &st.nodes[inserted - 1] : nullptr;
    const tipi_node* right = inserted + 1 < st.nodes.size() ? &st.nodes[inserted + 1] : nullptr;

    // The node to the right is memory-bound relative to this one, so its core
    // optimum (or floor) bounds this node from below; the left neighbour's
    // ceiling bounds it from above.
    if (right) d.lb = std::max(d.lb, right->cf.opt.value_or(right->cf.lb));
    if (left) d.rb = std::min(d.rb, left->cf.opt.value_or(left->cf.rb));
    if (d.lb > d.rb) d.rb = d.lb;  // conflicting neighbours: keep the faster bound
    d.initial_rb = d.rb;
}

void narrow_uf_on_estimate(policy_state& st, std::size_t idx, uf_range estimated) {
    tipi_node& node = st.nodes[idx];
    domain_state& d = node.uf;
    int lb = estimated.lb;
    int rb = estimated.rb;

    if (st.nodes.size() > 1 && domain_enabled(st, domain_kind::uf)) {
        const tipi_node* left = idx > 0 ? &st.nodes[idx - 1] : nullptr;
        const tipi_node* right = idx + 1 < st.nodes.size() ? &st.nodes[idx + 1] : nullptr;
        // Mirror image of the core narrowing: the right neighbour caps the
        // uncore from above, the left one from below.
        if (right) rb = std::min(rb, right->uf.opt.value_or(right->uf.rb));
        if (left) lb = std::max(lb, left->uf.opt.value_or(left->uf.lb));
    }

    d.range_estimated = true;
    if (lb > rb) {
        // Neighbour clamps crossed: settle on whichever clamp sits closer to
        // the estimated optimum.
        const int pick = (lb - estimated.opt_est) < (estimated.opt_est - rb) ? lb : rb;
        d.lb = d.rb = d.initial_rb = pick;
        set_opt(st, node, domain_kind::uf, pick);
        propagate_bounds(st, idx, domain_kind::uf, bound_change::opt_set);
        return;
    }
    d.lb = lb;
    d.rb = rb;
    d.initial_rb = rb;
}

int find(policy_state& st, std::size_t node_idx, domain_kind kind, double jpi_reading,
         bool prev_equals_curr) {
    tipi_node& node = st.nodes[node_idx];
    domain_state& d = dom(node, kind);
    const int window = st.config.avg_window;

    // Window already collapsed (e.g. by propagation racing this exploration).
    if (d.lb == d.rb) {
        set_opt(st, node, kind, d.rb);
        propagate_bounds(st, node_idx, kind, bound_change::opt_set);
        return *d.opt;
    }
    if (d.rb - d.lb == 1) {
        const int chosen = resolve_adjacent(d, kind, d.rb == d.initial_rb);
        set_opt(st, node, kind, chosen);
        propagate_bounds(st, node_idx, kind, bound_change::opt_set);
        return *d.opt;
    }

    // A reading spanning a slab transition is discarded.
    if (prev_equals_curr) {
        const int fq_curr = kind == domain_kind::cf ? st.prev_pair.cf : st.prev_pair.uf;
        d.jpi_table[fq_curr].add(jpi_reading, window);
    }

    const int probe_low = std::max(d.rb - 2, d.lb);
    if (!avg_complete(d, d.rb, window)) return d.rb;
    if (!avg_complete(d, probe_low, window)) return probe_low;

    int next;
    if (d.jpi_table.at(probe_low).average() < d.jpi_table.at(d.rb).average()) {
        d.rb = probe_low;
        next = (d.rb - d.lb > 2) ? d.rb - 2 : d.lb;
        propagate_bounds(st, node_idx, kind, bound_change::rb_lowered);
    } else {
        next = d.lb = d.rb - 1;
        propagate_bounds(st, node_idx, kind, bound_change::lb_raised);
    }
    if (d.lb == d.rb) {
        set_opt(st, node, kind, d.rb);
        next = *d.opt;
        propagate_bounds(st, node_idx, kind, bound_change::opt_set);
    }
    return next;
}

namespace {

// Installs the uncore exploration window once the core frequency for this
// node is settled; returns the first uncore probe.
int begin_uf_exploration(policy_state& st, std::size_t node_idx) {
    tipi_node& node = st.nodes[node_idx];
    if (node.uf.opt) return node.uf.rb;  // collapsed window, rb == opt
    if (!node.uf.range_estimated) {
        uf_range est;
        if (st.config.variant == policy_variant::uncore_only) {
            // No genuine core optimum to anchor the estimate: keep the full
            // default window, neighbour narrowing still applies.
            est = {0, st.config.uncore_grid.max_index(), st.config.uncore_grid.max_index()};
        } else {
            est = estimate_uf_range(*node.cf.opt, st.config.core_grid, st.config.uncore_grid,
                                    st.config.range_multiplier);
        }
        narrow_uf_on_estimate(st, node_idx, est);
    }
    return st.nodes[node_idx].uf.rb;
}

}  // namespace

decision step(policy_state& st, const counter_sample& s) {
    if (st.phase == run_phase::stopped) throw std::logic_error("step called after stop");
    const policy_config& cfg = st.config;
    const freq_pair max_pair{cfg.core_grid.max_index(), cfg.uncore_grid.max_index()};

    ++st.interval_count;
    if (st.phase == run_phase::warmup) {
        if (st.warmup_elapsed_us < cfg.warmup_us) {
            st.warmup_elapsed_us += s.elapsed_us;
            st.prev_pair = max_pair;
            return {max_pair, decision_reason::warmup};
        }
        st.phase = run_phase::running;
    }

    const double tipi = compute_tipi(s);
    const double jpi = compute_jpi(s);
    const int slab = quantize_tipi(tipi, cfg.slab_width);
    const bool transition = !st.prev_slab || *st.prev_slab != slab;

    auto existing = node_index_of(st, slab);
    const bool fresh = !existing.has_value();
    std::size_t ni;
    freq_pair next{};

    if (fresh) {
        tipi_node node;
        node.slab = slab;
        node.cf.lb = 0;
        node.cf.rb = node.cf.initial_rb = cfg.core_grid.max_index();
        node.uf.lb = 0;
        node.uf.rb = node.uf.initial_rb = cfg.uncore_grid.max_index();
        if (cfg.variant == policy_variant::uncore_only)
            node.cf.opt = cfg.core_grid.max_index();

        auto pos = std::lower_bound(st.nodes.begin(), st.nodes.end(), slab,
                                    [](const tipi_node& n, int sl) { return n.slab < sl; });
        ni = static_cast<std::size_t>(pos - st.nodes.begin());
        st.nodes.insert(pos, std::move(node));
        narrow_on_insert(st, ni);

        if (!st.nodes[ni].cf.opt)
            next.cf = find(st, ni, domain_kind::cf, jpi, false);
        else
            next.cf = *st.nodes[ni].cf.opt;
        next.uf = cfg.uncore_grid.max_index();
    } else {
        ni = *existing;
        tipi_node& node = st.nodes[ni];
        if (!node.cf.opt) {
            next.cf = find(st, ni, domain_kind::cf, jpi, !transition);
            next.uf = cfg.uncore_grid.max_index();
            if (st.nodes[ni].cf.opt)  // the core exploration concluded this step
                next.uf = begin_uf_exploration(st, ni);
        } else if (!node.uf.opt) {
            next.cf = *node.cf.opt;
            if (!node.uf.range_estimated)
                next.uf = begin_uf_exploration(st, ni);
            else
                next.uf = find(st, ni, domain_kind::uf, jpi, !transition);
        } else {
            next = {*node.cf.opt, *node.uf.opt};
        }
    }

    if (cfg.variant == policy_variant::core_only) next.uf = cfg.uncore_grid.max_index();
    if (cfg.variant == policy_variant::uncore_only) next.cf = cfg.core_grid.max_index();

    ++st.nodes[ni].occurrences;
    st.prev_slab = slab;
    st.prev_pair = next;

    const tipi_node& node = st.nodes[ni];
    decision_reason reason;
    if (node.cf.opt && node.uf.opt)
        reason = decision_reason::settled;
    else if (!fresh && transition)
        reason = decision_reason::transition_discard;
    else if (!node.cf.opt)
        reason = decision_reason::exploring_cf;
    else
        reason = decision_reason::exploring_uf;

    return {next, reason};
}

void stop(policy_state& st) { st.phase = run_phase::stopped; }

const char* reason_name(decision_reason r) {
    switch (r) {
        case decision_reason::warmup: return "warmup";
        case decision_reason::exploring_cf: return "exploring_cf";
        case decision_reason::exploring_uf: return "exploring_uf";
        case decision_reason::settled: return "settled";
        case decision_reason::transition_discard: return "transition_discard";
    }
    return "unknown";
}

const char* variant_name(policy_variant v) {
    switch (v) {
        case policy_variant::full: return "full";
        case policy_variant::core_only: return "core";
        case policy_variant::uncore_only: return "uncore";
    }
    return "unknown";
}

policy_variant variant_from_name(const std::string& name) {
    if (name == "full") return policy_variant::full;
    if (name == "core") return policy_variant::core_only;
    if (name == "uncore") return policy_variant::uncore_only;
    throw std::invalid_argument("unknown policy variant: " + name);
}

}  // namespace tipiscale
