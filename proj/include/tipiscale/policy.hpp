#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "tipiscale/frequency.hpp"
#include "tipiscale/metrics.hpp"

namespace tipiscale {

enum class policy_variant { full, core_only, uncore_only };

struct policy_config {
    frequency_grid core_grid = haswell_core_grid();
    frequency_grid uncore_grid = haswell_uncore_grid();
    std::uint64_t t_inv_us = 20'000;       // sampling/decision interval
    std::uint64_t warmup_us = 2'000'000;   // readings before this are unstable
    double slab_width = 0.004;             // tipi quantization bucket
    int avg_window = 10;                   // readings per JPI average
    int range_multiplier = 4;              // uncore range estimation constant
    policy_variant variant = policy_variant::full;

    void validate() const;  // throws std::invalid_argument
};

// Running average of JPI readings at one frequency. Readings past the window
// are ignored; the average is usable only once the window is full.
struct jpi_accumulator {
    double sum = 0.0;
    int count = 0;

    void add(double jpi, int window) {
        if (count < window) {
            sum += jpi;
            ++count;
        }
    }
    bool complete(int window) const { return count >= window; }
    double average() const { return sum / count; }
};

enum class domain_kind { cf, uf };

// Exploration state of one frequency domain within one tipi node.
// Invariants: lb <= rb; once opt is set it never changes.
struct domain_state {
    int lb = 0;
    int rb = 0;
    int initial_rb = 0;  // rb when this node's exploration range was fixed
    std::optional<int> opt;
    std::map<int, jpi_accumulator> jpi_table;
    bool range_estimated = false;  // uncore only: exploration window computed
};

// One discovered tipi slab in the sorted node list.
struct tipi_node {
    int slab = 0;
    domain_state cf;
    domain_state uf;
    std::uint64_t occurrences = 0;  // post-warmup intervals attributed here
};

enum class run_phase { warmup, running, stopped };

enum class decision_reason { warmup, exploring_cf, exploring_uf, settled, transition_discard };

struct decision {
    freq_pair pair;
    decision_reason reason = decision_reason::warmup;
};

// The whole engine state; step() is a pure function of (state, sample).
struct policy_state {
    policy_config config;
    std::vector<tipi_node> nodes;  // sorted ascending by slab, unique slabs
    std::optional<int> prev_slab;
    freq_pair prev_pair;
    run_phase phase = run_phase::warmup;
    std::uint64_t interval_count = 0;  // every sample fed, warmup included
    std::uint64_t warmup_elapsed_us = 0;

    policy_state() = default;
    explicit policy_state(policy_config cfg);
};

struct uf_range {
    int lb = 0;
    int rb = 0;
    int opt_est = 0;  // the point estimate the window is centred on
};

// Uncore exploration window for a converged core frequency: the grids are
// mapped linearly onto each other (high core implies low uncore), the window
// width is multiplier * level ratio, and windows sticking out past either
// grid end are shifted back inside.
uf_range estimate_uf_range(int cf_opt, const frequency_grid& core,
                           const frequency_grid& uncore, int multiplier);

enum class bound_change { rb_lowered, lb_raised, opt_set };

domain_state& dom(tipi_node& node, domain_kind kind);
const domain_state& dom(const tipi_node& node, domain_kind kind);

// Picks opt when lb and rb are adjacent. Core: rb while the right bound is
// still the one exploration started from (no evidence of memory-boundness),
// lb otherwise. Uncore: always rb.
int resolve_adjacent(domain_state& d, domain_kind kind, bool rb_is_default_max);

// Transitive clamping of other nodes' bounds after a change at origin.
// Core bounds fall with slab index, uncore bounds rise with it; nodes whose
// opt is already set are left alone. A clamp that collapses a node's bounds
// sets its opt and propagates further.
void propagate_bounds(policy_state& st, std::size_t origin, domain_kind kind, bound_change change);

// Core-bound narrowing for a freshly inserted node from its neighbours.
void narrow_on_insert(policy_state& st, std::size_t inserted);

// Uncore-bound narrowing applied when the estimated window is installed.
void narrow_uf_on_estimate(policy_state& st, std::size_t idx, uf_range estimated);

// One exploration move for one domain of one node; returns the next
// frequency index for that domain. jpi_reading is folded into the table
// only when the previous interval ran in the same slab.
int find(policy_state& st, std::size_t node_idx, domain_kind kind, double jpi_reading,
         bool prev_equals_curr);

// Feed one interval's counters; returns the frequency pair to apply next.
decision step(policy_state& st, const counter_sample& s);

// Freeze the engine; step() afterwards throws.
void stop(policy_state& st);

// Index of the node holding this slab, if discovered.
std::optional<std::size_t> node_index_of(const policy_state& st, int slab);

const char* reason_name(decision_reason r);
const char* variant_name(policy_variant v);
policy_variant variant_from_name(const std::string& name);

}  // namespace tipiscale
