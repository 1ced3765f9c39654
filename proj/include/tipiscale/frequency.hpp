#pragma once

#include <utility>

namespace tipiscale {

// Discrete ladder of frequencies for one domain (core or uncore).
// Index 0 is the lowest frequency, levels-1 the highest. All policy logic
// works on indices; MHz appears only at the platform boundary and in reports.
struct frequency_grid {
    int min_mhz = 0;
    int step_mhz = 0;
    int levels = 0;

    static frequency_grid make(int min_mhz, int step_mhz, int levels);
    // Rejects ranges where (max - min) is not divisible by step.
    static frequency_grid from_range(int min_mhz, int max_mhz, int step_mhz);

    int max_index() const { return levels - 1; }
    int max_mhz() const { return min_mhz + (levels - 1) * step_mhz; }
    bool contains(int index) const { return index >= 0 && index < levels; }

    int mhz(int index) const;     // throws std::out_of_range
    int index_of(int mhz) const;  // throws std::invalid_argument if off-grid

    bool operator==(const frequency_grid&) const = default;
};

// A (core, uncore) pair of grid indices.
struct freq_pair {
    int cf = 0;
    int uf = 0;
    bool operator==(const freq_pair&) const = default;
};

// 1.2-2.3 GHz core and 1.2-3.0 GHz uncore, both in 0.1 GHz steps.
frequency_grid haswell_core_grid();
frequency_grid haswell_uncore_grid();

// Seven-level grids A..G used in the worked scenarios; A is the lowest.
std::pair<frequency_grid, frequency_grid> hypothetical_grids();
char hypothetical_label(int index);  // 0 -> 'A', 6 -> 'G'

}  // namespace tipiscale
