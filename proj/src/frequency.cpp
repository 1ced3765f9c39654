#include "tipiscale/frequency.hpp"

#include <stdexcept>
#include <string>

namespace tipiscale {

frequency_grid frequency_grid::make(int min_mhz, int step_mhz, int levels) {
    if (levels < 2)
        throw std::invalid_argument("frequency grid needs at least 2 levels");
    if (step_mhz <= 0)
        throw std::invalid_argument("frequency grid step must be positive");
    if (min_mhz < 0)
        throw std::invalid_argument("frequency grid min must be non-negative");
    return frequency_grid{min_mhz, step_mhz, levels};
}

frequency_grid frequency_grid::from_range(int min_mhz, int max_mhz, int step_mhz) {
    if (step_mhz <= 0)
        throw std::invalid_argument("frequency grid step must be positive");
    if (max_mhz <= min_mhz)
        throw std::invalid_argument("frequency grid max must exceed min");
    if ((max_mhz - min_mhz) % step_mhz != 0)
        throw std::invalid_argument("frequency range is not divisible by step");
    return make(min_mhz, step_mhz, (max_mhz - min_mhz) / step_mhz + 1);
}

int frequency_grid::mhz(int index) const {
    if (!contains(index))
        throw std::out_of_range("frequency index " + std::to_string(index) +
                                " outside grid of " + std::to_string(levels) + " levels");
    return min_mhz + index * step_mhz;
}

int frequency_grid::index_of(int value_mhz) const {
    const int offset = value_mhz - min_mhz;
    if (offset < 0 || offset % step_mhz != 0 || offset / step_mhz >= levels)
        throw std::invalid_argument(std::to_string(value_mhz) + " MHz is not on the grid");
    return offset / step_mhz;
}

frequency_grid haswell_core_grid() { return frequency_grid::from_range(1200, 2300, 100); }

frequency_grid haswell_uncore_grid() { return frequency_grid::from_range(1200, 3000, 100); }

std::pair<frequency_grid, frequency_grid> hypothetical_grids() {
    return {frequency_grid::make(1000, 100, 7), frequency_grid::make(1000, 100, 7)};
}

char hypothetical_label(int index) {
    if (index < 0 || index > 6)
        throw std::out_of_range("hypothetical grid has levels A..G");
    return static_cast<char>('A' + index);
}

}  // namespace tipiscale
