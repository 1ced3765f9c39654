#include "tipiscale/metrics.hpp"

#include <cmath>

namespace tipiscale {

double compute_tipi(const counter_sample& s) {
    if (s.instructions == 0) throw zero_instructions();
    return (static_cast<double>(s.tor_local) + static_cast<double>(s.tor_remote)) /
           static_cast<double>(s.instructions);
}

double compute_jpi(const counter_sample& s) {
    if (s.instructions == 0) throw zero_instructions();
    return static_cast<double>(s.energy_uj) * 1e-6 / static_cast<double>(s.instructions);
}

int quantize_tipi(double tipi, double slab_width) {
    if (slab_width <= 0.0) throw std::invalid_argument("slab width must be positive");
    if (tipi < 0.0 || !std::isfinite(tipi)) throw std::invalid_argument("tipi must be finite and non-negative");
    auto idx = static_cast<long long>(std::floor(tipi / slab_width));
    // Guard against the division rounding across a slab boundary.
    if (static_cast<double>(idx + 1) * slab_width <= tipi)
        ++idx;
    else if (idx > 0 && static_cast<double>(idx) * slab_width > tipi)
        --idx;
    return static_cast<int>(idx);
}

}  // namespace tipiscale
