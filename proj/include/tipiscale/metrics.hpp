#pragma once

#include <cstdint>
#include <stdexcept>

namespace tipiscale {

// Per-interval counter deltas: TOR inserts (LLC miss requests, local+remote),
// instructions retired, package energy and wall time.
struct counter_sample {
    std::uint64_t tor_local = 0;
    std::uint64_t tor_remote = 0;
    std::uint64_t instructions = 0;
    std::uint64_t energy_uj = 0;
    std::uint64_t elapsed_us = 0;
};

class zero_instructions : public std::invalid_argument {
public:
    zero_instructions() : std::invalid_argument("sample has zero instructions retired") {}
};

// TOR inserts per instruction: the memory-access-pattern metric.
double compute_tipi(const counter_sample& s);

// Joules per instruction: the per-pattern optimization objective.
double compute_jpi(const counter_sample& s);

// Slab index = floor(tipi / width); a value on a slab boundary belongs to
// the upper slab. Throws std::invalid_argument on negative tipi.
int quantize_tipi(double tipi, double slab_width);

}  // namespace tipiscale
