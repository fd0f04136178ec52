#pragma once

#include <cstdint>
#include <stdexcept>

namespace dynalgo {

// Deterministic work accounting. One unit per dictionary/queue elementary
// operation; ordered-map elementary operations charge ceil(log2 n) units.
struct WorkMeter {
    std::uint64_t units = 0;

    void charge(std::uint64_t k) {
        if (k < 1) throw std::invalid_argument("charge requires k >= 1");
        units += k;
    }
    void reset() { units = 0; }
};

}  // namespace dynalgo
