#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dynalgo {

// Deterministic splittable generator. A stream is identified by (seed, label):
// the label is hashed into the seed, so distinct labels yield statistically
// independent streams and identical (seed, label) pairs replay bit-identically.
// Core is splitmix64 (period 2^64).
class RandomSource {
  public:
    RandomSource() : state_(0) {}
    RandomSource(std::uint64_t seed, std::string_view label) {
        std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a over the label
        for (char c : label) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ull;
        }
        state_ = mix(seed ^ mix(h));
    }

    std::uint64_t next_u64() {
        ++draws_;
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    // Uniform double in [0, 1).
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) {
        if (p < 0.0 || p > 1.0) throw std::invalid_argument("bernoulli probability outside [0,1]");
        return next_unit() < p;
    }

    // Uniform index in [0, m) via Lemire's multiply-shift.
    std::uint64_t uniform_index(std::uint64_t m) {
        if (m == 0) throw std::invalid_argument("uniform_index with empty range");
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * m) >> 64);
    }

    // Geometric on {0,1,2,...} with the given mean (success prob 1/(1+mean)).
    std::uint64_t geometric(double mean);

    std::uint64_t draws() const { return draws_; }

  private:
    static std::uint64_t mix(std::uint64_t x) {
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    std::uint64_t state_;
    std::uint64_t draws_ = 0;
};

}  // namespace dynalgo

#include <cmath>

namespace dynalgo {

inline std::uint64_t RandomSource::geometric(double mean) {
    if (mean <= 0.0) return 0;
    double p = 1.0 / (1.0 + mean);
    double u = next_unit();
    // inverse transform; count of failures before first success
    double k = std::floor(std::log1p(-u) / std::log1p(-p));
    if (k < 0) k = 0;
    return static_cast<std::uint64_t>(k);
}

}  // namespace dynalgo
