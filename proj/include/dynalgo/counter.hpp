#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynalgo/core.hpp"
#include "dynalgo/rng.hpp"

namespace dynalgo {

// Dynamic counter: C_t = max(X_t + C_{t-1} - r, 0).
struct CounterProcess {
    std::uint64_t C = 0;
    std::uint64_t r = 1;

    void step(std::uint64_t x) { C = (x + C > r) ? x + C - r : 0; }
};

enum class CounterDist : std::uint8_t { Constant, Geometric, Adversarial };

inline CounterDist parse_counter_dist(const std::string& s) {
    if (s == "const") return CounterDist::Constant;
    if (s == "geom") return CounterDist::Geometric;
    if (s == "adversarial") return CounterDist::Adversarial;
    throw std::invalid_argument("unknown distribution spec: " + s);
}

// Time-indexed two-point distribution: X_t = 2r(ell+1-t) with probability
// alpha / (2r(ell+1-t)), otherwise 0, so E[X_t] = alpha for every t <= ell.
struct AdversarialDist {
    std::uint64_t alpha;
    std::uint64_t r;
    std::uint64_t ell;

    AdversarialDist(std::uint64_t alpha_, std::uint64_t r_, std::uint64_t ell_)
        : alpha(alpha_), r(r_), ell(ell_) {
        if (alpha < 1 || r < 1 || ell < 1) throw std::invalid_argument("adversarial dist parameters must be >= 1");
        // the hitting probability peaks at t = ell where it equals alpha/(2r)
        if (alpha > 2 * r) throw std::invalid_argument("adversarial dist: probability exceeds 1 (parameters too small)");
    }

    std::uint64_t spike(std::uint64_t t) const { return 2 * r * (ell + 1 - t); }
    double prob(std::uint64_t t) const { return double(alpha) / double(spike(t)); }

    std::uint64_t sample(std::uint64_t t, RandomSource& rng) const {
        return rng.next_unit() < prob(t) ? spike(t) : 0;
    }
};

struct CounterSimResult {
    std::uint64_t r = 0;
    std::vector<double> trace;  // trace[t-1] = empirical Pr[C_t = 0]
    double final_prob_zero = 0.0;
    double min_prob_zero = 1.0;
};

struct CounterSimSpec {
    CounterDist dist = CounterDist::Geometric;
    std::uint64_t alpha = 1;
    std::uint64_t ell = 1024;
    std::uint64_t trials = 1000;
    std::uint64_t seed = 0;
    std::uint64_t r_override = 0;  // 0 = use 4 * alpha * ceil(log2 ell)
};

inline std::uint64_t default_step_budget(std::uint64_t alpha, std::uint64_t ell) {
    return 4 * alpha * ceil_log2(ell);
}

inline CounterSimResult simulate_counter(const CounterSimSpec& spec) {
    if (spec.alpha < 1 || spec.ell < 1 || spec.trials < 1)
        throw std::invalid_argument("simulate_counter: alpha, ell, trials must be >= 1");
    std::uint64_t r = spec.r_override ? spec.r_override : default_step_budget(spec.alpha, spec.ell);

    AdversarialDist adv(spec.dist == CounterDist::Adversarial
                            ? AdversarialDist(spec.alpha, r, spec.ell)
                            : AdversarialDist(1, 1, 1));

    std::vector<std::uint64_t> zero_count(spec.ell, 0);
    RandomSource rng(spec.seed, "counter-sim");
    for (std::uint64_t trial = 0; trial < spec.trials; ++trial) {
        CounterProcess c{0, r};
        for (std::uint64_t t = 1; t <= spec.ell; ++t) {
            std::uint64_t x = 0;
            switch (spec.dist) {
                case CounterDist::Constant: x = spec.alpha; break;
                case CounterDist::Geometric: x = rng.geometric(double(spec.alpha)); break;
                case CounterDist::Adversarial: x = adv.sample(t, rng); break;
            }
            c.step(x);
            if (c.C == 0) ++zero_count[t - 1];
        }
    }

    CounterSimResult out;
    out.r = r;
    out.trace.resize(spec.ell);
    for (std::uint64_t t = 0; t < spec.ell; ++t) {
        out.trace[t] = double(zero_count[t]) / double(spec.trials);
        if (out.trace[t] < out.min_prob_zero) out.min_prob_zero = out.trace[t];
    }
    out.final_prob_zero = out.trace[spec.ell - 1];
    return out;
}

}  // namespace dynalgo
