#include <catch2/catch_amalgamated.hpp>

#include <memory>

#include "dynalgo/matching.hpp"
#include "dynalgo/rng.hpp"
#include "dynalgo/spanner.hpp"
#include "dynalgo/workload.hpp"

using namespace dynalgo;

namespace {

// Feed both twins the same stream; one runs with randomized budget slices and
// interleaved enqueues, the other in one stroke. Digests must agree.
template <class Make>
void split_fuzz(Make make, const Workload& w, std::uint64_t trials, std::uint64_t seed0) {
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
        RandomSource sched(seed0 + trial, "schedule");
        auto split = make(trial);
        auto whole = make(trial);
        std::size_t fed = 0;
        while (fed < w.ops.size() || split->pending_len() > 0 || split->mid_update()) {
            // feed a small random batch, then run a few random slices
            std::uint64_t batch = std::min<std::uint64_t>(1 + sched.uniform_index(4),
                                                          w.ops.size() - fed);
            for (std::uint64_t b = 0; b < batch; ++b) split->enqueue(w.ops[fed + b]);
            fed += batch;
            std::uint64_t slices = 1 + sched.uniform_index(3);
            for (std::uint64_t s = 0; s < slices; ++s)
                split->run_steps(1 + sched.uniform_index(97));
            if (fed == w.ops.size()) split->run_to_completion();
        }
        for (const auto& op : w.ops) whole->enqueue(op);
        whole->run_to_completion();
        REQUIRE(split->digest() == whole->digest());
        REQUIRE(split->meter().units == whole->meter().units);
    }
}

}  // namespace

TEST_CASE("matching state is split-transparent") {
    Workload w = gen_uniform(32, 250, 0.55, 5);
    auto make = [&](std::uint64_t trial) {
        return std::make_unique<MaximalMatching>(MatchingConfig{32, 4, false}, 100 + trial, "fz");
    };
    split_fuzz(make, w, 40, 900);
}

TEST_CASE("classic matching is split-transparent") {
    Workload w = gen_uniform(24, 200, 0.5, 6);
    auto make = [&](std::uint64_t trial) {
        return std::make_unique<MaximalMatching>(MatchingConfig{24, 4, true}, 300 + trial, "fz");
    };
    split_fuzz(make, w, 25, 901);
}

TEST_CASE("spanner state is split-transparent") {
    Workload w = gen_uniform(20, 160, 0.6, 7);
    auto make = [&](std::uint64_t trial) {
        return std::make_unique<DynamicSpanner>(SpannerParams::make(20, 2, 1e-10), 200 + trial,
                                                "fz");
    };
    split_fuzz(make, w, 25, 902);
}

TEST_CASE("spanner at k=3 is split-transparent") {
    Workload w = gen_uniform(27, 140, 0.6, 8);
    auto make = [&](std::uint64_t trial) {
        return std::make_unique<DynamicSpanner>(SpannerParams::make(27, 3, 1e-10), 400 + trial,
                                                "fz");
    };
    split_fuzz(make, w, 15, 903);
}

TEST_CASE("rebuilds are split-transparent too") {
    // run a prefix, rebuild from a set, run a suffix; sliced and unsliced
    // executions must land on the same state
    Workload pre = gen_uniform(20, 120, 0.7, 31);
    std::unordered_set<Edge> mid;
    for (const auto& op : pre.ops) {
        if (op.kind == OpKind::Insert) mid.insert(op.edge);
        else mid.erase(op.edge);
    }
    std::vector<Edge> items(mid.begin(), mid.end());
    std::sort(items.begin(), items.end());
    Workload suf = gen_uniform(20, 80, 0.4, 32);
    // make the suffix valid against the rebuilt set
    {
        std::unordered_set<Edge> g = mid;
        suf.ops.clear();
        RandomSource r(5, "suffix");
        for (int i = 0; i < 80; ++i) {
            bool ins = g.empty() || r.bernoulli(0.5);
            if (ins) {
                Edge e{0, 0};
                do {
                    Vertex a = Vertex(r.uniform_index(20)), b = Vertex(r.uniform_index(20));
                    if (a == b) continue;
                    e = canonical(a, b);
                } while (e.lo == e.hi || g.count(e));
                g.insert(e);
                suf.ops.push_back({OpKind::Insert, e});
            } else {
                std::size_t k = r.uniform_index(g.size());
                auto it = g.begin();
                std::advance(it, k);
                Edge e = *it;
                g.erase(it);
                suf.ops.push_back({OpKind::Delete, e});
            }
        }
    }

    auto drive = [&](auto& inst, RandomSource* sched) {
        auto pump = [&](std::uint64_t hint) {
            if (!sched) {
                inst->run_to_completion();
                return;
            }
            while (inst->pending_len() > 0 || inst->mid_update())
                inst->run_steps(1 + sched->uniform_index(hint));
        };
        for (const auto& op : pre.ops) inst->enqueue(op);
        pump(60);
        inst->rebuild(items);
        pump(45);
        for (const auto& op : suf.ops) inst->enqueue(op);
        pump(75);
    };

    for (std::uint64_t trial = 0; trial < 12; ++trial) {
        RandomSource sched(7100 + trial, "rb");
        auto a = std::make_unique<MaximalMatching>(MatchingConfig{20, 4, false}, trial, "rb");
        auto b = std::make_unique<MaximalMatching>(MatchingConfig{20, 4, false}, trial, "rb");
        drive(a, &sched);
        drive(b, nullptr);
        REQUIRE(a->digest() == b->digest());

        auto c = std::make_unique<DynamicSpanner>(SpannerParams::make(20, 2, 1e-10), trial, "rb");
        auto d = std::make_unique<DynamicSpanner>(SpannerParams::make(20, 2, 1e-10), trial, "rb");
        drive(c, &sched);
        drive(d, nullptr);
        REQUIRE(c->digest() == d->digest());
    }
}
