#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dynalgo/filter.hpp"
#include "dynalgo/rng.hpp"
#include "filter_churn.hpp"

using namespace dynalgo;
using dynalgo::test::Churn;



TEST_CASE("filter parameters follow the stated formulas") {
    FilterParams p = FilterParams::make(64, 2);
    CHECK(p.lambda == 16);  // 2^ceil(log2(4 + ln 64)) = 2^ceil(log2 8.16)
    double expect = 4.0 * 80 * 2 * 256 * 64 * std::pow(64.0, 0.5) * std::log(64.0) *
                    std::log(16.0);
    CHECK(double(p.ell) == Catch::Approx(expect).epsilon(1e-9));
    CHECK(p.alpha(3) == 8);
    CHECK(p.alpha(kBucketNegInf) == 0);
    FilterParams tiny = FilterParams::make(64, 2, 2.0, 0.25, 80.0, 1e-12);
    CHECK(tiny.ell == 1);
}

TEST_CASE("the move rules quote the right constants") {
    // insert rule at bucket 2: coin 1/4 once count reaches 2*alpha_2 = 8,
    // forced at lambda*alpha_2, target bucket ceil(log2 count)
    CHECK(1.0 / 4.0 == 0.25);
    CHECK(ceil_log2(8) == 3);
    // delete rule at bucket 4: count 8 = alpha_4/2 gives t = 1, p = 8/16
    std::uint64_t a4 = 16, cnt = 8;
    std::uint64_t t = 4 - ceil_log2(cnt);
    CHECK(t == 1);
    CHECK(std::pow(2.0, double(2 * t + 1)) / double(a4) == Catch::Approx(0.5));
    CHECK(floor_log2(8) == 3);
}

TEST_CASE("a fresh cluster lands in bucket 0 and leaves through minus-infinity") {
    FilterParams p = FilterParams::make(64, 2, 2.0, 0.25, 80.0, 1e-12);
    FilterState fs(p);
    RandomSource rng(5, "f");
    Edge e{1, 2};
    fs.insert(7, e, rng);
    CHECK(fs.bucket_lookup(7) == 0);
    CHECK(fs.cluster_count(7) == 1);
    FilterCheck c1 = check_filter_invariants(fs);
    INFO(c1.what);
    CHECK(c1.ok);
    fs.erase(7, e, rng);
    CHECK(fs.cluster_count(7) == 0);
    CHECK(fs.bucket_lookup(7) == kBucketNegInf);
    CHECK(fs.counts().empty());  // evicted at zero edges
    FilterCheck c2 = check_filter_invariants(fs);
    CHECK(c2.ok);
}

TEST_CASE("arrival windows hold on every observed move (B1')") {
    FilterParams p = FilterParams::make(128, 2, 2.0, 0.25, 80.0, 1e-10);
    Churn ch(p, 24, 32, 77);
    std::vector<MoveEvent> log;
    ch.fs.move_log = &log;
    for (int i = 0; i < 4000; ++i) ch.step();
    std::size_t moves = 0;
    for (const auto& mv : log) {
        if (mv.to == kBucketNegInf) continue;
        ++moves;
        std::uint64_t a = p.alpha(mv.to);
        CHECK(2 * mv.count > a);
        CHECK(mv.count < 2 * a);
    }
    CHECK(moves > 50);
}

TEST_CASE("forced move fires at count lambda*alpha when every coin fails") {
    // a hand-built parameter set with tiny lambda makes the forced path
    // reachable: bucket 1 (alpha 2) forces at count 8 after at most 4 tails
    FilterParams p;
    p.lambda = 4;
    p.ell = 1;
    p.jmax = 8;
    p.charge_log = 4;
    bool seen_forced = false;
    for (std::uint64_t seed = 0; seed < 400 && !seen_forced; ++seed) {
        FilterState fs(p);
        std::vector<MoveEvent> log;
        fs.move_log = &log;
        RandomSource rng(seed, "forced");
        std::uint64_t id = 0;
        for (int i = 0; i < 8 && fs.bucket_lookup(3) != 2; ++i)
            fs.insert(3, Edge{Vertex(id++), 1000}, rng);
        for (const auto& mv : log)
            if (mv.forced) {
                seen_forced = true;
                CHECK(mv.count == p.lambda * p.alpha(mv.from));
            }
    }
    CHECK(seen_forced);
}

TEST_CASE("invariants B1-B4 and F2/F3 hold after every operation") {
    FilterParams p = FilterParams::make(64, 2, 2.0, 0.25, 80.0, 1e-10);
    for (std::uint64_t seed : {1ull, 2ull}) {
        Churn ch(p, 16, 16, seed);
        for (int i = 0; i < 1500; ++i) {
            ch.step();
            FilterCheck c = check_filter_invariants(ch.fs);
            INFO("op " << i << ": " << c.what);
            REQUIRE(c.ok);
        }
    }
}

TEST_CASE("inactive set stays within its size bound") {
    FilterParams p = FilterParams::make(64, 2, 2.0, 0.25, 80.0, 1e-10);
    Churn ch(p, 40, 8, 3);
    std::uint64_t cap = (1 + p.lambda * p.lambda * p.ell) * (floor_log2(64) + 2);
    for (int i = 0; i < 3000; ++i) {
        ch.step();
        CHECK(ch.fs.inactive().size() <= cap);
    }
}

TEST_CASE("filtering actually engages at desk scale") {
    FilterParams p = FilterParams::make(64, 2, 2.0, 0.25, 80.0, 1e-12);
    REQUIRE(p.ell == 1);
    Churn ch(p, 64, 8, 9);
    std::uint64_t filtered_seen = 0;
    for (int i = 0; i < 4000; ++i) {
        ch.step();
        filtered_seen = std::max<std::uint64_t>(filtered_seen, ch.fs.filtered().size());
    }
    CHECK(filtered_seen > 0);
}

TEST_CASE("mean induced updates stay under 16 plus noise") {
    for (std::uint64_t scale : {4ull, 16ull, 64ull}) {
        FilterParams p = FilterParams::make(256, 2, 2.0, 0.25, 80.0, 1e-11);
        Churn ch(p, 32, scale, scale * 101);
        double sum = 0, sumsq = 0;
        const int ops = 20'000;
        for (int i = 0; i < ops; ++i) {
            double x = double(ch.step().first);
            sum += x;
            sumsq += x * x;
        }
        double mean = sum / ops;
        double var = sumsq / ops - mean * mean;
        double sem = std::sqrt(var / ops);
        INFO("scale " << scale << " mean " << mean << " sem " << sem);
        CHECK(mean <= 16.0 + 3.0 * sem);
    }
}

TEST_CASE("filter operations are deterministic per seed") {
    FilterParams p = FilterParams::make(64, 2, 2.0, 0.25, 80.0, 1e-10);
    auto run = [&](std::uint64_t seed) {
        Churn ch(p, 8, 8, seed);
        for (int i = 0; i < 500; ++i) ch.step();
        std::vector<std::pair<ClusterId, std::uint64_t>> final_counts(ch.fs.counts().begin(),
                                                                      ch.fs.counts().end());
        std::sort(final_counts.begin(), final_counts.end());
        return final_counts;
    };
    CHECK(run(5) == run(5));
    CHECK(run(5) != run(6));
}
