#include <catch2/catch_amalgamated.hpp>

#include "dynalgo/core.hpp"
#include "dynalgo/meter.hpp"
#include "dynalgo/rng.hpp"
#include "stub_updater.hpp"

using namespace dynalgo;
using dynalgo::test::StubUpdater;

TEST_CASE("canonical orders endpoints and rejects self-loops") {
    CHECK(canonical(3, 1) == Edge{1, 3});
    CHECK(canonical(0, 9) == Edge{0, 9});
    CHECK_THROWS_AS(canonical(5, 5), std::invalid_argument);
}

TEST_CASE("random source streams are reproducible and label-split") {
    RandomSource a(42, "x"), b(42, "x"), c(42, "y");
    bool differ = false;
    for (int i = 0; i < 64; ++i) {
        std::uint64_t va = a.next_u64();
        CHECK(va == b.next_u64());
        if (va != c.next_u64()) differ = true;
    }
    CHECK(differ);
}

TEST_CASE("bernoulli endpoints and domain") {
    RandomSource r(1, "b");
    for (int i = 0; i < 100; ++i) {
        CHECK_FALSE(r.bernoulli(0.0));
        CHECK(r.bernoulli(1.0));
    }
    CHECK_THROWS_AS(r.bernoulli(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(r.bernoulli(1.1), std::invalid_argument);
}

TEST_CASE("bernoulli empirical mean at p=0.25") {
    RandomSource r(7, "mc");
    const std::size_t trials = 1'000'000;
    std::size_t heads = 0;
    for (std::size_t i = 0; i < trials; ++i)
        if (r.bernoulli(0.25)) ++heads;
    double mean = double(heads) / double(trials);
    CHECK(mean > 0.245);
    CHECK(mean < 0.255);
}

TEST_CASE("uniform_index covers the range deterministically") {
    RandomSource r(9, "u");
    std::vector<int> hits(5, 0);
    for (int i = 0; i < 5000; ++i) ++hits[r.uniform_index(5)];
    for (int h : hits) CHECK(h > 800);
    CHECK_THROWS_AS(r.uniform_index(0), std::invalid_argument);
}

TEST_CASE("work meter charges add up") {
    WorkMeter m;
    m.charge(1);
    CHECK(m.units == 1);
    m.units = 5;
    m.charge(3);
    CHECK(m.units == 8);
    m.reset();
    for (int i = 0; i < 137; ++i) m.charge(1);
    CHECK(m.units == 137);
    CHECK_THROWS_AS(m.charge(0), std::invalid_argument);
}

TEST_CASE("run_steps honors the budget contract") {
    SECTION("no pending work: Fixed, zero charged") {
        StubUpdater s({10});
        CHECK(s.run_steps(100) == RunStatus::Fixed);
        CHECK(s.meter().units == 0);
    }
    SECTION("one update costing 10, budget 4: Broken, resumes mid-update") {
        StubUpdater s({10});
        s.enqueue(insert_op(0, 1));
        CHECK(s.run_steps(4) == RunStatus::Broken);
        CHECK(s.meter().units == 4);
        CHECK(s.mid_update());
        CHECK(s.run_steps(100) == RunStatus::Fixed);
        CHECK(s.meter().units == 10);
        CHECK(s.content().count(Edge{0, 1}) == 1);
    }
    SECTION("updates costing 3+3 with budget 7: Fixed") {
        StubUpdater s({3});
        s.enqueue(insert_op(0, 1));
        s.enqueue(insert_op(1, 2));
        CHECK(s.run_steps(7) == RunStatus::Fixed);
        CHECK(s.meter().units == 6);
    }
    SECTION("FIFO: first update completes before the second starts") {
        StubUpdater s({5});
        s.enqueue(insert_op(0, 1));
        s.enqueue(delete_op(0, 1));
        s.run_steps(6);
        CHECK(s.content().count(Edge{0, 1}) == 1);  // delete not yet applied
        s.run_steps(100);
        CHECK(s.content().empty());
    }
}

TEST_CASE("stub split transparency") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RandomSource r(seed, "split");
        StubUpdater a({7, 3, 12}), b({7, 3, 12});
        for (int i = 0; i < 10; ++i) {
            a.enqueue(insert_op(i, i + 1));
            b.enqueue(insert_op(i, i + 1));
        }
        while (a.run_steps(1 + r.uniform_index(9)) == RunStatus::Broken) {
        }
        b.run_steps(1'000'000);
        CHECK(a.digest() == b.digest());
    }
}
