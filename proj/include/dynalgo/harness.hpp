#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "dynalgo/core.hpp"
#include "dynalgo/deamortizer.hpp"
#include "dynalgo/matching.hpp"
#include "dynalgo/oracles.hpp"
#include "dynalgo/report.hpp"
#include "dynalgo/spanner.hpp"
#include "dynalgo/workload.hpp"

namespace dynalgo {

// Stretch oracle for an arbitrary (graph, H) pair: BFS in H truncated at
// depth 2k-1 from one endpoint of every graph edge.
inline bool stretch_ok(std::uint64_t n, const std::unordered_set<Edge>& graph,
                       const std::vector<Edge>& H, std::uint32_t k) {
    std::vector<std::vector<Vertex>> hadj(n);
    for (const Edge& e : H) {
        hadj[e.lo].push_back(e.hi);
        hadj[e.hi].push_back(e.lo);
    }
    std::vector<std::uint32_t> mark(n, 0), dist(n, 0);
    std::uint32_t stamp = 0;
    std::vector<Vertex> bfs;
    const std::uint32_t limit = 2 * k - 1;
    for (const Edge& e : graph) {
        ++stamp;
        bfs.clear();
        bfs.push_back(e.lo);
        mark[e.lo] = stamp;
        dist[e.lo] = 0;
        bool found = false;
        for (std::size_t head = 0; head < bfs.size() && !found; ++head) {
            Vertex x = bfs[head];
            if (dist[x] >= limit) break;
            for (Vertex y : hadj[x]) {
                if (mark[y] == stamp) continue;
                mark[y] = stamp;
                dist[y] = dist[x] + 1;
                if (y == e.hi) {
                    found = true;
                    break;
                }
                bfs.push_back(y);
            }
        }
        if (!found) return false;
    }
    return true;
}

struct RunOptions {
    std::string algo = "matching";  // matching | spanner
    std::uint64_t n = 64;
    std::uint32_t k = 2;
    std::string gen = "uniform";  // uniform | matching-adversary | spanner-skew | planted
    std::uint64_t steps = 1000;
    double bias = 0.5;
    std::uint32_t adv_level = 4;
    std::uint64_t rounds = 10;
    std::string workload_path;
    std::uint64_t seed = 0;
    bool wrap = false;
    std::uint64_t copies_c = 1;
    std::uint64_t alpha = 0;  // 0 = auto-calibrate from a pilot run
    std::uint64_t ell = 0;    // 0 = workload length
    std::string verify = "sample:64";
    bool classic = false;
    std::uint32_t rise_const = 4;
    double filter_ell_scale = 1.0;
    std::string report_path, csv_path, dump_path;
};

inline Workload make_workload(const RunOptions& o) {
    if (!o.workload_path.empty()) return Workload::load(o.workload_path);
    if (o.gen == "uniform") return gen_uniform(o.n, o.steps, o.bias, o.seed);
    if (o.gen == "matching-adversary")
        return gen_matching_adversary(o.adv_level, o.rounds, o.seed, o.n > 2 ? o.n : 0);
    if (o.gen == "spanner-skew") return gen_spanner_skew(o.n, o.k, o.seed);
    if (o.gen == "planted") return gen_planted_deletions(o.n, o.adv_level, o.rounds, o.seed);
    throw std::invalid_argument("unknown generator: " + o.gen);
}

struct VerifyCadence {
    bool final_only = false;
    std::uint64_t every = 0;  // 0 = never (during the run)

    static VerifyCadence parse(const std::string& s) {
        VerifyCadence c;
        if (s == "none") return c;
        if (s == "every") {
            c.every = 1;
        } else if (s == "final") {
            c.final_only = true;
        } else if (s.rfind("sample:", 0) == 0) {
            c.every = std::stoull(s.substr(7));
            if (c.every == 0) throw std::invalid_argument("sample cadence must be positive");
        } else {
            throw std::invalid_argument("unknown verify mode: " + s);
        }
        return c;
    }
};

inline UpdaterFactory matching_factory(const RunOptions& o) {
    MatchingConfig cfg{std::uint32_t(o.n), o.rise_const, o.classic};
    std::uint64_t seed = o.seed;
    return [cfg, seed](std::size_t i) -> std::unique_ptr<SteppableUpdater> {
        return std::make_unique<MaximalMatching>(cfg, seed, "matching/copy" + std::to_string(i));
    };
}

inline UpdaterFactory spanner_factory(const RunOptions& o) {
    SpannerParams p = SpannerParams::make(o.n, o.k, o.filter_ell_scale);
    std::uint64_t seed = o.seed;
    return [p, seed](std::size_t i) -> std::unique_ptr<SteppableUpdater> {
        return std::make_unique<DynamicSpanner>(p, seed, "spanner/copy" + std::to_string(i));
    };
}

// 4 x median per-update units over a pilot run of the unwrapped algorithm.
inline std::uint64_t calibrate_alpha(const UpdaterFactory& factory, const Workload& w,
                                     std::uint64_t pilot_len = 1000) {
    auto inst = factory(777000);
    std::vector<std::uint64_t> per;
    std::uint64_t limit = std::min<std::uint64_t>(pilot_len, w.ops.size());
    for (std::uint64_t t = 0; t < limit; ++t) {
        std::uint64_t before = inst->meter().units;
        inst->enqueue(w.ops[t]);
        inst->run_to_completion();
        per.push_back(inst->meter().units - before);
    }
    if (per.empty()) return 1;
    std::sort(per.begin(), per.end());
    std::uint64_t median = per[per.size() / 2];
    return std::max<std::uint64_t>(1, 4 * median);
}

struct RunOutcome {
    RunReport report;
    std::string fail_detail;  // first verification failure, with update index
};

inline RunOutcome run_harness(const RunOptions& o) {
    Workload w = make_workload(o);
    if (!w.validate()) throw std::runtime_error("workload failed replay validation");
    VerifyCadence cad = VerifyCadence::parse(o.verify);

    RunOutcome out;
    RunReport& rep = out.report;
    rep.algo = o.algo;
    rep.n = w.n;
    rep.seed = o.seed;
    rep.wrapped = o.wrap;
    rep.verify_mode = o.verify;
    if (o.algo == "spanner") rep.k = o.k;

    UpdaterFactory factory;
    if (o.algo == "matching") factory = matching_factory(o);
    else if (o.algo == "spanner") factory = spanner_factory(o);
    else throw std::invalid_argument("unknown algo: " + o.algo);

    std::unordered_set<Edge> graph;  // harness mirror for oracles
    std::vector<std::uint64_t> units, units_nf;
    units.reserve(w.ops.size());
    units_nf.reserve(w.ops.size());

    auto apply_mirror = [&graph](const UpdateOp& op) {
        if (op.kind == OpKind::Insert) graph.insert(op.edge);
        else graph.erase(op.edge);
    };

    std::unique_ptr<SteppableUpdater> solo;
    std::unique_ptr<Reduction> red;
    if (o.wrap) {
        std::uint64_t alpha = o.alpha ? o.alpha : calibrate_alpha(factory, w);
        std::uint64_t ell = o.ell ? o.ell : std::max<std::uint64_t>(2, w.ops.size());
        red = std::make_unique<Reduction>(factory, w.n, alpha, ell, o.copies_c);
        rep.q = red->q();
        rep.r = red->r();
    } else {
        solo = factory(0);
    }

    auto verify_now = [&](std::uint64_t idx) {
        ++rep.verify_checked;
        std::string why;
        bool ok = true;
        if (o.algo == "matching") {
            const MaximalMatching* m =
                o.wrap ? dynamic_cast<const MaximalMatching*>(&red->pointed())
                       : dynamic_cast<const MaximalMatching*>(solo.get());
            OracleResult vr = verify_matching(graph, m->iterate_matching());
            OracleResult ir = check_matching_invariants(*m);
            ok = vr.ok && ir.ok;
            why = vr.ok ? ir.what : vr.what;
        } else {
            if (o.wrap) {
                const DynamicSpanner* sp = dynamic_cast<const DynamicSpanner*>(&red->pointed());
                bool pointed_ok = sp->verify_stretch(0).pass;
                std::unordered_set<Edge> uni;
                for (std::size_t i = 0; i < red->size(); ++i) {
                    auto* c = dynamic_cast<const DynamicSpanner*>(&red->copy(i));
                    for (const Edge& e : c->spanner_edges()) uni.insert(e);
                }
                bool union_ok =
                    stretch_ok(w.n, graph, {uni.begin(), uni.end()}, o.k);
                ok = pointed_ok && union_ok;
                why = pointed_ok ? "union stretch failed" : "pointed-copy stretch failed";
            } else {
                auto* sp = dynamic_cast<const DynamicSpanner*>(solo.get());
                auto sr = sp->verify_stretch(0);
                ok = sr.pass;
                why = "stretch failed";
            }
        }
        if (!ok) {
            ++rep.verify_failed;
            if (out.fail_detail.empty()) {
                const SteppableUpdater* inst = o.wrap ? &red->pointed() : solo.get();
                char digest[32];
                std::snprintf(digest, sizeof digest, "%016llx",
                              static_cast<unsigned long long>(inst->digest()));
                out.fail_detail =
                    "update " + std::to_string(idx) + ": " + why + " (state " + digest + ")";
            }
        }
    };

    for (std::uint64_t t = 0; t < w.ops.size(); ++t) {
        const UpdateOp& op = w.ops[t];
        apply_mirror(op);
        if (o.wrap) {
            UpdateReport ur = red->apply_update(op);
            units.push_back(ur.units_charged);
            units_nf.push_back(ur.units_charged - ur.flush_units);
        } else {
            std::uint64_t before = solo->meter().units;
            solo->enqueue(op);
            solo->run_to_completion();
            units.push_back(solo->meter().units - before);
            units_nf.push_back(units.back());
        }
        if (cad.every && (t + 1) % cad.every == 0) verify_now(t);
    }
    if (!w.ops.empty() && (cad.final_only || (cad.every && w.ops.size() % cad.every != 0)))
        verify_now(w.ops.size() - 1);

    rep.units = UnitStats::of(units);
    rep.units_no_flush = UnitStats::of(units_nf);
    rep.flush_count = o.wrap ? red->flush_count() : 0;

    if (o.algo == "spanner") {
        if (o.wrap) {
            std::unordered_set<Edge> uni;
            for (std::size_t i = 0; i < red->size(); ++i) {
                auto* c = dynamic_cast<const DynamicSpanner*>(&red->copy(i));
                for (const Edge& e : c->spanner_edges()) uni.insert(e);
            }
            rep.spanner_size = uni.size();
        } else {
            rep.spanner_size = dynamic_cast<const DynamicSpanner*>(solo.get())->spanner_size();
        }
    }

    if (!o.csv_path.empty()) {
        std::ofstream f(o.csv_path, std::ios::binary);
        f << "update,units,units_no_flush\n";
        for (std::size_t t = 0; t < units.size(); ++t)
            f << t << "," << units[t] << "," << units_nf[t] << "\n";
    }
    if (!o.dump_path.empty()) {
        json d;
        d["algo"] = o.algo;
        d["n"] = w.n;
        if (o.algo == "spanner") d["k"] = o.k;
        json edges = json::array();
        {
            std::vector<Edge> es(graph.begin(), graph.end());
            std::sort(es.begin(), es.end());
            for (const Edge& e : es) edges.push_back({e.lo, e.hi});
        }
        d["edges"] = edges;
        json sub = json::array();
        if (o.algo == "matching") {
            const MaximalMatching* m =
                o.wrap ? dynamic_cast<const MaximalMatching*>(&red->pointed())
                       : dynamic_cast<const MaximalMatching*>(solo.get());
            std::vector<Edge> me = m->iterate_matching();
            std::sort(me.begin(), me.end());
            for (const Edge& e : me) sub.push_back({e.lo, e.hi});
            d["matching"] = sub;
        } else {
            std::vector<Edge> he;
            if (o.wrap) {
                std::unordered_set<Edge> uni;
                for (std::size_t i = 0; i < red->size(); ++i) {
                    auto* c = dynamic_cast<const DynamicSpanner*>(&red->copy(i));
                    for (const Edge& e : c->spanner_edges()) uni.insert(e);
                }
                he.assign(uni.begin(), uni.end());
            } else {
                he = dynamic_cast<const DynamicSpanner*>(solo.get())->spanner_edges();
            }
            std::sort(he.begin(), he.end());
            for (const Edge& e : he) sub.push_back({e.lo, e.hi});
            d["spanner"] = sub;
        }
        std::ofstream f(o.dump_path, std::ios::binary);
        f << d.dump(2) << "\n";
    }
    if (!o.report_path.empty()) rep.save(o.report_path);
    return out;
}

// Offline check of a state dump produced by `run --dump`.
inline OracleResult verify_dump(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read dump: " + path);
    json d = json::parse(f);
    OracleResult r;
    std::unordered_set<Edge> graph;
    for (const auto& e : d.at("edges"))
        graph.insert(canonical(Vertex(e[0]), Vertex(e[1])));
    std::string algo = d.at("algo");
    if (algo == "matching") {
        std::vector<Edge> matching;
        for (const auto& e : d.at("matching"))
            matching.push_back(canonical(Vertex(e[0]), Vertex(e[1])));
        return verify_matching(graph, matching);
    }
    if (algo == "spanner") {
        std::vector<Edge> H;
        for (const auto& e : d.at("spanner"))
            H.push_back(canonical(Vertex(e[0]), Vertex(e[1])));
        for (const Edge& e : H)
            if (!graph.count(e)) r.fail("spanner edge not in graph");
        if (r.ok && !stretch_ok(d.at("n"), graph, H, d.at("k"))) r.fail("stretch violated");
        return r;
    }
    r.fail("unknown dump algo: " + algo);
    return r;
}

}  // namespace dynalgo
