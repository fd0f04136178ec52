#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dynalgo/core.hpp"
#include "dynalgo/rng.hpp"

namespace dynalgo {

// Serialized update stream. File format is line oriented and bit-exact for
// replay: header "n <N>", then one op per line, "i <u> <v>" or "d <u> <v>".
struct Workload {
    std::uint64_t n = 0;
    std::vector<UpdateOp> ops;
    std::string meta;

    bool validate() const {
        std::unordered_set<Edge> present;
        for (const auto& op : ops) {
            if (op.edge.lo >= op.edge.hi || op.edge.hi >= n) return false;
            if (op.kind == OpKind::Insert) {
                if (!present.insert(op.edge).second) return false;
            } else {
                if (!present.erase(op.edge)) return false;
            }
        }
        return true;
    }

    std::string to_text() const {
        std::ostringstream os;
        os << "n " << n << "\n";
        for (const auto& op : ops)
            os << (op.kind == OpKind::Insert ? 'i' : 'd') << ' ' << op.edge.lo << ' '
               << op.edge.hi << '\n';
        return os.str();
    }

    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write workload file: " + path);
        f << to_text();
    }

    static Workload load(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw std::runtime_error("cannot read workload file: " + path);
        Workload w;
        std::string tok;
        if (!(f >> tok) || tok != "n" || !(f >> w.n))
            throw std::runtime_error("workload file: bad header");
        char kind;
        std::uint64_t a, b;
        while (f >> kind >> a >> b) {
            if (kind != 'i' && kind != 'd') throw std::runtime_error("workload file: bad op kind");
            w.ops.push_back({kind == 'i' ? OpKind::Insert : OpKind::Delete,
                             canonical(Vertex(a), Vertex(b))});
        }
        return w;
    }
};

// Uniform random stream: each step inserts a uniformly random absent edge
// with probability `bias`, otherwise deletes a uniformly random present
// edge; impossible steps flip the action.
inline Workload gen_uniform(std::uint64_t n, std::uint64_t steps, double bias, std::uint64_t seed) {
    if (n < 2 || steps < 1 || bias <= 0.0 || bias > 1.0)
        throw std::invalid_argument("gen_uniform: need n>=2, steps>=1, bias in (0,1]");
    Workload w;
    w.n = n;
    w.meta = "uniform n=" + std::to_string(n) + " steps=" + std::to_string(steps) +
             " bias=" + std::to_string(bias) + " seed=" + std::to_string(seed);
    RandomSource rng(seed, "gen-uniform");
    std::vector<Edge> present;
    std::unordered_map<Edge, std::size_t> where;
    const std::uint64_t all_pairs = n * (n - 1) / 2;
    for (std::uint64_t s = 0; s < steps; ++s) {
        bool ins = rng.bernoulli(bias);
        if (ins && present.size() == all_pairs) ins = false;
        if (!ins && present.empty()) ins = true;
        if (ins) {
            Edge e{0, 0};
            for (;;) {
                Vertex u = Vertex(rng.uniform_index(n));
                Vertex v = Vertex(rng.uniform_index(n));
                if (u == v) continue;
                e = canonical(u, v);
                if (!where.count(e)) break;
            }
            where[e] = present.size();
            present.push_back(e);
            w.ops.push_back({OpKind::Insert, e});
        } else {
            std::size_t idx = rng.uniform_index(present.size());
            Edge e = present[idx];
            present[idx] = present.back();
            where[present[idx]] = idx;
            present.pop_back();
            where.erase(e);
            w.ops.push_back({OpKind::Delete, e});
        }
    }
    return w;
}

// The adversarial matching cycle: center v keeps a never-deleted edge to v'
// plus a churning fringe of x/y vertices sized so that |below(v)| stays in
// [4^i, 2*4^i] while v sits at level i.
inline Workload gen_matching_adversary(std::uint32_t level, std::uint64_t rounds,
                                       std::uint64_t seed, std::uint64_t n_override = 0) {
    if (level < 1 || rounds < 1)
        throw std::invalid_argument("gen_matching_adversary: need level>=1, rounds>=1");
    std::uint64_t m = (1ull << (2 * level)) - 1;  // 4^level - 1
    Workload w;
    w.n = n_override ? n_override : 2 + 2 * m;
    if (w.n < 2 + 2 * m) throw std::invalid_argument("gen_matching_adversary: n too small");
    w.meta = "matching-adversary level=" + std::to_string(level) +
             " rounds=" + std::to_string(rounds) + " seed=" + std::to_string(seed);
    Vertex v = 0, vp = 1;
    auto x = [&](std::uint64_t j) { return Vertex(2 + j); };
    auto y = [&](std::uint64_t j) { return Vertex(2 + m + j); };
    w.ops.push_back(insert_op(v, vp));
    for (std::uint64_t j = 0; j < m; ++j) w.ops.push_back(insert_op(v, x(j)));
    for (std::uint64_t r = 0; r < rounds; ++r) {
        for (std::uint64_t j = 0; j < m; ++j) w.ops.push_back(insert_op(v, y(j)));
        for (std::uint64_t j = 0; j < m; ++j) w.ops.push_back(delete_op(v, x(j)));
        for (std::uint64_t j = 0; j < m; ++j) w.ops.push_back(insert_op(v, x(j)));
        for (std::uint64_t j = 0; j < m; ++j) w.ops.push_back(delete_op(v, y(j)));
    }
    return w;
}

// Skewed cluster-degree configuration: a designated vertex u with one heavy
// neighboring vertex group (interconnected through a hub, so it clusters
// together once the hub is sampled) plus many single-edge neighbors, then a
// churn phase over the heavy edges.
struct SkewShape {
    Vertex u = 0;
    Vertex hub = 1;
    std::uint64_t group_size = 0;
    std::uint64_t singles = 0;
};

inline Workload gen_spanner_skew(std::uint64_t n, std::uint32_t k, std::uint64_t seed,
                                 SkewShape* shape_out = nullptr) {
    if (n < 8) throw std::invalid_argument("gen_spanner_skew: need n >= 8");
    Workload w;
    w.n = n;
    w.meta = "spanner-skew n=" + std::to_string(n) + " k=" + std::to_string(k) +
             " seed=" + std::to_string(seed);
    std::uint64_t h = std::max<std::uint64_t>(4, n / 4);
    double p_inv = std::pow(double(n), 1.0 / double(k));
    std::uint64_t s = std::uint64_t(p_inv * double(ceil_log2(n))) + 1;
    if (2 + h + s > n) s = n - 2 - h;
    SkewShape shape;
    shape.group_size = h;
    shape.singles = s;
    if (shape_out) *shape_out = shape;
    auto grp = [&](std::uint64_t j) { return Vertex(2 + j); };
    auto single = [&](std::uint64_t j) { return Vertex(2 + h + j); };
    for (std::uint64_t j = 0; j < h; ++j) w.ops.push_back(insert_op(shape.hub, grp(j)));
    for (std::uint64_t j = 0; j < h; ++j) w.ops.push_back(insert_op(shape.u, grp(j)));
    for (std::uint64_t j = 0; j < s; ++j) w.ops.push_back(insert_op(shape.u, single(j)));
    RandomSource rng(seed, "gen-skew");
    std::uint64_t churn = 3 * h;
    for (std::uint64_t t = 0; t < churn; ++t) {
        std::uint64_t j = rng.uniform_index(h);
        w.ops.push_back(delete_op(shape.u, grp(j)));
        w.ops.push_back(insert_op(shape.u, grp(j)));
    }
    return w;
}

// Star at a high hierarchy level whose spokes get deleted and reinserted one
// at a time: deletions that hit the matched edge are expensive, everything
// else is cheap. Used for the wrapped-vs-unwrapped tail contrast.
inline Workload gen_planted_deletions(std::uint64_t n, std::uint32_t level, std::uint64_t rounds,
                                      std::uint64_t seed) {
    std::uint64_t m = (1ull << (2 * level)) - 1;
    if (n < 2 + m) throw std::invalid_argument("gen_planted_deletions: n too small for level");
    Workload w;
    w.n = n;
    w.meta = "planted level=" + std::to_string(level) + " rounds=" + std::to_string(rounds) +
             " seed=" + std::to_string(seed);
    Vertex v = 0, vp = 1;
    auto x = [&](std::uint64_t j) { return Vertex(2 + j); };
    w.ops.push_back(insert_op(v, vp));
    for (std::uint64_t j = 0; j < m; ++j) w.ops.push_back(insert_op(v, x(j)));
    for (std::uint64_t r = 0; r < rounds; ++r)
        for (std::uint64_t j = 0; j < m; ++j) {
            w.ops.push_back(delete_op(v, x(j)));
            w.ops.push_back(insert_op(v, x(j)));
        }
    return w;
}

}  // namespace dynalgo
