#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dynalgo/core.hpp"
#include "dynalgo/filter.hpp"
#include "dynalgo/matching.hpp"
#include "dynalgo/spanner.hpp"

namespace dynalgo {

struct OracleResult {
    bool ok = true;
    std::string what;

    void fail(const std::string& s) {
        if (ok) what = s;
        ok = false;
    }
    explicit operator bool() const { return ok; }
};

// A matching is valid iff its edges are current and vertex-disjoint; it is
// maximal iff no current edge has two unmatched endpoints.
inline OracleResult verify_matching(const std::unordered_set<Edge>& graph,
                                    const std::vector<Edge>& matching) {
    OracleResult r;
    std::unordered_map<Vertex, Vertex> mate;
    for (const Edge& e : matching) {
        if (!graph.count(e)) r.fail("matched edge not in graph");
        if (mate.count(e.lo) || mate.count(e.hi)) r.fail("matching not vertex-disjoint");
        mate[e.lo] = e.hi;
        mate[e.hi] = e.lo;
    }
    for (const Edge& e : graph)
        if (!mate.count(e.lo) && !mate.count(e.hi)) {
            r.fail("edge between two unmatched vertices");
            break;
        }
    return r;
}

// Full-scan check of the hierarchy invariants (ownership, level/matching
// coupling, degree bounds), phi consistency against a from-scratch
// recomputation, the exact ownership/complement table views, and maximality.
inline OracleResult check_matching_invariants(const MaximalMatching& m) {
    OracleResult r;
    const std::uint32_t n = m.cfg_.n;
    const int top = m.top_level();

    if (!m.queue_.empty()) r.fail("queue not empty between updates");

    // ownership and complement views
    std::size_t own_total = 0, nbr_total = 0;
    for (Vertex v = 0; v < n; ++v) {
        own_total += m.own_[v].size();
        for (int l = -1; l <= top; ++l) nbr_total += m.nbr(v, l).size();
    }
    if (own_total != m.edges_.size()) r.fail("own tables do not partition the edge set");
    if (nbr_total != m.edges_.size()) r.fail("nbr tables out of sync with edge set");
    for (const Edge& e : m.edges_) {
        bool by_lo = m.own_[e.lo].count(e.hi) > 0;
        bool by_hi = m.own_[e.hi].count(e.lo) > 0;
        if (by_lo == by_hi) {
            r.fail("edge owned by zero or two endpoints");
            continue;
        }
        Vertex owner = by_lo ? e.lo : e.hi;
        Vertex other = e.other(owner);
        if (m.level_[owner] < m.level_[other]) r.fail("edge owned by the lower endpoint");
        if (!m.nbr(other, m.level_[owner]).count(owner))
            r.fail("edge missing from the complement table");
    }

    // level/matching coupling and matched-set consistency
    for (Vertex v = 0; v < n; ++v) {
        bool matched = m.mate_[v] != kNoVertex;
        if (m.level_[v] >= 0 && !matched) r.fail("vertex at level >= 0 is free");
        if (m.level_[v] == -1 && matched) r.fail("vertex at level -1 is matched");
        if (matched) {
            Vertex w = m.mate_[v];
            if (m.mate_[w] != v) r.fail("mate map is not an involution");
            if (m.level_[v] != m.level_[w]) r.fail("matched endpoints at different levels");
            if (!m.edges_.count(canonical(v, w))) r.fail("matched edge not in graph");
            if (!m.matched_.count(canonical(v, w))) r.fail("matched edge set out of sync");
        }
    }
    if (m.matched_.size() * 2 != std::uint64_t(std::count_if(
                                     m.mate_.begin(), m.mate_.end(),
                                     [](Vertex x) { return x != kNoVertex; })))
        r.fail("matched edge count out of sync");

    // phi consistency + the 4^j degree bound from recomputed below counts
    std::vector<std::vector<std::int64_t>> below(n, std::vector<std::int64_t>(top + 2, 0));
    for (const Edge& e : m.edges_) {
        // neighbor at level l contributes to below_j for all j > l
        below[e.lo][m.level_[e.hi] + 1]++;
        below[e.hi][m.level_[e.lo] + 1]++;
    }
    for (Vertex v = 0; v < n; ++v) {
        std::int64_t acc = 0;
        for (int j = 0; j <= top; ++j) {
            acc += below[v][j];  // neighbors at level < j (offset by one)
            std::int64_t expect = (j > m.level_[v]) ? acc : 0;
            if (m.phi_[v][j] != expect) r.fail("phi out of sync at level " + std::to_string(j));
            if (j > m.level_[v] && acc >= (std::int64_t(1) << (2 * j)))
                r.fail("below-count exceeds 4^j");
        }
    }

    // maximality
    for (const Edge& e : m.edges_)
        if (m.mate_[e.lo] == kNoVertex && m.mate_[e.hi] == kNoVertex) {
            r.fail("matching not maximal");
            break;
        }
    return r;
}

// Structural validator for the spanner hierarchy: recomputes every derived
// set from scratch and compares with the maintained state.
inline OracleResult check_spanner_state(const DynamicSpanner& sp) {
    OracleResult r;
    const auto& p = sp.params();
    for (std::uint32_t i = 0; i < p.k; ++i) {
        const auto& L = sp.levels_[i];
        // edge endpoints placed, filing keys correct, adjacency exact
        std::size_t filed_sides = 0;
        for (const Edge& e : L.edges) {
            for (Vertex side : {e.lo, e.hi}) {
                Vertex other = e.other(side);
                auto itf = L.filed.find(e);
                ClusterId key = itf == L.filed.end()
                                    ? kNoVertex
                                    : (side == e.lo ? itf->second.first : itf->second.second);
                ClusterId want = sp.cluster_of(i, other);
                if (key != want) r.fail("level " + std::to_string(i) + ": edge filed under stale cluster");
                if (key != kNoVertex) {
                    ++filed_sides;
                    auto itm = L.adj.find(side);
                    if (itm == L.adj.end() || !itm->second.count(key) ||
                        !itm->second.at(key).count(e))
                        r.fail("adjacency table missing a filed edge");
                }
            }
            if (!sp.in_level(i, e.lo) || !sp.in_level(i, e.hi))
                r.fail("level edge with endpoint outside V_i");
        }
        std::size_t adj_total = 0;
        for (const auto& [u, mm] : L.adj)
            for (const auto& [c, es] : mm) {
                adj_total += es.size();
                if (es.empty()) r.fail("empty cluster bucket kept in adjacency");
            }
        if (adj_total != 2 * L.edges.size() || filed_sides != adj_total)
            r.fail("level " + std::to_string(i) + ": adjacency tables out of sync");

        // sampled counts and hooks
        for (const auto& [u, mm] : L.adj) {
            std::uint64_t scnt = 0;
            for (const auto& [c, es] : mm)
                if (sp.cluster_sampled(i, c)) scnt += es.size();
            auto itc = L.sampled_cnt.find(u);
            std::uint64_t have = itc == L.sampled_cnt.end() ? 0 : itc->second;
            if (scnt != have) r.fail("sampled edge count out of sync");
            ClusterId own = sp.cluster_of(i, u);
            bool in_n = own != kNoVertex && !sp.cluster_sampled(i, own) && scnt > 0;
            bool has_hook = L.hook.count(u) > 0;
            if (in_n != has_hook) r.fail("hook existence mismatch");
            if (has_hook) {
                Edge h = L.hook.at(u);
                ClusterId tgt = sp.cluster_of(i, h.other(u));
                if (!sp.cluster_sampled(i, tgt)) r.fail("hook edge leads to a non-sampled cluster");
                if (L.hook_target.at(u) != tgt) r.fail("hook target out of sync");
                if (!mm.count(tgt) || !mm.at(tgt).count(h)) r.fail("hook edge is not a current edge");
            }
        }

        // next-level assignment rule
        std::unordered_set<Vertex> vi;
        if (i == 0)
            for (Vertex v = 0; v < p.n; ++v) vi.insert(v);
        else
            for (const auto& [u, c] : sp.levels_[i - 1].next_cluster) vi.insert(u);
        for (Vertex u : vi) {
            ClusterId own = sp.cluster_of(i, u);
            ClusterId want = kNoVertex;
            if (own != kNoVertex) {
                if (sp.cluster_sampled(i, own)) want = own;
                else if (L.hook.count(u)) want = sp.cluster_of(i, L.hook.at(u).other(u));
            }
            auto itn = L.next_cluster.find(u);
            ClusterId have = itn == L.next_cluster.end() ? kNoVertex : itn->second;
            if (want != have) r.fail("level " + std::to_string(i) + ": next-cluster rule violated");
        }
        for (const auto& [u, c] : L.next_cluster)
            if (!vi.count(u)) r.fail("next-cluster entry for vertex outside V_i");

        // membership rule for E_{i+1}
        if (i + 1 < p.k) {
            std::unordered_set<Edge> expect;
            for (const Edge& e : L.edges) {
                auto nu = L.next_cluster.find(e.lo);
                auto nv = L.next_cluster.find(e.hi);
                if (nu == L.next_cluster.end() || nv == L.next_cluster.end()) continue;
                if (nu->second == nv->second) continue;
                bool samp = sp.cluster_sampled(i, sp.cluster_of(i, e.lo)) ||
                            sp.cluster_sampled(i, sp.cluster_of(i, e.hi));
                bool ff = false;
                if (!samp) {
                    auto fu = L.filter.find(e.lo);
                    auto fv = L.filter.find(e.hi);
                    ff = fu != L.filter.end() && fv != L.filter.end() &&
                         fu->second.in_filtered(e) && fv->second.in_filtered(e);
                }
                if (samp || ff) expect.insert(e);
            }
            if (expect != sp.levels_[i + 1].edges)
                r.fail("level " + std::to_string(i + 1) + ": edge set does not match the rule");
        }

        // per-vertex filter invariants and count cross-check
        for (const auto& [u, fs] : L.filter) {
            FilterCheck fc = check_filter_invariants(fs);
            if (!fc.ok) r.fail("filter(" + std::to_string(u) + "): " + fc.what);
            for (const auto& [c, cnt] : fs.counts()) {
                auto itm = L.adj.find(u);
                std::uint64_t have = 0;
                if (itm != L.adj.end()) {
                    auto itc = itm->second.find(c);
                    if (itc != itm->second.end()) have = itc->second.size();
                }
                if (sp.cluster_sampled(i, c)) r.fail("filter tracks a sampled cluster");
                if (cnt != have) r.fail("filter count out of sync with adjacency");
            }
        }

        // forest radius: every placed vertex reaches its center in <= i hops
        if (i >= 1) {
            for (const auto& [u, c] : sp.levels_[i - 1].next_cluster) {
                Vertex x = u;
                std::uint32_t hops = 0;
                while (x != c && hops <= i) {
                    auto pe = sp.parent_edge(i, x);
                    if (!pe) break;
                    x = pe->other(x);
                    ++hops;
                }
                if (x != c) r.fail("cluster tree broken at level " + std::to_string(i));
                if (hops > i) r.fail("cluster radius exceeds level index");
            }
        }
    }
    return r;
}

// From-scratch replay oracle: rebuild an instance with the same seed/label
// over the op prefix and compare digests.
template <class Updater, class Factory>
OracleResult replay_matches(const Updater& live, Factory make_fresh,
                            const std::vector<UpdateOp>& prefix) {
    OracleResult r;
    auto fresh = make_fresh();
    for (const auto& op : prefix) fresh->enqueue(op);
    fresh->run_to_completion();
    if (fresh->digest() != live.digest()) r.fail("replay digest mismatch");
    return r;
}

}  // namespace dynalgo
