#pragma once

#include <cassert>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dynalgo/core.hpp"
#include "dynalgo/rng.hpp"

namespace dynalgo {

// Ordered set split at a fixed rank: elements at position > threshold are
// "marked". Every insert/erase reports the status of the touched element and
// the at-most-one element whose marked status flipped at the boundary.
// The boundary is stored by value, so the structure is copyable.
template <class T>
class BoundedPrefixSet {
  public:
    explicit BoundedPrefixSet(std::uint64_t threshold = UINT64_MAX) : th_(threshold) {}

    struct Delta {
        bool self_marked = false;
        std::optional<T> crossed;  // element whose marked bit flipped
    };

    Delta insert(const T& x) {
        Delta d;
        auto [it, fresh] = s_.insert(x);
        if (!fresh) throw std::logic_error("BoundedPrefixSet: duplicate insert");
        if (!bd_) {
            if (s_.size() > th_) {
                auto last = std::prev(s_.end());
                bd_ = *last;
                if (*last == x) d.self_marked = true;
                else d.crossed = *last;
            }
            return d;
        }
        if (x < *bd_) {
            auto nb = std::prev(s_.find(*bd_));
            bd_ = *nb;
            if (*nb == x) d.self_marked = true;
            else d.crossed = *nb;
        } else {
            d.self_marked = true;
        }
        return d;
    }

    Delta erase(const T& x) {
        Delta d;
        auto it = s_.find(x);
        if (it == s_.end()) throw std::logic_error("BoundedPrefixSet: erase of absent element");
        if (!bd_) {
            s_.erase(it);
            return d;
        }
        if (x < *bd_) {
            auto b = s_.find(*bd_);
            d.crossed = *b;  // boundary element becomes unmarked
            auto nx = std::next(b);
            bd_ = (nx == s_.end()) ? std::nullopt : std::optional<T>(*nx);
            s_.erase(it);
        } else if (x == *bd_) {
            d.self_marked = true;
            auto nx = std::next(it);
            bd_ = (nx == s_.end()) ? std::nullopt : std::optional<T>(*nx);
            s_.erase(it);
        } else {
            d.self_marked = true;
            s_.erase(it);
        }
        return d;
    }

    bool marked(const T& x) const { return bd_ && !(x < *bd_); }
    bool contains(const T& x) const { return s_.count(x) > 0; }
    std::size_t size() const { return s_.size(); }
    std::uint64_t threshold() const { return th_; }
    auto begin() const { return s_.begin(); }
    auto end() const { return s_.end(); }
    auto lower_bound(const T& x) const { return s_.lower_bound(x); }

  private:
    std::set<T> s_;
    std::uint64_t th_;
    std::optional<T> bd_;  // value of the first marked element
};

using ClusterId = Vertex;
constexpr int kBucketNegInf = INT32_MIN;

struct FilterParams {
    std::uint64_t lambda = 4;  // 2^ceil(log2(4 + ln n))
    std::uint64_t ell = 1;     // cluster-count threshold of condition (F2)
    int jmax = 0;              // highest bucket index
    std::uint32_t charge_log = 1;

    static FilterParams make(std::uint64_t n, std::uint32_t k, double a = 2.0, double eps = 0.25,
                             double gamma = 80.0, double ell_scale = 1.0) {
        if (n < 2) throw std::invalid_argument("filter params: n must be >= 2");
        FilterParams p;
        double target = 4.0 + std::log(double(n));
        p.lambda = 1;
        while (double(p.lambda) < target) p.lambda <<= 1;
        double lf = 4.0 * gamma * a * double(p.lambda) * double(p.lambda) / (eps * eps * eps) *
                    std::pow(double(n), 1.0 / double(k)) * std::log(double(n)) *
                    std::log(double(p.lambda));
        double scaled = lf * ell_scale;
        const double cap = 9.0e15;
        if (scaled > cap) scaled = cap;
        p.ell = scaled < 1.0 ? 1 : static_cast<std::uint64_t>(scaled + 0.5);
        p.jmax = static_cast<int>(ceil_log2(n)) + 1;
        p.charge_log = ceil_log2(n);
        return p;
    }

    std::uint64_t alpha(int j) const { return j == kBucketNegInf ? 0 : (1ull << j); }

    std::uint64_t edge_threshold(int j) const {  // first th pairs of T_j stay out of F
        if (j == kBucketNegInf) return UINT64_MAX;
        std::uint64_t a = alpha(j);
        if (ell > UINT64_MAX / 8 / lambda / (a ? a : 1)) return UINT64_MAX / 2;
        return ell * lambda * a;
    }

    std::uint64_t cluster_threshold() const {  // first th clusters of B_j form I
        if (ell > UINT64_MAX / 8 / lambda / lambda) return UINT64_MAX / 2;
        return 1 + lambda * lambda * ell;
    }
};

struct FChange {
    Edge edge;
    bool added;  // true: entered F, false: left F
};

struct MoveEvent {
    ClusterId cluster;
    int from;
    int to;
    bool forced;
    std::uint64_t count;
};

struct FilterResult {
    std::vector<FChange> changes;
    std::uint64_t units = 0;
};

// Per-(level, vertex) probabilistic-threshold edge filter. Clusters live in
// buckets by edge count; a cluster moves up with probability min(1/alpha_j, 1)
// once its count reaches 2*alpha_j (forced at lambda*alpha_j), and moves down
// with probability min(2^(2t+1)/alpha_j, 1) for the deepest undershoot t
// (forced at alpha_j/lambda). The filtered edge set F and the inactive
// cluster set I follow invariants (B2)/(B3) exactly.
class FilterState {
  public:
    using CPair = std::pair<ClusterId, Edge>;

    explicit FilterState(const FilterParams& p) : p_(p) {
        buckets_.reserve(p_.jmax + 2);
        for (int j = -1; j <= p_.jmax; ++j) {
            buckets_.push_back(Bucket{
                BoundedPrefixSet<ClusterId>(j < 0 ? 0 : p_.cluster_threshold()),
                BoundedPrefixSet<CPair>(j < 0 ? UINT64_MAX : p_.edge_threshold(j)),
            });
        }
    }

    FilterResult insert(ClusterId c, const Edge& e, RandomSource& rng) {
        FilterResult res;
        ++ops_;
        int j = bucket_lookup(c);
        std::uint64_t cnt = ++cnt_[c];
        res.units += 2;
        tins(j, {c, e}, res);
        std::uint64_t a = p_.alpha(j);
        if (cnt >= 2 * a) {
            bool forced = (a > 0 && cnt == p_.lambda * a);
            double pr = (a == 0) ? 1.0 : (1.0 / double(a) > 1.0 ? 1.0 : 1.0 / double(a));
            bool heads = rng.bernoulli(pr);
            res.units += 1;
            if (heads || forced) move(c, j, static_cast<int>(ceil_log2(cnt)), res, forced);
        }
        induced_ += res.changes.size();
        return res;
    }

    FilterResult erase(ClusterId c, const Edge& e, RandomSource& rng) {
        FilterResult res;
        ++ops_;
        auto itc = cnt_.find(c);
        if (itc == cnt_.end() || itc->second == 0)
            throw std::logic_error("filter erase: cluster has no edges");
        int j = bucket_lookup(c);
        std::uint64_t cnt = --itc->second;
        res.units += 2;
        ters(j, {c, e}, res);
        std::uint64_t a = p_.alpha(j);
        if (j != kBucketNegInf && 2 * cnt <= a) {
            bool forced = (cnt == a / p_.lambda);
            double pr;
            if (cnt == 0) {
                pr = 1.0;
            } else {
                std::uint64_t t = std::uint64_t(j) - ceil_log2(cnt);
                double num = std::pow(2.0, double(2 * t + 1));
                pr = num / double(a);
                if (pr > 1.0) pr = 1.0;
            }
            bool heads = rng.bernoulli(pr);
            res.units += 1;
            if (heads || forced) {
                int jt = cnt == 0 ? kBucketNegInf : static_cast<int>(floor_log2(cnt));
                move(c, j, jt, res, forced);
            }
        }
        if (itc->second == 0 && bucket_lookup(c) == kBucketNegInf) {
            cnt_.erase(c);
            bucket_of_.erase(c);
            res.units += 2;
        }
        induced_ += res.changes.size();
        return res;
    }

    bool in_filtered(const Edge& e) const { return filtered_.count(e) > 0; }
    bool in_inactive(ClusterId c) const { return inactive_.count(c) > 0; }
    const std::unordered_set<Edge>& filtered() const { return filtered_; }
    const std::unordered_set<ClusterId>& inactive() const { return inactive_; }
    std::uint64_t cluster_count(ClusterId c) const {
        auto it = cnt_.find(c);
        return it == cnt_.end() ? 0 : it->second;
    }
    int bucket_lookup(ClusterId c) const {
        auto it = bucket_of_.find(c);
        return it == bucket_of_.end() ? kBucketNegInf : it->second;
    }
    const FilterParams& params() const { return p_; }

    std::uint64_t ops() const { return ops_; }
    std::uint64_t induced() const { return induced_; }

    std::vector<MoveEvent>* move_log = nullptr;  // optional test observer

    // bucket introspection for invariant checks
    const BoundedPrefixSet<ClusterId>& bucket_clusters(int j) const { return buckets_[j - kLow].B; }
    const BoundedPrefixSet<CPair>& bucket_pairs(int j) const { return buckets_[j - kLow].T; }
    int jmax() const { return p_.jmax; }
    const std::unordered_map<ClusterId, std::uint64_t>& counts() const { return cnt_; }
    const std::unordered_map<ClusterId, int>& buckets_of() const { return bucket_of_; }

  private:
    static constexpr int kLow = -1;  // bucket array offset; index 0 is -inf

    struct Bucket {
        BoundedPrefixSet<ClusterId> B;
        BoundedPrefixSet<CPair> T;
    };

    Bucket& bkt(int j) { return buckets_[j == kBucketNegInf ? 0 : j + 1]; }

    void tins(int j, const CPair& p, FilterResult& res) {
        auto d = bkt(j).T.insert(p);
        res.units += p_.charge_log;
        if (d.self_marked) fset(p.second, true, res);
        if (d.crossed) fset(d.crossed->second, true, res);
    }
    void ters(int j, const CPair& p, FilterResult& res) {
        auto d = bkt(j).T.erase(p);
        res.units += p_.charge_log;
        if (d.self_marked) fset(p.second, false, res);
        if (d.crossed) fset(d.crossed->second, false, res);
    }
    void bins(int j, ClusterId c, FilterResult& res) {
        if (j == kBucketNegInf) return;
        auto d = bkt(j).B.insert(c);
        res.units += p_.charge_log;
        if (!d.self_marked) iset(c, true, res);
        if (d.crossed) iset(*d.crossed, false, res);  // pushed beyond the prefix
    }
    void bers(int j, ClusterId c, FilterResult& res) {
        if (j == kBucketNegInf) return;
        auto d = bkt(j).B.erase(c);
        res.units += p_.charge_log;
        if (!d.self_marked) iset(c, false, res);
        if (d.crossed) iset(*d.crossed, true, res);  // pulled into the prefix
    }
    void fset(const Edge& e, bool in, FilterResult& res) {
        if (in) {
            auto [_, fresh] = filtered_.insert(e);
            if (fresh) res.changes.push_back({e, true});
        } else {
            if (filtered_.erase(e)) res.changes.push_back({e, false});
        }
        res.units += 1;
    }
    void iset(ClusterId c, bool in, FilterResult&) {
        if (in) inactive_.insert(c);
        else inactive_.erase(c);
    }

    // Move cluster c with all its pairs from bucket jf to bucket jt.
    void move(ClusterId c, int jf, int jt, FilterResult& res, bool forced = false) {
        if (jf == jt) return;
        auto itc = cnt_.find(c);
        std::uint64_t cnt = itc == cnt_.end() ? 0 : itc->second;
        if (move_log) move_log->push_back({c, jf, jt, forced, cnt});
        if (jt != kBucketNegInf) {
            // arrival window (B1'): alpha_jt/2 < cnt < 2*alpha_jt
            assert(2 * cnt > p_.alpha(jt) && cnt < 2 * p_.alpha(jt));
        }
        bers(jf, c, res);
        bins(jt, c, res);
        std::vector<CPair> pairs;
        pairs.reserve(cnt);
        for (auto it = bkt(jf).T.lower_bound({c, Edge{0, 0}});
             it != bkt(jf).T.end() && it->first == c; ++it)
            pairs.push_back(*it);
        for (const auto& p : pairs) ters(jf, p, res);
        for (const auto& p : pairs) tins(jt, p, res);
        if (jt == kBucketNegInf) bucket_of_.erase(c);
        else bucket_of_[c] = jt;
        res.units += 1;
    }

    FilterParams p_;
    std::vector<Bucket> buckets_;
    std::unordered_map<ClusterId, int> bucket_of_;
    std::unordered_map<ClusterId, std::uint64_t> cnt_;
    std::unordered_set<Edge> filtered_;
    std::unordered_set<ClusterId> inactive_;
    std::uint64_t ops_ = 0;
    std::uint64_t induced_ = 0;
};

// Full-scan checks of invariants (B1)-(B4) plus the derived conditions
// (F2)/(F3); used by tests and by the spanner validator.
struct FilterCheck {
    bool ok = true;
    std::string what;

    void fail(const std::string& s) {
        if (ok) what = s;
        ok = false;
    }
};

inline FilterCheck check_filter_invariants(const FilterState& fs) {
    FilterCheck r;
    const FilterParams& p = fs.params();
    // B4 under eviction: no tracked cluster has zero edges
    for (const auto& [c, cnt] : fs.counts())
        if (cnt == 0) r.fail("tracked cluster with zero edges");
    for (int j = 0; j <= fs.jmax(); ++j) {
        const auto& B = fs.bucket_clusters(j);
        const auto& T = fs.bucket_pairs(j);
        std::uint64_t a = p.alpha(j);
        std::uint64_t nedges = 0;
        for (auto it = B.begin(); it != B.end(); ++it) {
            std::uint64_t cnt = fs.cluster_count(*it);
            nedges += cnt;
            // B1: alpha_j/lambda <= cnt <= lambda*alpha_j
            if (cnt * p.lambda < a || cnt > p.lambda * a) r.fail("B1 violated");
        }
        if (nedges != T.size()) r.fail("bucket pair set out of sync");
        // B2: exactly the pairs beyond ell*lambda*alpha_j are filtered
        std::uint64_t pos = 0, th = p.edge_threshold(j);
        for (auto it = T.begin(); it != T.end(); ++it, ++pos) {
            bool should = pos >= th;
            if (fs.in_filtered(it->second) != should) r.fail("B2 violated");
            if (T.marked(*it) != should) r.fail("T boundary out of sync");
        }
        // B3: exactly the first 1 + lambda^2*ell clusters are inactive
        pos = 0;
        std::uint64_t cth = p.cluster_threshold();
        for (auto it = B.begin(); it != B.end(); ++it, ++pos) {
            bool should = pos < cth;
            if (fs.in_inactive(*it) != should) r.fail("B3 violated");
        }
        // F2: a filtered edge's bucket holds at least ell clusters
        if (th != UINT64_MAX && T.size() > th && B.size() < p.ell) r.fail("F2 violated");
    }
    // F3: every tracked non-filtered edge's cluster is inactive
    for (int j = 0; j <= fs.jmax(); ++j) {
        const auto& T = fs.bucket_pairs(j);
        for (auto it = T.begin(); it != T.end(); ++it)
            if (!fs.in_filtered(it->second) && !fs.in_inactive(it->first)) r.fail("F3 violated");
    }
    return r;
}

}  // namespace dynalgo
