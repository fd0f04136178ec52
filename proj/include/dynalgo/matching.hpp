#pragma once

#include <cassert>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "dynalgo/core.hpp"
#include "dynalgo/rng.hpp"
#include "dynalgo/updater.hpp"

namespace dynalgo {

// Fully dynamic maximal matching over a level hierarchy with randomized
// rises and matching resets. Update processing is an explicit frame stack,
// so it can suspend between elementary operations and resume later.
struct MatchingConfig {
    std::uint32_t n = 2;
    std::uint32_t rise_const = 4;  // C; "sufficiently large constant"
    // classic = the hard-threshold variant: no probabilistic rises, no
    // matching resets, settle threshold 4^i instead of 4^i/(32 C log n).
    bool classic = false;
};

class MaximalMatching final : public SteppableUpdater {
  public:
    using NbrSet = std::unordered_set<Vertex>;

    MaximalMatching(const MatchingConfig& cfg, std::uint64_t seed, const std::string& label)
        : cfg_(cfg), rng_(seed, label) {
        if (cfg.n < 2) throw std::invalid_argument("matching: n must be >= 2");
        top_ = static_cast<int>(floor_log4(cfg.n));
        clog_ = ceil_log2(cfg.n);
        pow4_.resize(top_ + 2, 1);
        for (int j = 1; j <= top_ + 1; ++j) pow4_[j] = pow4_[j - 1] * 4;
        reset_structures();
    }

    // --- SteppableUpdater ---

    void enqueue(const UpdateOp& op) override { pending_.push_back(op); }

    RunStatus run_steps(std::uint64_t budget) override {
        if (budget < 1) throw std::invalid_argument("run_steps: budget must be >= 1");
        std::uint64_t spent = 0;
        while (spent < budget) {
            if (frames_.empty() && pending_.empty()) break;
            spent += step();
        }
        return (frames_.empty() && pending_.empty()) ? RunStatus::Fixed : RunStatus::Broken;
    }

    void rebuild(const std::vector<Edge>& items) override {
        pending_.clear();
        frames_.clear();
        Frame f;
        f.kind = FrameKind::Rebuild;
        f.items = items;
        f.idx = 0;
        frames_.push_back(std::move(f));
    }

    std::uint64_t pending_len() const override { return pending_.size(); }
    bool mid_update() const override { return !frames_.empty(); }

    std::uint64_t digest() const override {
        if (mid_update()) throw std::logic_error("digest on a suspended instance");
        DigestAcc acc;
        acc.add(cfg_.n);
        for (Vertex v = 0; v < cfg_.n; ++v) {
            acc.add(static_cast<std::uint64_t>(static_cast<std::int64_t>(level_[v])));
            acc.add(mate_[v]);
            for (int j = 0; j <= top_; ++j) acc.add(static_cast<std::uint64_t>(phi_[v][j]));
            acc.add(sorted_hash(own_[v]));
            for (int l = -1; l <= top_; ++l) acc.add(sorted_hash(nbr(v, l)));
        }
        for (const auto& op : pending_) {
            acc.add(static_cast<std::uint64_t>(op.kind));
            acc.add(op.edge.key());
        }
        acc.add(rng_.draws());
        return acc.h;
    }

    std::uint64_t max_step_units() const override { return static_cast<std::uint64_t>(top_) + 6; }

    // --- convenience (unwrapped use) ---

    void insert_edge(Vertex u, Vertex v) {
        Edge e = canonical(u, v);
        if (edges_.count(e)) throw std::invalid_argument("insert of present edge");
        enqueue({OpKind::Insert, e});
        run_to_completion();
    }

    void delete_edge(Vertex u, Vertex v) {
        Edge e = canonical(u, v);
        if (!edges_.count(e)) throw std::invalid_argument("delete of absent edge");
        enqueue({OpKind::Delete, e});
        run_to_completion();
    }

    // --- query surface (read-only) ---

    bool is_matched(Vertex v) const { return mate_[v] != kNoVertex; }
    Vertex mate(Vertex v) const { return mate_[v]; }
    std::size_t matching_size() const { return matched_.size(); }
    std::vector<Edge> iterate_matching() const { return {matched_.begin(), matched_.end()}; }
    int level(Vertex v) const { return level_[v]; }

    double p_rise(int j) const {
        if (cfg_.classic) return 0.0;
        double p = double(cfg_.rise_const) * double(clog_) / double(pow4_[j]);
        return p > 1.0 ? 1.0 : p;
    }
    double p_reset(int i) const {
        if (cfg_.classic) return 0.0;
        return 1.0 / double(pow4_[i >= 0 ? i : 0] * 64.0);  // 4^-(i+3)
    }
    bool settle_ok(int i, std::uint64_t below_count) const {
        if (cfg_.classic) return below_count >= std::uint64_t(pow4_[i]);
        return below_count * 32 * cfg_.rise_const * clog_ >= std::uint64_t(pow4_[i]);
    }

    int top_level() const { return top_; }
    std::uint32_t log2n() const { return clog_; }

    // state, public for oracles and tests
    MatchingConfig cfg_;
    std::unordered_set<Edge> edges_;
    std::vector<int> level_;
    std::vector<Vertex> mate_;
    std::vector<NbrSet> own_;                 // O_v: endpoints of edges owned by v
    std::vector<std::vector<NbrSet>> nbr_;    // E_v^i: per level i+1 offset
    std::vector<std::vector<std::int64_t>> phi_;
    std::unordered_set<Edge> matched_;
    std::deque<Vertex> queue_;
    std::vector<std::uint8_t> in_queue_;

    NbrSet& nbr(Vertex v, int lvl) { return nbr_[v][lvl + 1]; }
    const NbrSet& nbr(Vertex v, int lvl) const { return nbr_[v][lvl + 1]; }

  private:
    enum class FrameKind : std::uint8_t {
        InsBookkeep,
        CoinPass,
        ResetCoinIns,
        DelBookkeep,
        ProcessQueue,
        FixFree,
        Settle,
        Fall,
        IncLoop,
        ResetLoop,
        Reset,
        MoveUp,
        MoveDown,
        RisePost,
        Rebuild,
    };

    struct Frame {
        FrameKind kind;
        int stage = 0;
        Vertex a = kNoVertex, b = kNoVertex;
        int i = 0, j = 0, from = 0, to = 0;
        std::size_t idx = 0;
        std::vector<Vertex> below, equal_own, equal_un;
        std::vector<Edge> items;
        NbrSet::const_iterator it;
    };

    void reset_structures() {
        edges_.clear();
        matched_.clear();
        queue_.clear();
        level_.assign(cfg_.n, -1);
        mate_.assign(cfg_.n, kNoVertex);
        in_queue_.assign(cfg_.n, 0);
        own_.assign(cfg_.n, {});
        nbr_.assign(cfg_.n, std::vector<NbrSet>(top_ + 2));
        phi_.assign(cfg_.n, std::vector<std::int64_t>(top_ + 1, 0));
    }

    static std::uint64_t sorted_hash(const NbrSet& s) {
        std::uint64_t sum = 0, xr = 0;
        for (Vertex w : s) {
            std::uint64_t h = (std::uint64_t(w) + 0x9e3779b97f4a7c15ull) * 0xbf58476d1ce4e5b9ull;
            sum += h;
            xr ^= h;
        }
        return sum ^ (xr * 0x94d049bb133111ebull) ^ (std::uint64_t(s.size()) << 48);
    }

    void push_queue(Vertex v) {
        if (!in_queue_[v]) {
            in_queue_[v] = 1;
            queue_.push_back(v);
        }
    }

    bool coin(double p) { return rng_.bernoulli(p); }

    // One micro-step; returns units charged.
    std::uint64_t step() {
        if (frames_.empty()) {
            UpdateOp op = pending_.front();
            pending_.pop_front();
            start_op(op);
            meter_.charge(1);
            return 1;
        }
        std::uint64_t u = exec_top();
        meter_.charge(u);
        return u;
    }

    void start_op(const UpdateOp& op) {
        Frame f;
        f.a = op.edge.lo;
        f.b = op.edge.hi;
        if (op.kind == OpKind::Insert) {
            if (edges_.count(op.edge)) throw std::logic_error("matching: insert of present edge");
            // execution order: bookkeeping, coin pass lo, coin pass hi,
            // insert-time reset coin, process queue  (stack is LIFO)
            Frame pq;
            pq.kind = FrameKind::ProcessQueue;
            frames_.push_back(pq);
            Frame rc;
            rc.kind = FrameKind::ResetCoinIns;
            rc.a = f.a;
            rc.b = f.b;
            frames_.push_back(rc);
            f.kind = FrameKind::InsBookkeep;
            frames_.push_back(std::move(f));
        } else {
            if (!edges_.count(op.edge)) throw std::logic_error("matching: delete of absent edge");
            f.kind = FrameKind::DelBookkeep;
            frames_.push_back(std::move(f));
        }
    }

    std::uint64_t exec_top() {
        Frame& f = frames_.back();
        switch (f.kind) {
            case FrameKind::InsBookkeep: return ins_bookkeep(f);
            case FrameKind::CoinPass: return coin_pass(f);
            case FrameKind::ResetCoinIns: return reset_coin_ins(f);
            case FrameKind::DelBookkeep: return del_bookkeep(f);
            case FrameKind::ProcessQueue: return process_queue(f);
            case FrameKind::FixFree: return fix_free(f);
            case FrameKind::Settle: return settle(f);
            case FrameKind::Fall: return fall(f);
            case FrameKind::IncLoop: return inc_loop(f);
            case FrameKind::ResetLoop: return reset_loop(f);
            case FrameKind::Reset: return reset_matching(f);
            case FrameKind::MoveUp: return move_up(f);
            case FrameKind::MoveDown: return move_down(f);
            case FrameKind::RisePost: return rise_post(f);
            case FrameKind::Rebuild: return rebuild_step(f);
        }
        return 1;
    }

    // Insert bookkeeping: ownership to the higher endpoint (tie: larger id),
    // raw phi bumps for both endpoints, then the per-level coin passes.
    std::uint64_t ins_bookkeep(Frame& f) {
        Vertex u = f.a, v = f.b;
        switch (f.stage) {
            case 0: {
                edges_.insert(canonical(u, v));
                int lu = level_[u], lv = level_[v];
                Vertex owner = (lu != lv) ? (lu > lv ? u : v) : (u > v ? u : v);
                Vertex other = (owner == u) ? v : u;
                own_[owner].insert(other);
                nbr(other, level_[owner]).insert(owner);
                f.i = std::max(lu, lv);  // Lmax at insert time
                f.stage = 1;
                return 3;
            }
            case 1: {  // raw phi bumps, endpoint lo
                std::uint64_t c = 1;
                for (int j = f.i + 1; j <= top_; ++j, ++c) ++phi_[u][j];
                f.stage = 2;
                return c;
            }
            default: {  // raw phi bumps, endpoint hi; then coin passes
                std::uint64_t c = 1;
                for (int j = f.i + 1; j <= top_; ++j, ++c) ++phi_[v][j];
                int lmax = f.i;
                frames_.pop_back();  // f dangling from here
                Frame chi;
                chi.kind = FrameKind::CoinPass;
                chi.a = v;
                chi.j = lmax + 1;
                frames_.push_back(chi);
                Frame clo;
                clo.kind = FrameKind::CoinPass;
                clo.a = u;
                clo.j = lmax + 1;
                frames_.push_back(clo);
                return c;
            }
        }
    }

    // Per-level rise checks for one endpoint: probabilistic rise with
    // p_rise(j), unconditional threshold rise when phi reaches 4^j.
    std::uint64_t coin_pass(Frame& f) {
        if (f.j > top_) {
            frames_.pop_back();
            return 1;
        }
        Vertex x = f.a;
        int j = f.j++;
        std::uint64_t c = 1;
        if (level_[x] < j) {
            bool rise_now = false;
            if (!cfg_.classic) {
                rise_now = coin(p_rise(j));
                ++c;
            }
            if (!rise_now && phi_[x][j] >= pow4_[j]) rise_now = true;
            if (rise_now) push_rise(x, level_[x], j);
        }
        return c;
    }

    void push_rise(Vertex x, int from, int to) {
        Frame post;
        post.kind = FrameKind::RisePost;
        post.a = x;
        frames_.push_back(post);
        push_move_up(x, from, to);
    }

    void push_move_up(Vertex x, int from, int to) {
        assert(from < to);
        Frame m;
        m.kind = FrameKind::MoveUp;
        m.a = x;
        m.from = from;
        m.to = to;
        m.j = from + 1;  // zero-phi cursor
        frames_.push_back(std::move(m));
    }

    std::uint64_t rise_post(Frame& f) {
        Vertex x = f.a;
        frames_.pop_back();
        std::uint64_t c = 1;
        if (mate_[x] != kNoVertex) {
            Vertex w = mate_[x];
            unmatch(x, w);
            push_queue(w);
            c += 3;
        }
        push_queue(x);
        return c + 1;
    }

    std::uint64_t reset_coin_ins(Frame& f) {
        Vertex u = f.a, v = f.b;
        frames_.pop_back();
        if (cfg_.classic) return 1;
        int lu = level_[u], lv = level_[v];
        if (lu == lv) return 1;
        Vertex hi = lu < lv ? v : u;
        bool heads = coin(p_reset(level_[hi]));
        if (heads) {
            Frame r;
            r.kind = FrameKind::Reset;
            r.a = hi;
            frames_.push_back(r);
        }
        return 2;
    }

    std::uint64_t del_bookkeep(Frame& f) {
        Vertex u = f.a, v = f.b;
        switch (f.stage) {
            case 0: {
                edges_.erase(canonical(u, v));
                Vertex owner = own_[u].count(v) ? u : v;
                Vertex other = (owner == u) ? v : u;
                own_[owner].erase(other);
                nbr(other, level_[owner]).erase(owner);
                f.i = std::max(level_[u], level_[v]);
                f.stage = 1;
                return 4;
            }
            case 1: {
                std::uint64_t c = 1;
                for (int j = f.i + 1; j <= top_; ++j) { --phi_[u][j]; --phi_[v][j]; c += 2; }
                f.stage = 2;
                return c;
            }
            default: {
                bool was_matched = (mate_[u] == v);
                frames_.pop_back();
                if (was_matched) {
                    unmatch(u, v);
                    push_queue(u);
                    push_queue(v);
                    Frame pq;
                    pq.kind = FrameKind::ProcessQueue;
                    frames_.push_back(pq);
                    return 5;
                }
                return 1;
            }
        }
    }

    std::uint64_t process_queue(Frame&) {
        if (queue_.empty()) {
            frames_.pop_back();
            return 1;
        }
        Vertex v = queue_.front();
        queue_.pop_front();
        in_queue_[v] = 0;
        Frame ff;
        ff.kind = FrameKind::FixFree;
        ff.a = v;
        frames_.push_back(std::move(ff));
        return 1;
    }

    // FixFreeVertex: no-op unless v is free at level > -1; otherwise settle
    // from below_i(v) when it is large enough, else fall one level.
    std::uint64_t fix_free(Frame& f) {
        Vertex v = f.a;
        switch (f.stage) {
            case 0: {
                if (level_[v] == -1 || mate_[v] != kNoVertex) {
                    frames_.pop_back();
                    return 1;
                }
                f.i = level_[v];
                f.it = own_[v].cbegin();
                f.stage = 1;
                return 1;
            }
            case 1: {  // scan O_v, one entry per step
                if (f.it != own_[v].cend()) {
                    Vertex w = *f.it;
                    ++f.it;
                    assert(level_[w] <= f.i);  // owned edges never lead upward
                    if (level_[w] < f.i) f.below.push_back(w);
                    else f.equal_own.push_back(w);
                    return 1;
                }
                f.stage = 2;
                return 1;
            }
            case 2: {
                if (settle_ok(f.i, f.below.size())) {
                    Frame s;
                    s.kind = FrameKind::Settle;
                    s.a = v;
                    s.i = f.i;
                    s.below = std::move(f.below);
                    frames_.pop_back();
                    frames_.push_back(std::move(s));
                    return 1;
                }
                f.it = nbr(v, f.i).cbegin();
                f.stage = 3;
                return 1;
            }
            default: {  // gather equal-level non-owned neighbors, then fall
                if (f.it != nbr(v, f.i).cend()) {
                    f.equal_un.push_back(*f.it);
                    ++f.it;
                    return 1;
                }
                Frame fa;
                fa.kind = FrameKind::Fall;
                fa.a = v;
                fa.i = f.i;
                fa.below = std::move(f.below);
                fa.equal_own = std::move(f.equal_own);
                fa.equal_un = std::move(f.equal_un);
                frames_.pop_back();
                frames_.push_back(std::move(fa));
                return 1;
            }
        }
    }

    // GenericRandomSettle: uniform mate from below_i(v), pulled up to level i.
    std::uint64_t settle(Frame& f) {
        Vertex v = f.a;
        switch (f.stage) {
            case 0: {
                assert(settle_ok(f.i, f.below.size()) && !f.below.empty());
                f.b = f.below[rng_.uniform_index(f.below.size())];
                f.stage = 1;
                push_move_up(f.b, level_[f.b], f.i);
                return 2;
            }
            default: {
                Vertex w = f.b;
                frames_.pop_back();
                std::uint64_t c = 1;
                if (mate_[w] != kNoVertex) {
                    Vertex x = mate_[w];
                    unmatch(w, x);
                    push_queue(x);
                    c += 3;
                }
                match(v, w);
                return c + 2;
            }
        }
    }

    // Fall: move v one level down, credit phi to the vertices that gained it
    // below them, and give equal-level neighbors their reset coins.
    std::uint64_t fall(Frame& f) {
        Vertex v = f.a;
        int i = f.i;
        Frame rl;
        rl.kind = FrameKind::ResetLoop;
        rl.i = i;
        rl.below = std::move(f.equal_own);
        rl.equal_un = std::move(f.equal_un);
        rl.a = v;
        Frame il;
        il.kind = FrameKind::IncLoop;
        il.i = i;
        il.below = f.below;  // copy: MoveDown needs it too
        Frame md;
        md.kind = FrameKind::MoveDown;
        md.a = v;
        md.i = i;
        md.below = std::move(f.below);
        md.equal_own = rl.below;  // owned equal-level neighbors
        frames_.pop_back();
        frames_.push_back(std::move(rl));
        frames_.push_back(std::move(il));
        frames_.push_back(std::move(md));
        return 1;
    }

    // Fall bookkeeping. Neighbors below move their view of v one table down;
    // owned equal-level edges flip owner (the neighbor is strictly higher
    // after the fall). Then v's level drops and phi_v(i) becomes live.
    std::uint64_t move_down(Frame& f) {
        Vertex v = f.a;
        int i = f.i;
        if (f.stage == 0) {
            if (f.idx < f.below.size()) {
                Vertex w = f.below[f.idx++];
                nbr(w, i).erase(v);
                nbr(w, i - 1).insert(v);
                return 2;
            }
            f.stage = 1;
            f.idx = 0;
            return 1;
        }
        if (f.stage == 1) {
            if (f.idx < f.equal_own.size()) {
                Vertex w = f.equal_own[f.idx++];
                own_[v].erase(w);
                own_[w].insert(v);
                nbr(w, i).erase(v);
                nbr(v, i).insert(w);
                return 4;
            }
            f.stage = 2;
            return 1;
        }
        level_[v] = i - 1;
        phi_[v][i] = static_cast<std::int64_t>(f.below.size());
        frames_.pop_back();
        return 2;
    }

    std::uint64_t inc_loop(Frame& f) {
        int i = f.i;
        if (f.idx >= f.below.size()) {
            frames_.pop_back();
            return 1;
        }
        Vertex w = f.below[f.idx++];
        if (level_[w] >= i) return 1;  // rose meanwhile; phi_w(i) no longer live
        ++phi_[w][i];
        std::uint64_t c = 2;
        bool rise_now = false;
        if (!cfg_.classic) {
            rise_now = coin(p_rise(i));
            ++c;
        }
        if (!rise_now && phi_[w][i] >= pow4_[i]) rise_now = true;
        if (rise_now) push_rise(w, level_[w], i);
        return c;
    }

    std::uint64_t reset_loop(Frame& f) {
        // below holds equal_own, equal_un the rest; single pass over both
        std::size_t total = f.below.size() + f.equal_un.size();
        if (f.idx >= total) {
            push_queue(f.a);  // v itself queues after its fall
            frames_.pop_back();
            return 2;
        }
        if (cfg_.classic) {
            f.idx = total;
            push_queue(f.a);
            frames_.pop_back();
            return 2;
        }
        Vertex w = f.idx < f.below.size() ? f.below[f.idx] : f.equal_un[f.idx - f.below.size()];
        ++f.idx;
        if (coin(p_reset(f.i))) {
            Frame r;
            r.kind = FrameKind::Reset;
            r.a = w;
            frames_.push_back(r);
        }
        return 1;
    }

    std::uint64_t reset_matching(Frame& f) {
        Vertex v = f.a;
        frames_.pop_back();
        if (mate_[v] == kNoVertex) return 1;  // raced through the queue
        Vertex w = mate_[v];
        unmatch(v, w);
        push_queue(v);
        push_queue(w);
        return 5;
    }

    // Rise/settle bookkeeping: v takes ownership of every edge to a strictly
    // lower vertex, neighbor tables and phi counters follow.
    std::uint64_t move_up(Frame& f) {
        Vertex x = f.a;
        int from = f.from, to = f.to;
        switch (f.stage) {
            case 0: {  // zero phi over (from, to]
                if (f.j <= to && f.j <= top_) {
                    if (f.j >= 0) phi_[x][f.j] = 0;
                    ++f.j;
                    return 1;
                }
                f.stage = 1;
                f.it = own_[x].cbegin();
                return 1;
            }
            case 1: {  // edges already owned: retag neighbor tables, drop phi
                if (f.it != own_[x].cend()) {
                    Vertex w = *f.it;
                    ++f.it;
                    nbr(w, from).erase(x);
                    nbr(w, to).insert(x);
                    std::uint64_t c = 2;
                    for (int k = std::max(from, level_[w]) + 1; k <= to; ++k) {
                        --phi_[w][k];
                        ++c;
                    }
                    return c;
                }
                f.stage = 2;
                f.j = from;  // level cursor over [from, to)
                return 1;
            }
            case 2: {  // take ownership from formerly-higher-or-equal neighbors
                if (f.j >= to) {
                    f.stage = 3;
                    return 1;
                }
                int m = f.j;
                NbrSet& tbl = nbr(x, m);
                if (tbl.empty()) {
                    ++f.j;
                    return 1;
                }
                Vertex w = *tbl.begin();
                tbl.erase(tbl.begin());
                own_[w].erase(x);
                own_[x].insert(w);
                nbr(w, to).insert(x);
                std::uint64_t c = 4;
                for (int k = m + 1; k <= to; ++k) {
                    --phi_[w][k];
                    ++c;
                }
                return c;
            }
            default: {
                level_[x] = to;
                frames_.pop_back();
                return 1;
            }
        }
    }

    std::uint64_t rebuild_step(Frame& f) {
        if (f.stage == 0) {
            reset_structures();  // rng stream continues where it was
            f.stage = 1;
            return std::max<std::uint64_t>(1, cfg_.n / 8);
        }
        if (f.idx < f.items.size()) {
            pending_.push_back({OpKind::Insert, f.items[f.idx++]});
            return 1;
        }
        frames_.pop_back();
        return 1;
    }

    void match(Vertex a, Vertex b) {
        mate_[a] = b;
        mate_[b] = a;
        matched_.insert(canonical(a, b));
    }
    void unmatch(Vertex a, Vertex b) {
        mate_[a] = kNoVertex;
        mate_[b] = kNoVertex;
        matched_.erase(canonical(a, b));
    }

    int top_;
    std::uint32_t clog_;
    std::vector<std::int64_t> pow4_;
    std::deque<UpdateOp> pending_;
    std::vector<Frame> frames_;
    RandomSource rng_;

  public:
    const RandomSource& rng() const { return rng_; }
};

}  // namespace dynalgo
