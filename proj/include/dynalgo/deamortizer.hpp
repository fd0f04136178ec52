#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <set>
#include <stdexcept>
#include <vector>

#include "dynalgo/core.hpp"
#include "dynalgo/updater.hpp"

namespace dynalgo {

using UpdaterFactory = std::function<std::unique_ptr<SteppableUpdater>(std::size_t copy_index)>;

struct UpdateReport {
    std::uint64_t units_charged = 0;
    std::uint64_t flush_units = 0;  // portion of units_charged spent inside a flush
    bool flushed = false;
};

// Black-box reduction: q = c*ceil(log2 n) copies, each given r = 4*alpha*
// ceil(log2 ell) units per update; a copy is fixed when its buffer is empty.
// Queries go to the smallest-index fixed copy; when all copies are broken,
// everything is drained at once (flush).
class Reduction {
  public:
    Reduction(const UpdaterFactory& factory, std::uint64_t n, std::uint64_t alpha,
              std::uint64_t ell, std::uint64_t copies_c)
        : n_(n), alpha_(alpha), ell_(ell) {
        if (n < 2 || alpha < 1 || ell < 2 || copies_c < 1)
            throw std::invalid_argument("reduction: need n>=2, alpha>=1, ell>=2, c>=1");
        q_ = copies_c * ceil_log2(n);
        if (q_ < 1) q_ = 1;
        r_ = 4 * alpha * ceil_log2(ell);
        for (std::size_t i = 0; i < q_; ++i) copies_.push_back(factory(i));
    }

    UpdateReport apply_update(const UpdateOp& op) {
        UpdateReport rep;
        for (auto& c : copies_) {
            c->enqueue(op);
            std::uint64_t before = c->meter().units;
            c->run_steps(r_);
            rep.units_charged += c->meter().units - before;
        }
        if (!any_fixed()) {
            std::uint64_t before = total_units();
            flush();
            rep.flush_units = total_units() - before;
            rep.units_charged += rep.flush_units;
            rep.flushed = true;
        }
        return rep;
    }

    void flush() {
        for (auto& c : copies_) c->run_to_completion();
        ++flush_count_;
    }

    // Smallest-index fixed copy; valid between updates.
    std::size_t pointer() const {
        for (std::size_t i = 0; i < q_; ++i)
            if (copies_[i]->fixed()) return i;
        throw std::logic_error("reduction: no fixed copy (pointer queried mid-update?)");
    }

    SteppableUpdater& pointed() { return *copies_[pointer()]; }
    const SteppableUpdater& pointed() const { return *copies_[pointer()]; }

    bool any_fixed() const {
        for (auto& c : copies_)
            if (c->fixed()) return true;
        return false;
    }

    std::uint64_t total_units() const {
        std::uint64_t s = 0;
        for (auto& c : copies_) s += c->meter().units;
        return s;
    }

    std::size_t q() const { return q_; }
    std::uint64_t r() const { return r_; }
    std::uint64_t flush_count() const { return flush_count_; }
    std::size_t size() const { return copies_.size(); }
    SteppableUpdater& copy(std::size_t i) { return *copies_[i]; }
    const SteppableUpdater& copy(std::size_t i) const { return *copies_[i]; }

    std::uint64_t max_step_slack() const {
        std::uint64_t m = 0;
        for (auto& c : copies_) m += c->max_step_units();
        return m;  // each copy may overshoot its slice by < one micro-step
    }

    // internals used by the phase wrapper
    void enqueue_all(const UpdateOp& op) {
        for (auto& c : copies_) c->enqueue(op);
    }
    std::uint64_t step_all(std::uint64_t budget_per_copy) {
        std::uint64_t spent = 0;
        for (auto& c : copies_) {
            std::uint64_t before = c->meter().units;
            c->run_steps(budget_per_copy);
            spent += c->meter().units - before;
        }
        return spent;
    }
    void rebuild_all(const std::vector<Edge>& items) {
        for (auto& c : copies_) c->rebuild(items);
    }
    bool all_fixed() const {
        for (auto& c : copies_)
            if (!c->fixed()) return false;
        return true;
    }

  private:
    std::uint64_t n_, alpha_, ell_;
    std::size_t q_ = 1;
    std::uint64_t r_ = 1;
    std::uint64_t flush_count_ = 0;
    std::vector<std::unique_ptr<SteppableUpdater>> copies_;
};

// Phase rotation for unbounded update sequences: two Reduction instances per
// phase; the active one takes every update, the inactive one is rebuilt from
// a snapshot of the item list L and then replays the recorded phase updates
// at two per incoming update. Roles swap at phase boundaries.
class PhasedReduction {
  public:
    PhasedReduction(const UpdaterFactory& factory, std::uint64_t n, std::uint64_t alpha,
                    std::uint64_t phase_len, std::uint64_t copies_c)
        : phase_len_(phase_len ? phase_len : default_phase_len(n)) {
        if (phase_len_ % 4 != 0) throw std::invalid_argument("phase length must be divisible by 4");
        std::uint64_t ell = 2 * phase_len_;
        auto wrap = [&factory](const char* tag) {
            return [&factory, tag](std::size_t i) { return factory(i + (tag[0] == 'b' ? 1000 : 0)); };
        };
        inst_[0] = std::make_unique<Reduction>(wrap("a"), n, alpha, ell, copies_c);
        inst_[1] = std::make_unique<Reduction>(wrap("b"), n, alpha, ell, copies_c);
    }

    static std::uint64_t default_phase_len(std::uint64_t n) {
        std::uint64_t p = n * n;
        return p < 4096 ? 4096 : p;
    }

    struct PhaseReport {
        std::uint64_t units = 0;
        std::uint64_t active_applies = 0;
        std::uint64_t inactive_applies = 0;
        std::uint64_t list_ops = 0;
        bool swapped = false;
        bool flushed = false;
    };

    PhaseReport apply(const UpdateOp& op) {
        PhaseReport rep;
        Reduction& act = *inst_[active_];
        Reduction& ina = *inst_[1 - active_];

        UpdateReport ur = act.apply_update(op);
        rep.units += ur.units_charged;
        rep.flushed = ur.flushed;
        rep.active_applies = 1;

        recorded_.push_back(op);

        const std::uint64_t quarter = phase_len_ / 4;
        std::uint64_t t = pos_;  // position of this update within the phase
        if (t < quarter) {
            // enumerate L into the snapshot, a few items per update
            std::uint64_t per = (items_.size() + quarter - 1) / quarter + 1;
            while (per-- && snap_it_ != items_.end()) {
                snapshot_.push_back(*snap_it_);
                ++snap_it_;
                ++rep.list_ops;
            }
        } else if (t < 2 * quarter) {
            if (t == quarter) {  // snapshot complete; start the rebuild
                while (snap_it_ != items_.end()) {
                    snapshot_.push_back(*snap_it_);
                    ++snap_it_;
                    ++rep.list_ops;
                }
                ina.rebuild_all(snapshot_);
            }
            rep.units += ina.step_all(ina.r());
            if (t == 2 * quarter - 1 && !ina.all_fixed()) {
                // rebuild did not fit the budget; finish it now (flush-like)
                ina.flush();
                rep.flushed = true;
            }
        } else {
            // forward two recorded updates per incoming update to L and to
            // the inactive instance
            for (int fwd = 0; fwd < 2 && replay_pos_ < recorded_.size(); ++fwd) {
                const UpdateOp& r = recorded_[replay_pos_++];
                if (r.kind == OpKind::Insert) items_.insert(r.edge);
                else items_.erase(r.edge);
                ++rep.list_ops;
                UpdateReport ur2 = ina.apply_update(r);
                rep.units += ur2.units_charged;
                rep.flushed = rep.flushed || ur2.flushed;
                ++rep.inactive_applies;
            }
        }

        ++pos_;
        if (pos_ == phase_len_) {
            if (replay_pos_ != recorded_.size())
                throw std::logic_error("phase replay fell behind schedule");
            active_ = 1 - active_;
            pos_ = 0;
            recorded_.clear();
            replay_pos_ = 0;
            snapshot_.clear();
            snap_it_ = items_.begin();
            rep.swapped = true;
        }
        return rep;
    }

    Reduction& active() { return *inst_[active_]; }
    Reduction& inactive() { return *inst_[1 - active_]; }
    const std::set<Edge>& items() const { return items_; }
    std::uint64_t phase_len() const { return phase_len_; }
    std::uint64_t position() const { return pos_; }

  private:
    std::uint64_t phase_len_;
    std::unique_ptr<Reduction> inst_[2];
    int active_ = 0;
    std::uint64_t pos_ = 0;
    std::vector<UpdateOp> recorded_;
    std::size_t replay_pos_ = 0;
    std::set<Edge> items_;
    std::vector<Edge> snapshot_;
    std::set<Edge>::const_iterator snap_it_ = items_.begin();
};

}  // namespace dynalgo
