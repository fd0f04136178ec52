#pragma once

#include <cstdint>
#include <vector>

#include "dynalgo/core.hpp"
#include "dynalgo/meter.hpp"

namespace dynalgo {

enum class RunStatus : std::uint8_t { Fixed, Broken };

// Resumable-update contract. Implementations are explicit work-queue state
// machines: pending updates are completed strictly in FIFO order and the
// machine may suspend between elementary structure operations, so run_steps
// can stop within an update and resume later with identical behavior.
class SteppableUpdater {
  public:
    virtual ~SteppableUpdater() = default;

    virtual void enqueue(const UpdateOp& op) = 0;

    // Works off pending updates, charging at most `budget` units to the meter
    // (may overshoot by at most one micro-step, bounded by max_step_units()).
    // Returns Fixed iff the pending queue is fully drained.
    virtual RunStatus run_steps(std::uint64_t budget) = 0;

    // Discards all state and pending work, then schedules a bulk load of the
    // given edge set; the load itself is performed by future run_steps calls.
    virtual void rebuild(const std::vector<Edge>& items) = 0;

    virtual std::uint64_t pending_len() const = 0;
    virtual bool fixed() const { return pending_len() == 0 && !mid_update(); }
    virtual bool mid_update() const = 0;

    // Canonical structural digest; equal digests mean equal future behavior.
    virtual std::uint64_t digest() const = 0;

    virtual std::uint64_t max_step_units() const = 0;

    WorkMeter& meter() { return meter_; }
    const WorkMeter& meter() const { return meter_; }

    RunStatus run_to_completion() {
        while (pending_len() > 0 || mid_update()) run_steps(UINT64_MAX / 4);
        return RunStatus::Fixed;
    }

  protected:
    WorkMeter meter_;
};

// Digest helper: order-sensitive 64-bit FNV-1a accumulation.
struct DigestAcc {
    std::uint64_t h = 0xcbf29ce484222325ull;
    void add(std::uint64_t x) {
        for (int i = 0; i < 8; ++i) {
            h ^= (x >> (8 * i)) & 0xff;
            h *= 0x100000001b3ull;
        }
    }
};

}  // namespace dynalgo
