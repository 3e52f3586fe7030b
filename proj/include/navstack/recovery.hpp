#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "navstack/clock.hpp"
#include "navstack/geometry.hpp"
#include "navstack/lifecycle.hpp"
#include "navstack/planning.hpp"

namespace navstack {

enum class ClearScope { Global, Local, Both };
enum class RecoveryKind { ClearCostmap, Spin, Wait };
enum class RecoveryOutcome { Success, Failure, Cancelled };

const char* to_string(ClearScope s);
const char* to_string(RecoveryKind k);

struct RecoveryRecord {
  RecoveryKind kind;
  ClearScope scope = ClearScope::Both;  // meaningful for ClearCostmap only
  SimTime start = 0;
  SimTime end = 0;
  RecoveryOutcome outcome = RecoveryOutcome::Success;
};

/// Recovery server: clear-costmap, spin-in-place, and wait behaviors.
/// One recovery at a time; overlapping requests are rejected.
///
/// Repeated clears are throttled: a clear arriving within
/// clear_throttle_sec of the last accepted clear of a covering scope is
/// rejected (Throttled). A clear that just ran and did not resolve the
/// failure is not a fix the second time, so the original failure propagates
/// to the tree's recovery ladder instead of being masked forever.
class RecoveryServer : public ManagedServer {
 public:
  struct Hooks {
    std::function<void(ClearScope)> clear_costmaps;
    std::function<void(const Twist&)> command;
    std::function<double()> accumulated_yaw;  // monotone |dyaw| integral
  };

  struct Params {
    double spin_wz = 0.5;            // rad/s commanded during Spin
    double clear_throttle_sec = 0.0; // 0 disables throttling
  };

  RecoveryServer(std::string name, Hooks hooks, Params params);

  /// Immediate behavior: clears the requested costmap scope(s).
  /// Returns Succeeded, or Failed with Throttled/ServerUnavailable.
  TaskStatus execute_clear(ClearScope scope, SimTime now);

  /// Long-running behaviors driven by poll().
  std::uint64_t submit_spin(double target_yaw, SimTime now);
  std::uint64_t submit_wait(double duration_sec, SimTime now);
  TaskStatus poll(std::uint64_t handle, SimTime now);
  void cancel(std::uint64_t handle, SimTime now);

  TaskFailure last_failure() const { return last_failure_; }
  const std::vector<RecoveryRecord>& records() const { return records_; }

  /// Records completed since the given index; used by the 1 Hz logger.
  std::vector<RecoveryRecord> records_since(std::size_t index) const;

 protected:
  bool on_deactivate() override;

 private:
  enum class ActiveKind { None, Spin, Wait };

  void finish(RecoveryOutcome outcome, SimTime now);

  Hooks hooks_;
  Params params_;
  std::vector<RecoveryRecord> records_;
  TaskFailure last_failure_ = TaskFailure::None;

  std::uint64_t next_handle_ = 1;
  std::uint64_t active_handle_ = 0;
  ActiveKind active_ = ActiveKind::None;
  SimTime active_start_ = 0;
  double spin_target_ = 0.0;
  double spin_start_yaw_accum_ = 0.0;
  double spin_direction_ = 1.0;
  SimTime wait_until_ = 0;
  SimTime last_clear_[3] = {-1, -1, -1};  // per ClearScope, -1 = never
};

}  // namespace navstack
