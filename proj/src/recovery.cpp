#include "navstack/recovery.hpp"

#include <cmath>

namespace navstack {

const char* to_string(ClearScope s) {
  switch (s) {
    case ClearScope::Global: return "global";
    case ClearScope::Local: return "local";
    case ClearScope::Both: return "both";
  }
  return "?";
}

const char* to_string(RecoveryKind k) {
  switch (k) {
    case RecoveryKind::ClearCostmap: return "clear";
    case RecoveryKind::Spin: return "spin";
    case RecoveryKind::Wait: return "wait";
  }
  return "?";
}

RecoveryServer::RecoveryServer(std::string name, Hooks hooks, Params params)
    : ManagedServer(std::move(name)), hooks_(std::move(hooks)), params_(params) {}

TaskStatus RecoveryServer::execute_clear(ClearScope scope, SimTime now) {
  if (!is_active()) {
    last_failure_ = TaskFailure::ServerUnavailable;
    return TaskStatus::Failed;
  }
  if (params_.clear_throttle_sec > 0.0) {
    const SimTime window = from_seconds(params_.clear_throttle_sec);
    const bool global_recent =
        last_clear_[0] >= 0 && now - last_clear_[0] < window;
    const bool local_recent =
        last_clear_[1] >= 0 && now - last_clear_[1] < window;
    bool throttled = false;
    switch (scope) {
      case ClearScope::Global: throttled = global_recent; break;
      case ClearScope::Local: throttled = local_recent; break;
      case ClearScope::Both: throttled = global_recent && local_recent; break;
    }
    if (throttled) {
      last_failure_ = TaskFailure::Throttled;
      return TaskStatus::Failed;
    }
  }
  if (hooks_.clear_costmaps) {
    hooks_.clear_costmaps(scope);
  }
  if (scope == ClearScope::Global || scope == ClearScope::Both) last_clear_[0] = now;
  if (scope == ClearScope::Local || scope == ClearScope::Both) last_clear_[1] = now;
  records_.push_back(RecoveryRecord{RecoveryKind::ClearCostmap, scope, now, now,
                                    RecoveryOutcome::Success});
  last_failure_ = TaskFailure::None;
  return TaskStatus::Succeeded;
}

std::uint64_t RecoveryServer::submit_spin(double target_yaw, SimTime now) {
  if (!is_active()) {
    last_failure_ = TaskFailure::ServerUnavailable;
    return 0;
  }
  if (active_ != ActiveKind::None) {
    last_failure_ = TaskFailure::BusyRejected;
    return 0;
  }
  if (!(target_yaw > 0.0) || !std::isfinite(target_yaw)) {
    throw NavError(ErrorCode::InvalidInput, "spin target must be positive");
  }
  active_ = ActiveKind::Spin;
  active_handle_ = next_handle_++;
  active_start_ = now;
  spin_target_ = target_yaw;
  spin_start_yaw_accum_ = hooks_.accumulated_yaw ? hooks_.accumulated_yaw() : 0.0;
  spin_direction_ = 1.0;
  return active_handle_;
}

std::uint64_t RecoveryServer::submit_wait(double duration_sec, SimTime now) {
  if (!is_active()) {
    last_failure_ = TaskFailure::ServerUnavailable;
    return 0;
  }
  if (active_ != ActiveKind::None) {
    last_failure_ = TaskFailure::BusyRejected;
    return 0;
  }
  if (!(duration_sec > 0.0) || !std::isfinite(duration_sec)) {
    throw NavError(ErrorCode::InvalidInput, "wait duration must be positive");
  }
  active_ = ActiveKind::Wait;
  active_handle_ = next_handle_++;
  active_start_ = now;
  wait_until_ = now + from_seconds(duration_sec);
  return active_handle_;
}

void RecoveryServer::finish(RecoveryOutcome outcome, SimTime now) {
  records_.push_back(RecoveryRecord{
      active_ == ActiveKind::Spin ? RecoveryKind::Spin : RecoveryKind::Wait,
      ClearScope::Both, active_start_, now, outcome});
  active_ = ActiveKind::None;
  active_handle_ = 0;
  if (hooks_.command) {
    hooks_.command(Twist{});
  }
}

TaskStatus RecoveryServer::poll(std::uint64_t handle, SimTime now) {
  if (handle == 0 || handle != active_handle_ || active_ == ActiveKind::None) {
    return TaskStatus::Cancelled;
  }
  if (!is_active()) {
    last_failure_ = TaskFailure::ServerUnavailable;
    finish(RecoveryOutcome::Failure, now);
    return TaskStatus::Failed;
  }
  if (active_ == ActiveKind::Spin) {
    const double turned =
        (hooks_.accumulated_yaw ? hooks_.accumulated_yaw() : 0.0) - spin_start_yaw_accum_;
    if (turned >= spin_target_) {
      finish(RecoveryOutcome::Success, now);
      return TaskStatus::Succeeded;
    }
    if (hooks_.command) {
      hooks_.command(Twist{0.0, spin_direction_ * params_.spin_wz});
    }
    return TaskStatus::Running;
  }
  // Wait: hold zero twist for the full duration.
  if (now >= wait_until_) {
    finish(RecoveryOutcome::Success, now);
    return TaskStatus::Succeeded;
  }
  if (hooks_.command) {
    hooks_.command(Twist{});
  }
  return TaskStatus::Running;
}

void RecoveryServer::cancel(std::uint64_t handle, SimTime now) {
  if (handle != 0 && handle == active_handle_ && active_ != ActiveKind::None) {
    finish(RecoveryOutcome::Cancelled, now);
  }
}

bool RecoveryServer::on_deactivate() {
  if (active_ != ActiveKind::None) {
    finish(RecoveryOutcome::Cancelled, active_start_);
  }
  return true;
}

std::vector<RecoveryRecord> RecoveryServer::records_since(std::size_t index) const {
  std::vector<RecoveryRecord> out;
  for (std::size_t i = index; i < records_.size(); ++i) {
    out.push_back(records_[i]);
  }
  return out;
}

}  // namespace navstack
