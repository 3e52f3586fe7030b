#include "navstack/bt_actions.hpp"

#include <cmath>

namespace navstack {

namespace {

void bump(Blackboard& bb, const char* key) {
  bb.set<std::uint64_t>(key, bb.get_or<std::uint64_t>(key, 0) + 1);
}

double param_double(const ParamMap& params, const char* key, double fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw NavError(ErrorCode::ParseError, std::string(key) + " not a number");
  }
}

}  // namespace

ComputePathAction::ComputePathAction(ParamMap params, ServerBindings servers)
    : ActionNode("ComputePathToPose", std::move(params)), servers_(servers) {}

NodeStatus ComputePathAction::do_tick(TickContext& ctx) {
  PlannerServer* server = servers_.planner;
  if (server == nullptr || !server->is_active()) {
    return NodeStatus::Failure;  // ServerUnavailable
  }
  if (handle_ == 0) {
    const Pose2D* goal = ctx.blackboard.get<Pose2D>(bb::kGoal);
    const Pose2D* pose = ctx.blackboard.get<Pose2D>(bb::kPose);
    if (goal == nullptr || pose == nullptr) {
      return NodeStatus::Failure;
    }
    PlanRequest req;
    req.start = *pose;
    req.goal = *goal;
    handle_ = server->submit(req, ctx.now);
  }
  const TaskStatus st = server->poll(handle_);
  if (st == TaskStatus::Running || st == TaskStatus::Pending) {
    return NodeStatus::Running;
  }
  if (st == TaskStatus::Succeeded) {
    ctx.blackboard.set(bb::kPath, server->path(handle_));
    bump(ctx.blackboard, bb::kPlanSuccesses);
    ctx.blackboard.erase(bb::kGoalOccupiedSince);
    handle_ = 0;
    return NodeStatus::Success;
  }
  // Failure: drop the stale path so FollowPath fails deterministically, and
  // stamp the first moment the goal itself was found occupied.
  ctx.blackboard.erase(bb::kPath);
  if (server->failure(handle_) == TaskFailure::GoalOccupied &&
      !ctx.blackboard.has(bb::kGoalOccupiedSince)) {
    ctx.blackboard.set<SimTime>(bb::kGoalOccupiedSince, ctx.now);
  }
  handle_ = 0;
  return NodeStatus::Failure;
}

void ComputePathAction::do_halt() {
  if (handle_ != 0 && servers_.planner != nullptr) {
    servers_.planner->cancel(handle_);
  }
  handle_ = 0;
}

FollowPathAction::FollowPathAction(ParamMap params, ServerBindings servers)
    : ActionNode("FollowPath", std::move(params)), servers_(servers) {}

NodeStatus FollowPathAction::do_tick(TickContext& ctx) {
  ControllerServer* server = servers_.controller;
  if (server == nullptr || !server->is_active()) {
    return NodeStatus::Failure;  // ServerUnavailable
  }
  const Path* path = ctx.blackboard.get<Path>(bb::kPath);
  if (path == nullptr || path->empty()) {
    handle_ = 0;
    return NodeStatus::Failure;  // no valid path to follow
  }
  const Pose2D* goal = ctx.blackboard.get<Pose2D>(bb::kGoal);
  const Pose2D* pose = ctx.blackboard.get<Pose2D>(bb::kPose);
  if (goal == nullptr || pose == nullptr) {
    return NodeStatus::Failure;
  }
  const Twist twist = ctx.blackboard.get_or<Twist>(bb::kTwist, Twist{});
  if (handle_ == 0) {
    handle_ = server->submit(*path, *goal, ctx.now);
    path_stamp_ = path->created;
  } else if (path->created != path_stamp_) {
    server->update_path(*path);  // adopt the newer plan mid-request
    path_stamp_ = path->created;
  }
  const TaskStatus st = server->poll(handle_, *pose, twist, ctx.now);
  if (st == TaskStatus::Running) {
    return NodeStatus::Running;
  }
  handle_ = 0;
  if (st == TaskStatus::Succeeded) {
    ctx.blackboard.set(bb::kGoalReached, true);
    return NodeStatus::Success;
  }
  return NodeStatus::Failure;
}

void FollowPathAction::do_halt() {
  if (handle_ != 0 && servers_.controller != nullptr) {
    servers_.controller->cancel(handle_);
  }
  handle_ = 0;
}

ClearCostmapAction::ClearCostmapAction(ParamMap params, ServerBindings servers)
    : ActionNode("ClearCostmap", std::move(params)), servers_(servers) {
  auto it = params_.find("scope");
  if (it != params_.end()) {
    if (it->second == "global") {
      scope_ = ClearScope::Global;
    } else if (it->second == "local") {
      scope_ = ClearScope::Local;
    } else if (it->second == "both") {
      scope_ = ClearScope::Both;
    } else {
      throw NavError(ErrorCode::ParseError, "ClearCostmap scope must be global|local|both");
    }
  }
}

NodeStatus ClearCostmapAction::do_tick(TickContext& ctx) {
  RecoveryServer* server = servers_.recovery;
  if (server == nullptr || !server->is_active()) {
    return NodeStatus::Failure;
  }
  if (server->execute_clear(scope_, ctx.now) != TaskStatus::Succeeded) {
    return NodeStatus::Failure;  // throttled or unavailable
  }
  bump(ctx.blackboard, bb::kRecoveries);
  bump(ctx.blackboard, bb::kRecoveryClears);
  return NodeStatus::Success;
}

SpinAction::SpinAction(ParamMap params, ServerBindings servers)
    : ActionNode("Spin", std::move(params)), servers_(servers) {
  target_yaw_ = param_double(params_, "target_yaw", 1.57);
  if (!(target_yaw_ > 0.0)) {
    throw NavError(ErrorCode::ParseError, "Spin target_yaw must be positive");
  }
}

NodeStatus SpinAction::do_tick(TickContext& ctx) {
  RecoveryServer* server = servers_.recovery;
  if (server == nullptr || !server->is_active()) {
    return NodeStatus::Failure;
  }
  if (handle_ == 0) {
    handle_ = server->submit_spin(target_yaw_, ctx.now);
    if (handle_ == 0) {
      return NodeStatus::Failure;  // busy
    }
  }
  const TaskStatus st = server->poll(handle_, ctx.now);
  if (st == TaskStatus::Running) {
    return NodeStatus::Running;
  }
  handle_ = 0;
  if (st == TaskStatus::Succeeded) {
    bump(ctx.blackboard, bb::kRecoveries);
    bump(ctx.blackboard, bb::kRecoverySpins);
    return NodeStatus::Success;
  }
  return NodeStatus::Failure;
}

void SpinAction::do_halt() {
  if (handle_ != 0 && servers_.recovery != nullptr) {
    servers_.recovery->cancel(handle_, 0);
  }
  handle_ = 0;
}

WaitAction::WaitAction(ParamMap params, ServerBindings servers)
    : ActionNode("Wait", std::move(params)), servers_(servers) {
  duration_ = param_double(params_, "duration", 5.0);
  if (!(duration_ > 0.0)) {
    throw NavError(ErrorCode::ParseError, "Wait duration must be positive");
  }
}

NodeStatus WaitAction::do_tick(TickContext& ctx) {
  RecoveryServer* server = servers_.recovery;
  if (server == nullptr || !server->is_active()) {
    return NodeStatus::Failure;
  }
  if (handle_ == 0) {
    handle_ = server->submit_wait(duration_, ctx.now);
    if (handle_ == 0) {
      return NodeStatus::Failure;
    }
  }
  const TaskStatus st = server->poll(handle_, ctx.now);
  if (st == TaskStatus::Running) {
    return NodeStatus::Running;
  }
  handle_ = 0;
  if (st == TaskStatus::Succeeded) {
    bump(ctx.blackboard, bb::kRecoveries);
    bump(ctx.blackboard, bb::kRecoveryWaits);
    return NodeStatus::Success;
  }
  return NodeStatus::Failure;
}

void WaitAction::do_halt() {
  if (handle_ != 0 && servers_.recovery != nullptr) {
    servers_.recovery->cancel(handle_, 0);
  }
  handle_ = 0;
}

ActionRegistry make_navigation_registry(const ServerBindings& servers) {
  ActionRegistry registry;
  registry.add("ComputePathToPose", [servers](const ParamMap& p) {
    return std::make_unique<ComputePathAction>(p, servers);
  });
  registry.add("FollowPath", [servers](const ParamMap& p) {
    return std::make_unique<FollowPathAction>(p, servers);
  });
  registry.add("ClearCostmap", [servers](const ParamMap& p) {
    return std::make_unique<ClearCostmapAction>(p, servers);
  });
  registry.add("Spin", [servers](const ParamMap& p) {
    return std::make_unique<SpinAction>(p, servers);
  });
  registry.add("Wait", [servers](const ParamMap& p) {
    return std::make_unique<WaitAction>(p, servers);
  });
  return registry;
}

}  // namespace navstack
