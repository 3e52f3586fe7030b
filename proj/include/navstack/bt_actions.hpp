#pragma once

#include <memory>

#include "navstack/bt.hpp"
#include "navstack/control.hpp"
#include "navstack/planning.hpp"
#include "navstack/recovery.hpp"

namespace navstack {

/// Server bundle handed to the tree's action nodes.
struct ServerBindings {
  PlannerServer* planner = nullptr;
  ControllerServer* controller = nullptr;
  RecoveryServer* recovery = nullptr;
};

/// Submits a plan request from the current pose to the blackboard goal once
/// per tick-to-completion, publishing the path on success. A planner failure
/// invalidates the blackboard path so FollowPath fails deterministically.
class ComputePathAction : public ActionNode {
 public:
  ComputePathAction(ParamMap params, ServerBindings servers);

 protected:
  NodeStatus do_tick(TickContext& ctx) override;
  void do_halt() override;

 private:
  ServerBindings servers_;
  std::uint64_t handle_ = 0;
};

/// Runs one controller cycle per tick; adopts a fresh blackboard path
/// mid-request. Succeeds when the goal checker passes.
class FollowPathAction : public ActionNode {
 public:
  FollowPathAction(ParamMap params, ServerBindings servers);

 protected:
  NodeStatus do_tick(TickContext& ctx) override;
  void do_halt() override;

 private:
  ServerBindings servers_;
  std::uint64_t handle_ = 0;
  SimTime path_stamp_ = -1;
};

/// Synchronous clear of the costmap scope named by the `scope` parameter.
class ClearCostmapAction : public ActionNode {
 public:
  ClearCostmapAction(ParamMap params, ServerBindings servers);
  ClearScope scope() const { return scope_; }

 protected:
  NodeStatus do_tick(TickContext& ctx) override;

 private:
  ServerBindings servers_;
  ClearScope scope_ = ClearScope::Both;
};

class SpinAction : public ActionNode {
 public:
  SpinAction(ParamMap params, ServerBindings servers);

 protected:
  NodeStatus do_tick(TickContext& ctx) override;
  void do_halt() override;

 private:
  ServerBindings servers_;
  double target_yaw_ = 1.57;
  std::uint64_t handle_ = 0;
};

class WaitAction : public ActionNode {
 public:
  WaitAction(ParamMap params, ServerBindings servers);

 protected:
  NodeStatus do_tick(TickContext& ctx) override;
  void do_halt() override;

 private:
  ServerBindings servers_;
  double duration_ = 5.0;
  std::uint64_t handle_ = 0;
};

/// Registry with the full navigation action vocabulary bound to the servers.
ActionRegistry make_navigation_registry(const ServerBindings& servers);

}  // namespace navstack
