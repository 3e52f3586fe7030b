#pragma once

#include <any>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "navstack/clock.hpp"
#include "navstack/geometry.hpp"

namespace navstack {

enum class NodeStatus { Idle, Running, Success, Failure };
enum class NodeKind { Sequence, ReactiveSequence, Fallback, RoundRobin, RateController, Action };

const char* to_string(NodeStatus s);

/// Typed key-value store shared by the nodes of one tree. Values written by
/// a node are visible to nodes ticked later in the same tick.
class Blackboard {
 public:
  template <typename T>
  void set(const std::string& key, T value) {
    values_[key] = std::move(value);
  }

  template <typename T>
  const T* get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return nullptr;
    return std::any_cast<T>(&it->second);
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) const {
    const T* v = get<T>(key);
    return v ? *v : fallback;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void erase(const std::string& key) { values_.erase(key); }
  void clear() { values_.clear(); }

 private:
  std::map<std::string, std::any> values_;
};

// Well-known blackboard keys.
namespace bb {
inline constexpr const char* kGoal = "goal";                      // Pose2D
inline constexpr const char* kPose = "pose";                      // Pose2D, current estimate
inline constexpr const char* kTwist = "twist";                    // Twist, current body velocity
inline constexpr const char* kPath = "path";                      // planning Path
inline constexpr const char* kGoalReached = "goal_reached";       // bool
inline constexpr const char* kPlanSuccesses = "plan_successes";   // uint64
inline constexpr const char* kRecoveries = "recoveries";          // uint64
inline constexpr const char* kRecoveryClears = "recovery_clears"; // uint64
inline constexpr const char* kRecoverySpins = "recovery_spins";   // uint64
inline constexpr const char* kRecoveryWaits = "recovery_waits";   // uint64
inline constexpr const char* kGoalOccupiedSince = "goal_occupied_since";  // SimTime
}  // namespace bb

struct TickContext {
  Blackboard& blackboard;
  SimTime now = 0;
};

class BTNode {
 public:
  explicit BTNode(NodeKind kind) : kind_(kind) {}
  virtual ~BTNode() = default;

  NodeStatus tick(TickContext& ctx) {
    status_ = do_tick(ctx);
    return status_;
  }

  /// Returns the node and all descendants to Idle; cancels in-flight server
  /// work. Idempotent.
  void halt() {
    do_halt();
    for (auto& c : children_) c->halt();
    status_ = NodeStatus::Idle;
  }

  NodeStatus status() const { return status_; }
  NodeKind kind() const { return kind_; }
  const std::vector<std::unique_ptr<BTNode>>& children() const { return children_; }
  void add_child(std::unique_ptr<BTNode> child) { children_.push_back(std::move(child)); }
  virtual std::string name() const;

 protected:
  virtual NodeStatus do_tick(TickContext& ctx) = 0;
  virtual void do_halt() {}

  std::vector<std::unique_ptr<BTNode>> children_;
  NodeStatus status_ = NodeStatus::Idle;

 private:
  NodeKind kind_;
};

/// Sequence with memory: resumes from the running child, fails fast.
class SequenceNode : public BTNode {
 public:
  SequenceNode() : BTNode(NodeKind::Sequence) {}

 protected:
  NodeStatus do_tick(TickContext& ctx) override;
  void do_halt() override { index_ = 0; }

 private:
  std::size_t index_ = 0;
};

/// Ticks every child from the first on each tick; an earlier child going
/// Running or Failure halts any later non-idle child.
class ReactiveSequenceNode : public BTNode {
 public:
  ReactiveSequenceNode() : BTNode(NodeKind::ReactiveSequence) {}

 protected:
  NodeStatus do_tick(TickContext& ctx) override;
};

/// Fallback (selector) with memory.
class FallbackNode : public BTNode {
 public:
  FallbackNode() : BTNode(NodeKind::Fallback) {}

 protected:
  NodeStatus do_tick(TickContext& ctx) override;
  void do_halt() override { index_ = 0; }

 private:
  std::size_t index_ = 0;
};

/// Rotates its starting child across activations; used to escalate
/// recoveries from conservative to aggressive.
class RoundRobinNode : public BTNode {
 public:
  RoundRobinNode() : BTNode(NodeKind::RoundRobin) {}

 protected:
  NodeStatus do_tick(TickContext& ctx) override;
  void do_halt() override {
    rotation_ = 0;
    current_ = 0;
    tried_ = 0;
    active_ = false;
  }

 private:
  std::size_t rotation_ = 0;  // where the next fresh activation starts
  std::size_t current_ = 0;
  std::size_t tried_ = 0;
  bool active_ = false;
};

/// Gates its only child to a fixed tick rate. Between gate instants it
/// reports the child's latest terminal status (Running while the child is
/// mid-execution or has no result yet).
class RateControllerNode : public BTNode {
 public:
  explicit RateControllerNode(double hz);
  double hz() const { return hz_; }

 protected:
  NodeStatus do_tick(TickContext& ctx) override;
  void do_halt() override {
    primed_ = false;
    last_terminal_ = NodeStatus::Idle;
  }

 private:
  double hz_;
  SimTime period_;
  bool primed_ = false;
  SimTime last_child_tick_ = 0;
  NodeStatus last_terminal_ = NodeStatus::Idle;
};

using ParamMap = std::map<std::string, std::string>;

/// Leaf bound to a task server through an asynchronous submit/poll/cancel
/// contract supplied by the application.
class ActionNode : public BTNode {
 public:
  ActionNode(std::string action, ParamMap params)
      : BTNode(NodeKind::Action), action_(std::move(action)), params_(std::move(params)) {}

  const std::string& action_name() const { return action_; }
  const ParamMap& params() const { return params_; }
  std::string name() const override { return action_; }

 protected:
  std::string action_;
  ParamMap params_;
};

/// Factory registry: parse-time action vocabulary and node construction.
class ActionRegistry {
 public:
  using Factory = std::function<std::unique_ptr<BTNode>(const ParamMap&)>;

  void add(const std::string& name, Factory factory) { factories_[name] = std::move(factory); }
  bool contains(const std::string& name) const { return factories_.count(name) > 0; }
  std::unique_ptr<BTNode> make(const std::string& name, const ParamMap& params) const;

 private:
  std::map<std::string, Factory> factories_;
};

struct TreeSpec {
  std::unique_ptr<BTNode> root;
  std::string source;
  int node_count = 0;
};

/// Parses the behavior-tree XML. Throws NavError(ParseError) for malformed
/// documents, unknown tags and arity violations; NavError(UnknownAction)
/// for action tags missing from the registry.
TreeSpec parse_tree(const std::string& xml_text, const ActionRegistry& registry);

/// The XML action-tag vocabulary.
const std::vector<std::string>& known_action_tags();

enum class NavOutcome { Succeeded, Aborted, Rejected };

struct NavStats {
  std::uint64_t recoveries_total = 0;
  std::uint64_t clears = 0;
  std::uint64_t spins = 0;
  std::uint64_t waits = 0;
  double duration_sec = 0.0;
  double distance_m = 0.0;
};

struct NavResult {
  NavOutcome outcome = NavOutcome::Aborted;
  NavStats stats;
};

struct NavigatorParams {
  double tick_period = 0.1;      // seconds of simulated time between ticks
  int max_recovery_rounds = 3;   // full ladder cycles allowed without a plan
};

/// Drives one navigation task: writes the goal, ticks the root at the tick
/// period, finishes when the controller reports the goal reached or the
/// recovery ladder is exhausted.
class Navigator {
 public:
  Navigator(TreeSpec tree, std::shared_ptr<Blackboard> blackboard, NavigatorParams params);

  void set_goal_validator(std::function<bool(const Pose2D&)> validator);
  void set_distance_provider(std::function<double()> provider);

  /// Starts a navigation. Returns false (outcome Rejected) when the goal
  /// fails validation; no tick happens in that case.
  bool begin(const Pose2D& goal, SimTime now);

  enum class Step { Running, Succeeded, Aborted };
  Step tick(SimTime now);

  /// Cancels the running navigation (halts the tree, outcome Aborted).
  void cancel(SimTime now);

  bool active() const { return active_; }
  const NavResult& result() const { return result_; }
  Blackboard& blackboard() { return *blackboard_; }
  BTNode* root() { return tree_.root.get(); }
  const NavigatorParams& params() const { return params_; }

 private:
  void finish(NavOutcome outcome, SimTime now);
  std::uint64_t counter(const char* key) const;

  TreeSpec tree_;
  std::shared_ptr<Blackboard> blackboard_;
  NavigatorParams params_;
  std::function<bool(const Pose2D&)> goal_validator_;
  std::function<double()> distance_provider_;

  bool active_ = false;
  SimTime started_ = 0;
  double distance_at_start_ = 0.0;
  std::uint64_t recoveries_at_start_ = 0;
  std::uint64_t clears_at_start_ = 0;
  std::uint64_t spins_at_start_ = 0;
  std::uint64_t waits_at_start_ = 0;
  std::uint64_t recoveries_at_last_plan_ = 0;
  std::uint64_t plan_successes_seen_ = 0;
  NavResult result_;
};

}  // namespace navstack
