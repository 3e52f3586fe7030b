#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "navstack/costmap.hpp"
#include "navstack/geometry.hpp"
#include "navstack/lifecycle.hpp"

namespace navstack {

/// Grid path as world poses at cell centers. Headings point at the next
/// pose; the final pose carries the requested goal heading.
struct Path {
  std::vector<Pose2D> poses;
  double total_cost = 0.0;
  SimTime created = 0;

  bool empty() const { return poses.empty(); }
};

enum class PlanError { None, GoalOccupied, StartOccupied, NoPathFound };

struct PlanResult {
  PlanError error = PlanError::None;
  Path path;
  bool ok() const { return error == PlanError::None; }
};

struct AStarParams {
  double cost_weight = 3.0;  // traversal multiplier 1 + w*cost/252
};

/// A planning algorithm selectable at configure time.
class PlannerPlugin {
 public:
  virtual ~PlannerPlugin() = default;
  virtual PlanResult plan(const CostmapSnapshot& snapshot, const CellIndex& start,
                          const CellIndex& goal, const Pose2D& goal_pose) = 0;
};

/// 8-connected A* for a holonomic point robot. Move cost is step length in
/// cells (1 or sqrt(2)) times (1 + cost_weight*cost/252); cells with cost
/// >= 253 (inscribed, lethal, unknown) are untraversable. Octile heuristic.
PlanResult astar_plan(const CostmapSnapshot& snapshot, const CellIndex& start,
                      const CellIndex& goal, const Pose2D& goal_pose,
                      const AStarParams& params);

class AStarPlanner : public PlannerPlugin {
 public:
  explicit AStarPlanner(const AStarParams& params) : params_(params) {}
  PlanResult plan(const CostmapSnapshot& snapshot, const CellIndex& start,
                  const CellIndex& goal, const Pose2D& goal_pose) override {
    return astar_plan(snapshot, start, goal, goal_pose, params_);
  }

 private:
  AStarParams params_;
};

struct PlanRequest {
  Pose2D start;
  Pose2D goal;
  std::string planner_id = "astar";
};

enum class TaskStatus { Pending, Running, Succeeded, Failed, Cancelled };

enum class TaskFailure {
  None,
  ServerUnavailable,
  RejectedGoal,
  GoalOccupied,
  StartOccupied,
  NoPathFound,
  UnknownPlanner,
  NoPath,
  NoValidControl,
  Throttled,
  BusyRejected,
};

const char* to_string(TaskFailure f);

/// Asynchronous planning server owning the global costmap. One request in
/// flight; a newer submit preempts (cancels) the previous one. Requests are
/// serviced on poll, against the freshest global snapshot.
class PlannerServer : public ManagedServer {
 public:
  PlannerServer(std::string name, std::shared_ptr<const OccupancyGrid> map,
                const CostmapParams& costmap_params);

  void register_plugin(const std::string& id, std::unique_ptr<PlannerPlugin> plugin);
  void select_plugin(const std::string& id);

  /// Runs the global costmap update cycle (ignored unless Active).
  SnapshotPtr update_costmap(const Pose2D& robot, const SensorBatch& batch, SimTime now);
  SnapshotPtr snapshot() const;
  void clear_costmap() { costmap_.clear_except_static(); }
  TemporalVoxelStore* voxel_store();
  const GridMeta& map_meta() const { return costmap_.meta(); }

  std::uint64_t submit(const PlanRequest& req, SimTime now);
  TaskStatus poll(std::uint64_t handle);
  void cancel(std::uint64_t handle);
  const Path& path(std::uint64_t handle) const;
  TaskFailure failure(std::uint64_t handle) const;

  /// Most recent terminal failure, for goal-occupancy monitoring.
  TaskFailure last_failure() const { return last_failure_; }
  std::uint64_t plan_success_count() const { return plan_success_count_; }

 protected:
  bool on_configure() override;
  bool on_cleanup() override;
  bool on_deactivate() override;

 private:
  struct Slot {
    std::uint64_t handle = 0;
    PlanRequest request;
    SimTime submitted = 0;
    TaskStatus status = TaskStatus::Pending;
    TaskFailure failure = TaskFailure::None;
    Path path;
  };

  void service(Slot& slot);

  std::shared_ptr<const OccupancyGrid> map_;
  CostmapParams costmap_params_;
  LayeredCostmap costmap_;
  std::map<std::string, std::unique_ptr<PlannerPlugin>> plugins_;
  std::string selected_ = "astar";
  std::uint64_t next_handle_ = 1;
  std::vector<Slot> slots_;  // small ring of recent requests
  TaskFailure last_failure_ = TaskFailure::None;
  std::uint64_t plan_success_count_ = 0;
};

}  // namespace navstack
