#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "navstack/costmap.hpp"
#include "navstack/geometry.hpp"
#include "navstack/lifecycle.hpp"
#include "navstack/planning.hpp"

namespace navstack {

/// Kinematic envelope. Forward-only drive: vx in [0, vx_max], wz symmetric.
struct VelocityLimits {
  double vx_max = 0.45;
  double wz_max = 1.0;
  double ax = 0.5;  // m/s^2
  double aw = 1.2;  // rad/s^2
};

/// Velocity box reachable within one control period.
struct DynamicWindow {
  double vx_lo = 0.0, vx_hi = 0.0;
  double wz_lo = 0.0, wz_hi = 0.0;
};

DynamicWindow dynamic_window(const Twist& current, const VelocityLimits& limits,
                             double dt);

/// Candidate motion: constant twist rolled out with the exact unicycle model.
struct Trajectory {
  Twist seed;
  std::vector<Pose2D> poses;  // at k*sim_dt for k = 1..floor(sim_time/sim_dt)
};

/// Exact constant-twist integration over dt (arc model; straight-line when
/// |wz| is negligible).
Pose2D integrate_twist(const Pose2D& start, const Twist& twist, double dt);

std::vector<Trajectory> sample_trajectories(const Pose2D& start, const DynamicWindow& window,
                                            int n_vx, int n_wz, double sim_time,
                                            double sim_dt);

struct CriticWeights {
  double obstacle = 1.0;
  double path = 2.0;
  double goal = 2.0;
  double speed = 0.5;
};

struct GoalTolerances {
  double xy = 0.25;
  double yaw = 0.25;
};

struct ScoreResult {
  bool feasible = false;
  double score = 0.0;
};

/// Weighted-sum critic score, lower is better. Infeasible when any rolled
/// pose's footprint touches cost >= 253; unknown cells count as free for the
/// local reaction. Throws NavError(InvalidInput) on an empty path.
ScoreResult score_trajectory(const Trajectory& traj, const CostmapSnapshot& snapshot,
                             const std::vector<Pose2D>& path, const Pose2D& target_point,
                             const CriticWeights& weights, const Footprint& footprint,
                             double vx_max);

/// Inclusive goal check on position and heading.
bool is_goal_reached(const Pose2D& pose, const Pose2D& goal, const GoalTolerances& tol);

struct ControllerParams {
  VelocityLimits limits;
  CriticWeights weights;
  GoalTolerances tolerances;
  double sim_time = 1.5;
  double sim_dt = 0.1;
  int n_vx = 10;
  int n_wz = 20;
  double lookahead = 0.6;        // meters ahead of the nearest path pose
  double control_period = 0.1;   // seconds between control cycles
  double rotate_wz = 0.6;        // rad/s cap in rotate-to-heading mode
  // Bearing to the active path point beyond which the forward-only sampler
  // cannot make progress; the controller rotates in place instead.
  double reorient_bearing = 1.75;
  Footprint footprint{0.22};
  bool audit = false;            // re-simulate every chosen command
};

enum class ControlError { None, NoValidControl, NoPath };

struct ControlResult {
  ControlError error = ControlError::None;
  Twist twist;
  bool goal_reached = false;
  int chosen_index = -1;  // index into the sample grid, -1 in rotate mode
};

/// One dynamic-window control cycle: clamp to the window, roll out the
/// sample grid, score, and pick the cheapest feasible sample (ties prefer
/// higher vx, then smaller |wz|).
ControlResult compute_velocity(const Pose2D& pose, const Twist& current,
                               const CostmapSnapshot& snapshot,
                               const std::vector<Pose2D>& path, const Pose2D& goal,
                               const ControllerParams& params);

/// Prunes a path to the poses inside the snapshot window; used before
/// scoring so critics scan local poses only.
std::vector<Pose2D> prune_path_to_window(const std::vector<Pose2D>& path,
                                         const GridMeta& window);

/// Target pose `lookahead` meters of arc beyond the nearest path pose.
Pose2D active_path_point(const std::vector<Pose2D>& path, const Pose2D& robot,
                         double lookahead);

/// Controller server owning the local rolling costmap. FollowPath-style
/// requests run one control cycle per poll and command through the sink.
class ControllerServer : public ManagedServer {
 public:
  using CommandSink = std::function<void(const Twist&)>;

  ControllerServer(std::string name, std::shared_ptr<const OccupancyGrid> map,
                   double window_size, const CostmapParams& costmap_params,
                   const ControllerParams& params);

  void set_command_sink(CommandSink sink) { sink_ = std::move(sink); }
  const ControllerParams& params() const { return params_; }

  SnapshotPtr update_costmap(const Pose2D& robot, const SensorBatch& batch, SimTime now);
  SnapshotPtr snapshot() const { return costmap_.latest(); }
  void clear_costmap() { costmap_.clear_except_static(); }
  TemporalVoxelStore* voxel_store();

  /// Starts (or restarts) following. The path may be swapped mid-request;
  /// the next control cycle adopts it.
  std::uint64_t submit(const Path& path, const Pose2D& goal, SimTime now);
  void update_path(const Path& path);

  /// One control cycle: reads pose and twist, commands through the sink,
  /// reports Running until the goal checker passes.
  TaskStatus poll(std::uint64_t handle, const Pose2D& pose, const Twist& current,
                  SimTime now);
  void cancel(std::uint64_t handle);
  TaskFailure failure() const { return failure_; }

  /// Safety-audit counter: control cycles whose re-simulated command touched
  /// cost >= 253 (audit mode only).
  std::uint64_t audit_violations() const { return audit_violations_; }
  std::uint64_t control_cycles() const { return control_cycles_; }

 protected:
  bool on_deactivate() override;
  bool on_cleanup() override;

 private:
  std::shared_ptr<const OccupancyGrid> map_;
  LayeredCostmap costmap_;
  ControllerParams params_;
  CommandSink sink_;

  std::uint64_t next_handle_ = 1;
  std::uint64_t active_handle_ = 0;
  Path path_;
  Pose2D goal_;
  bool have_request_ = false;
  TaskFailure failure_ = TaskFailure::None;
  std::uint64_t audit_violations_ = 0;
  std::uint64_t control_cycles_ = 0;
};

}  // namespace navstack
