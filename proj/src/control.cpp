#include "navstack/control.hpp"

#include <algorithm>
#include <cmath>

namespace navstack {

DynamicWindow dynamic_window(const Twist& current, const VelocityLimits& limits,
                             double dt) {
  if (dt <= 0.0) {
    throw NavError(ErrorCode::InvalidInput, "control period must be positive");
  }
  DynamicWindow w;
  w.vx_lo = std::max(0.0, current.vx - limits.ax * dt);
  w.vx_hi = std::min(limits.vx_max, current.vx + limits.ax * dt);
  w.wz_lo = std::max(-limits.wz_max, current.wz - limits.aw * dt);
  w.wz_hi = std::min(limits.wz_max, current.wz + limits.aw * dt);
  return w;
}

Pose2D integrate_twist(const Pose2D& start, const Twist& twist, double dt) {
  if (std::abs(twist.wz) < 1e-9) {
    return Pose2D(start.x + twist.vx * dt * std::cos(start.theta),
                  start.y + twist.vx * dt * std::sin(start.theta), start.theta);
  }
  const double radius = twist.vx / twist.wz;
  const double next_theta = start.theta + twist.wz * dt;
  return Pose2D(start.x + radius * (std::sin(next_theta) - std::sin(start.theta)),
                start.y - radius * (std::cos(next_theta) - std::cos(start.theta)),
                next_theta);
}

namespace {

double sample_at(double lo, double hi, int i, int n) {
  if (n <= 1) return 0.5 * (lo + hi);
  return lo + (hi - lo) * i / (n - 1);
}

}  // namespace

std::vector<Trajectory> sample_trajectories(const Pose2D& start, const DynamicWindow& window,
                                            int n_vx, int n_wz, double sim_time,
                                            double sim_dt) {
  if (n_vx < 1 || n_wz < 1 || sim_dt <= 0.0 || sim_time < sim_dt) {
    throw NavError(ErrorCode::InvalidInput, "bad sampling parameters");
  }
  const int steps = static_cast<int>(std::floor(sim_time / sim_dt));
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(n_vx) * n_wz);
  for (int i = 0; i < n_vx; ++i) {
    for (int j = 0; j < n_wz; ++j) {
      Trajectory traj;
      traj.seed.vx = sample_at(window.vx_lo, window.vx_hi, i, n_vx);
      traj.seed.wz = sample_at(window.wz_lo, window.wz_hi, j, n_wz);
      traj.poses.reserve(steps);
      Pose2D p = start;
      for (int k = 0; k < steps; ++k) {
        p = integrate_twist(p, traj.seed, sim_dt);
        traj.poses.push_back(p);
      }
      out.push_back(std::move(traj));
    }
  }
  return out;
}

namespace {

// Footprint max cost at a pose; 255 (unknown) is treated as free space in
// the local window. Returns 253+ when the footprint touches inscribed or
// lethal cost.
Cost footprint_cost(const Pose2D& pose, const CostmapSnapshot& snapshot,
                    const Footprint& footprint) {
  const GridMeta& meta = snapshot.meta;
  const double r = footprint.radius;
  const double res = meta.resolution;
  const int lo_x = static_cast<int>(std::floor((pose.x - r - meta.origin.x) / res));
  const int hi_x = static_cast<int>(std::floor((pose.x + r - meta.origin.x) / res));
  const int lo_y = static_cast<int>(std::floor((pose.y - r - meta.origin.y) / res));
  const int hi_y = static_cast<int>(std::floor((pose.y + r - meta.origin.y) / res));
  const double r2 = r * r;
  Cost worst = 0;
  for (int cy = lo_y; cy <= hi_y; ++cy) {
    for (int cx = lo_x; cx <= hi_x; ++cx) {
      if (!meta.contains(cx, cy)) continue;
      const double dx = meta.origin.x + (cx + 0.5) * res - pose.x;
      const double dy = meta.origin.y + (cy + 0.5) * res - pose.y;
      if (dx * dx + dy * dy > r2) continue;
      Cost c = snapshot.at_unchecked(cx, cy);
      if (c == kCostUnknown) c = kCostFree;
      if (c > worst) worst = c;
    }
  }
  return worst;
}

}  // namespace

ScoreResult score_trajectory(const Trajectory& traj, const CostmapSnapshot& snapshot,
                             const std::vector<Pose2D>& path, const Pose2D& target_point,
                             const CriticWeights& weights, const Footprint& footprint,
                             double vx_max) {
  if (path.empty()) {
    throw NavError(ErrorCode::InvalidInput, "scoring against an empty path");
  }
  ScoreResult out;
  Cost worst = 0;
  double path_dist_sum = 0.0;
  for (const Pose2D& p : traj.poses) {
    const Cost c = footprint_cost(p, snapshot, footprint);
    if (c >= kCostInscribed) {
      return out;  // infeasible
    }
    if (c > worst) worst = c;
    double best = std::numeric_limits<double>::infinity();
    for (const Pose2D& q : path) {
      const double dx = p.x - q.x;
      const double dy = p.y - q.y;
      const double d2 = dx * dx + dy * dy;
      if (d2 < best) best = d2;
    }
    path_dist_sum += std::sqrt(best);
  }
  const Pose2D& last = traj.poses.back();
  const double goal_dist = std::hypot(last.x - target_point.x, last.y - target_point.y);
  out.feasible = true;
  out.score = weights.obstacle * (static_cast<double>(worst) / 252.0) +
              weights.path * (path_dist_sum / traj.poses.size()) +
              weights.goal * goal_dist +
              weights.speed * (1.0 - traj.seed.vx / vx_max);
  return out;
}

bool is_goal_reached(const Pose2D& pose, const Pose2D& goal, const GoalTolerances& tol) {
  const double d = std::hypot(goal.x - pose.x, goal.y - pose.y);
  if (d > tol.xy) return false;
  return std::abs(normalize_angle(goal.theta - pose.theta)) <= tol.yaw;
}

std::vector<Pose2D> prune_path_to_window(const std::vector<Pose2D>& path,
                                         const GridMeta& window) {
  const double x0 = window.origin.x;
  const double y0 = window.origin.y;
  const double x1 = x0 + window.width * window.resolution;
  const double y1 = y0 + window.height * window.resolution;
  std::vector<Pose2D> out;
  for (const Pose2D& p : path) {
    if (p.x >= x0 && p.x < x1 && p.y >= y0 && p.y < y1) {
      out.push_back(p);
    }
  }
  return out;
}

Pose2D active_path_point(const std::vector<Pose2D>& path, const Pose2D& robot,
                         double lookahead) {
  if (path.empty()) {
    throw NavError(ErrorCode::InvalidInput, "empty path");
  }
  std::size_t nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < path.size(); ++i) {
    const double dx = path[i].x - robot.x;
    const double dy = path[i].y - robot.y;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best) {
      best = d2;
      nearest = i;
    }
  }
  double walked = 0.0;
  std::size_t i = nearest;
  while (i + 1 < path.size() && walked < lookahead) {
    walked += std::hypot(path[i + 1].x - path[i].x, path[i + 1].y - path[i].y);
    ++i;
  }
  return path[i];
}

ControlResult compute_velocity(const Pose2D& pose, const Twist& current,
                               const CostmapSnapshot& snapshot,
                               const std::vector<Pose2D>& path, const Pose2D& goal,
                               const ControllerParams& params) {
  ControlResult result;
  if (path.empty()) {
    result.error = ControlError::NoPath;
    return result;
  }
  const DynamicWindow window = dynamic_window(current, params.limits, params.control_period);

  const double goal_dist = std::hypot(goal.x - pose.x, goal.y - pose.y);
  if (goal_dist <= params.tolerances.xy) {
    // Terminal rotate-to-heading mode. Forward speed bleeds off at the
    // window's lower edge so acceleration stays bounded.
    const double yaw_err = normalize_angle(goal.theta - pose.theta);
    result.twist.vx = window.vx_lo;
    if (std::abs(yaw_err) <= params.tolerances.yaw) {
      result.goal_reached = true;
      result.twist.wz = std::clamp(0.0, window.wz_lo, window.wz_hi);
    } else {
      const double target = yaw_err > 0 ? params.rotate_wz : -params.rotate_wz;
      result.twist.wz = std::clamp(target, window.wz_lo, window.wz_hi);
    }
    return result;
  }

  std::vector<Pose2D> local = prune_path_to_window(path, snapshot.meta);
  if (local.empty()) {
    // Path entirely outside the window; steer against the full path.
    local = path;
  }
  const Pose2D target = active_path_point(local, pose, params.lookahead);

  // A target well behind the robot is unreachable for a forward-only
  // sampler (standing still would tie-break every rotation); reorient in
  // place first.
  const double target_dist = std::hypot(target.x - pose.x, target.y - pose.y);
  if (target_dist > 0.1) {
    const double bearing =
        normalize_angle(std::atan2(target.y - pose.y, target.x - pose.x) - pose.theta);
    if (std::abs(bearing) > params.reorient_bearing) {
      result.twist.vx = window.vx_lo;
      const double want = bearing > 0 ? params.rotate_wz : -params.rotate_wz;
      result.twist.wz = std::clamp(want, window.wz_lo, window.wz_hi);
      return result;
    }
  }

  const auto samples = sample_trajectories(pose, window, params.n_vx, params.n_wz,
                                           params.sim_time, params.sim_dt);
  int best_idx = -1;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const ScoreResult s = score_trajectory(samples[i], snapshot, local, target,
                                           params.weights, params.footprint,
                                           params.limits.vx_max);
    if (!s.feasible) continue;
    bool better = false;
    if (s.score < best_score) {
      better = true;
    } else if (s.score == best_score && best_idx >= 0) {
      const Twist& a = samples[i].seed;
      const Twist& b = samples[best_idx].seed;
      if (a.vx > b.vx || (a.vx == b.vx && std::abs(a.wz) < std::abs(b.wz))) {
        better = true;
      }
    }
    if (better) {
      best_score = s.score;
      best_idx = static_cast<int>(i);
    }
  }
  if (best_idx < 0) {
    result.error = ControlError::NoValidControl;
    return result;
  }
  result.twist = samples[best_idx].seed;
  result.chosen_index = best_idx;
  return result;
}

ControllerServer::ControllerServer(std::string name,
                                   std::shared_ptr<const OccupancyGrid> map,
                                   double window_size, const CostmapParams& costmap_params,
                                   const ControllerParams& params)
    : ManagedServer(std::move(name)),
      map_(std::move(map)),
      costmap_(LayeredCostmap::make_local(map_, window_size, costmap_params)),
      params_(params) {}

SnapshotPtr ControllerServer::update_costmap(const Pose2D& robot, const SensorBatch& batch,
                                             SimTime now) {
  if (!is_active()) {
    return costmap_.latest();
  }
  return costmap_.update(robot, batch, now);
}

TemporalVoxelStore* ControllerServer::voxel_store() {
  auto* layer = costmap_.voxel_layer();
  return layer ? &layer->store() : nullptr;
}

std::uint64_t ControllerServer::submit(const Path& path, const Pose2D& goal, SimTime now) {
  (void)now;
  active_handle_ = next_handle_++;
  path_ = path;
  goal_ = goal;
  have_request_ = true;
  failure_ = TaskFailure::None;
  return active_handle_;
}

void ControllerServer::update_path(const Path& path) {
  if (have_request_) {
    path_ = path;
  }
}

TaskStatus ControllerServer::poll(std::uint64_t handle, const Pose2D& pose,
                                  const Twist& current, SimTime now) {
  (void)now;
  if (handle != active_handle_ || !have_request_) {
    return TaskStatus::Cancelled;
  }
  if (!is_active()) {
    failure_ = TaskFailure::ServerUnavailable;
    have_request_ = false;
    return TaskStatus::Failed;
  }
  SnapshotPtr snap = costmap_.latest();
  if (!snap || path_.empty()) {
    failure_ = TaskFailure::NoPath;
    have_request_ = false;
    return TaskStatus::Failed;
  }
  const ControlResult res =
      compute_velocity(pose, current, *snap, path_.poses, goal_, params_);
  ++control_cycles_;
  if (res.error == ControlError::NoValidControl) {
    failure_ = TaskFailure::NoValidControl;
    have_request_ = false;
    if (sink_) sink_(Twist{});
    return TaskStatus::Failed;
  }
  if (res.error == ControlError::NoPath) {
    failure_ = TaskFailure::NoPath;
    have_request_ = false;
    if (sink_) sink_(Twist{});
    return TaskStatus::Failed;
  }
  if (params_.audit && res.chosen_index >= 0) {
    // Independent re-simulation of the chosen command against the same
    // snapshot; flags any horizon pose whose footprint reaches 253+.
    const int steps = static_cast<int>(std::floor(params_.sim_time / params_.sim_dt));
    Pose2D p = pose;
    for (int k = 0; k < steps; ++k) {
      p = integrate_twist(p, res.twist, params_.sim_dt);
      if (footprint_cost(p, *snap, params_.footprint) >= kCostInscribed) {
        ++audit_violations_;
        break;
      }
    }
  }
  if (sink_) sink_(res.twist);
  if (res.goal_reached) {
    have_request_ = false;
    return TaskStatus::Succeeded;
  }
  return TaskStatus::Running;
}

void ControllerServer::cancel(std::uint64_t handle) {
  if (handle == active_handle_ && have_request_) {
    have_request_ = false;
    if (sink_) sink_(Twist{});  // stop before reporting Cancelled
  }
}

bool ControllerServer::on_deactivate() {
  have_request_ = false;
  if (sink_) sink_(Twist{});
  return true;
}

bool ControllerServer::on_cleanup() {
  costmap_.clear_except_static();
  return true;
}

}  // namespace navstack
