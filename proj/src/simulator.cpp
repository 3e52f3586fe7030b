#include "navstack/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace navstack {

double raycast_grid(const OccupancyGrid& map, double x0, double y0, double angle,
                    double max_range, bool* hit) {
  const GridMeta& meta = map.meta;
  const double res = meta.resolution;
  const double dx = std::cos(angle);
  const double dy = std::sin(angle);
  if (hit) *hit = false;

  // DDA over the grid; gx, gy is the current cell, t the distance travelled.
  double fx = (x0 - meta.origin.x) / res;
  double fy = (y0 - meta.origin.y) / res;
  int gx = static_cast<int>(std::floor(fx));
  int gy = static_cast<int>(std::floor(fy));

  const int step_x = dx > 0 ? 1 : -1;
  const int step_y = dy > 0 ? 1 : -1;
  const double inv_dx = dx != 0.0 ? 1.0 / dx : std::numeric_limits<double>::infinity();
  const double inv_dy = dy != 0.0 ? 1.0 / dy : std::numeric_limits<double>::infinity();
  double t_max_x = dx != 0.0
                       ? ((gx + (step_x > 0 ? 1.0 : 0.0)) - fx) * res * inv_dx
                       : std::numeric_limits<double>::infinity();
  double t_max_y = dy != 0.0
                       ? ((gy + (step_y > 0 ? 1.0 : 0.0)) - fy) * res * inv_dy
                       : std::numeric_limits<double>::infinity();
  const double t_delta_x = dx != 0.0 ? std::abs(res * inv_dx) : 0.0;
  const double t_delta_y = dy != 0.0 ? std::abs(res * inv_dy) : 0.0;

  double t = 0.0;
  // The start cell itself may be occupied.
  if (meta.contains(gx, gy) && map.at(gx, gy) == Occupancy::Occupied) {
    if (hit) *hit = true;
    return 0.0;
  }
  while (t <= max_range) {
    if (t_max_x < t_max_y) {
      t = t_max_x;
      t_max_x += t_delta_x;
      gx += step_x;
    } else {
      t = t_max_y;
      t_max_y += t_delta_y;
      gy += step_y;
    }
    if (t > max_range) break;
    if (!meta.contains(gx, gy)) {
      // Left the map; nothing further to hit.
      return max_range;
    }
    if (map.at(gx, gy) == Occupancy::Occupied) {
      if (hit) *hit = true;
      return t;
    }
  }
  return max_range;
}

double ray_disc(double x0, double y0, double angle, double cx, double cy, double r) {
  const double dx = std::cos(angle);
  const double dy = std::sin(angle);
  const double ox = x0 - cx;
  const double oy = y0 - cy;
  const double b = ox * dx + oy * dy;
  const double c = ox * ox + oy * oy - r * r;
  if (c <= 0.0) return 0.0;  // started inside the disc
  const double disc = b * b - c;
  if (disc < 0.0) return std::numeric_limits<double>::infinity();
  const double t = -b - std::sqrt(disc);
  return t >= 0.0 ? t : std::numeric_limits<double>::infinity();
}

World::World(OccupancyGrid map, const Pose2D& start, double robot_radius,
             const VelocityLimits& limits, const LidarSpec& lidar,
             const NoiseParams& odom_noise, std::uint64_t seed)
    : map_(std::move(map)),
      robot_{start, Twist{}},
      robot_radius_(robot_radius),
      limits_(limits),
      lidar_(lidar),
      odom_noise_(odom_noise),
      rng_lidar_(seed ^ 0x9E3779B97F4A7C15ULL),
      rng_odom_(seed ^ 0xC2B2AE3D27D4EB4FULL) {}

void World::add_agent(const AgentState& agent) {
  agents_.push_back(agent);
  in_contact_agent_.push_back(0);
}

void World::step(const Twist& commanded, double dt) {
  if (dt <= 0.0) {
    throw NavError(ErrorCode::InvalidInput, "dt must be positive");
  }
  // Track the command under acceleration limits, then clamp to the envelope.
  const double dvx = std::clamp(commanded.vx - robot_.twist.vx, -limits_.ax * dt,
                                limits_.ax * dt);
  const double dwz = std::clamp(commanded.wz - robot_.twist.wz, -limits_.aw * dt,
                                limits_.aw * dt);
  robot_.twist.vx = std::clamp(robot_.twist.vx + dvx, 0.0, limits_.vx_max);
  robot_.twist.wz = std::clamp(robot_.twist.wz + dwz, -limits_.wz_max, limits_.wz_max);

  const Pose2D prev = robot_.pose;
  robot_.pose = integrate_twist(robot_.pose, robot_.twist, dt);
  last_odom_ = sample_motion_noise(decompose_delta(prev, robot_.pose), odom_noise_,
                                   rng_odom_);

  step_agents(dt);
  clock_ += from_seconds(dt);
  check_collision();
}

void World::step_agents(double dt) {
  for (AgentState& a : agents_) {
    if (a.waypoints.empty() || a.speed <= 0.0) continue;
    if (a.dwell_left > 0.0) {
      a.dwell_left = std::max(0.0, a.dwell_left - dt);
      continue;
    }
    const auto [tx, ty] = a.waypoints[a.target];
    const double dx = tx - a.x;
    const double dy = ty - a.y;
    const double dist = std::hypot(dx, dy);
    if (dist <= 0.05) {
      a.dwell_left = a.dwell_sec;
      a.target = (a.target + 1) % a.waypoints.size();
      continue;
    }
    const double move = std::min(a.speed * dt, dist);
    a.x += dx / dist * move;
    a.y += dy / dist * move;
  }
}

LaserScan World::lidar() {
  LaserScan scan;
  scan.fov = lidar_.fov;
  scan.max_range = lidar_.max_range;
  scan.ranges.resize(lidar_.beams);
  scan.no_return.resize(lidar_.beams);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < lidar_.beams; ++i) {
    const double a = robot_.pose.theta + scan.beam_angle(i);
    bool hit = false;
    double range =
        raycast_grid(map_, robot_.pose.x, robot_.pose.y, a, lidar_.max_range, &hit);
    for (std::size_t k = 0; k < agents_.size(); ++k) {
      const double t = ray_disc(robot_.pose.x, robot_.pose.y, a, agents_[k].x,
                                agents_[k].y, agents_[k].radius);
      if (t < range) {
        range = t;
        hit = true;
      }
    }
    if (!hit) {
      scan.ranges[i] = lidar_.max_range;
      scan.no_return[i] = 1;
      continue;
    }
    if (lidar_.sigma > 0.0) {
      range += lidar_.sigma * gauss(rng_lidar_);
    }
    scan.ranges[i] = std::clamp(range, 0.0, lidar_.max_range);
    scan.no_return[i] = 0;
  }
  return scan;
}

void World::check_collision() {
  // Static: any occupied cell center within the footprint disc.
  bool static_hit = false;
  try {
    const FootprintCells fc =
        footprint_cells(Footprint{robot_radius_}, robot_.pose, map_.meta);
    for (const CellIndex& c : fc.cells) {
      if (map_.at(c.cx, c.cy) == Occupancy::Occupied) {
        static_hit = true;
        break;
      }
    }
  } catch (const NavError&) {
    static_hit = false;  // robot outside the map; nothing to hit
  }
  if (static_hit && !in_contact_static_) {
    pending_collision_ = CollisionReport{clock_, CollisionReport::Kind::Static, -1};
  }
  in_contact_static_ = static_hit;

  for (std::size_t k = 0; k < agents_.size(); ++k) {
    const double d = std::hypot(agents_[k].x - robot_.pose.x,
                                agents_[k].y - robot_.pose.y);
    const bool contact = d < robot_radius_ + agents_[k].radius;
    if (contact && !in_contact_agent_[k]) {
      pending_collision_ =
          CollisionReport{clock_, CollisionReport::Kind::Agent, static_cast<int>(k)};
    }
    in_contact_agent_[k] = contact ? 1 : 0;
  }
}

std::optional<CollisionReport> World::poll_collision() {
  auto out = pending_collision_;
  pending_collision_.reset();
  return out;
}

}  // namespace navstack
