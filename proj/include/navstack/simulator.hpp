#pragma once

#include <optional>
#include <random>
#include <vector>

#include "navstack/clock.hpp"
#include "navstack/control.hpp"
#include "navstack/costmap.hpp"
#include "navstack/geometry.hpp"
#include "navstack/mcl.hpp"
#include "navstack/sensor.hpp"

namespace navstack {

/// Ground-truth robot state (not observable by the stack).
struct TrueState {
  Pose2D pose;
  Twist twist;
};

/// Non-reactive disc agent patrolling waypoints cyclically.
struct AgentState {
  double x = 0.0, y = 0.0;
  double speed = 0.0;
  double radius = 0.3;
  std::vector<std::pair<double, double>> waypoints;
  std::size_t target = 0;
  double dwell_sec = 0.0;
  double dwell_left = 0.0;  // seconds remaining at the current waypoint
};

struct LidarSpec {
  int beams = 360;
  double fov = 4.71238898038469;  // 270 degrees
  double max_range = 8.0;
  double sigma = 0.01;       // meters
  double mount_height = 0.25;
};

struct CollisionReport {
  SimTime t = 0;
  enum class Kind { Static, Agent } kind = Kind::Static;
  int agent_id = -1;
};

/// Grid raycast (DDA) against occupied cells. Returns the entry distance of
/// the first occupied cell, or max_range when nothing is hit within range.
double raycast_grid(const OccupancyGrid& map, double x0, double y0, double angle,
                    double max_range, bool* hit);

/// Ray-disc intersection distance, or +inf when the ray misses.
double ray_disc(double x0, double y0, double angle, double cx, double cy, double r);

/// Deterministic fixed-step world: differential-drive plant, patrol agents,
/// raycast lidar, odometry corruption, collision latching.
class World {
 public:
  World(OccupancyGrid map, const Pose2D& start, double robot_radius,
        const VelocityLimits& limits, const LidarSpec& lidar,
        const NoiseParams& odom_noise, std::uint64_t seed);

  void add_agent(const AgentState& agent);

  /// Advances one fixed step: acceleration-limited twist tracking, exact arc
  /// integration, agent motion, clock, collision check.
  void step(const Twist& commanded, double dt);

  /// Simulated scan from the true pose (noisy ranges, clamped to range).
  LaserScan lidar();

  /// True pose increment of the last step, corrupted by the odometry noise
  /// model. Accumulate to dead-reckon.
  OdomDelta last_odometry() const { return last_odom_; }

  /// Collision that started this step, if any (latched per contact episode).
  std::optional<CollisionReport> poll_collision();

  const TrueState& robot() const { return robot_; }
  const std::vector<AgentState>& agents() const { return agents_; }
  const OccupancyGrid& map() const { return map_; }
  SimTime clock() const { return clock_; }
  const LidarSpec& lidar_spec() const { return lidar_; }

 private:
  void step_agents(double dt);
  void check_collision();

  OccupancyGrid map_;
  TrueState robot_;
  double robot_radius_;
  VelocityLimits limits_;
  LidarSpec lidar_;
  NoiseParams odom_noise_;
  std::vector<AgentState> agents_;
  SimTime clock_ = 0;
  std::mt19937_64 rng_lidar_;
  std::mt19937_64 rng_odom_;
  OdomDelta last_odom_;
  std::optional<CollisionReport> pending_collision_;
  bool in_contact_static_ = false;
  std::vector<std::uint8_t> in_contact_agent_;
};

}  // namespace navstack
