#pragma once

#include <string>
#include <vector>

#include "navstack/bt.hpp"
#include "navstack/control.hpp"
#include "navstack/costmap.hpp"
#include "navstack/mcl.hpp"
#include "navstack/recovery.hpp"
#include "navstack/simulator.hpp"

namespace navstack {

struct AgentSpec {
  double x = 0.0, y = 0.0;
  double speed = 0.5;
  double radius = 0.3;
  double dwell_sec = 0.0;
  std::vector<std::pair<double, double>> waypoints;
};

/// Everything one run needs, loaded from a YAML scenario file. Relative
/// paths resolve against the scenario file's directory.
struct ScenarioConfig {
  std::string map_pgm;
  std::string map_meta;
  std::string bt_xml;  // empty -> built-in default tree

  Pose2D start;
  double footprint_radius = 0.22;

  std::vector<Pose2D> route;  // waypoints of one lap
  int laps = 1;

  std::uint64_t seed = 1;
  double sim_dt = 0.05;
  double lidar_rate_hz = 10.0;
  double max_sim_time = 3600.0;
  double waypoint_occupied_timeout = 30.0;

  VelocityLimits limits;
  LidarSpec lidar;
  NoiseParams odom_noise{0.02, 0.005, 0.01, 0.002};

  CostmapParams global_costmap;
  CostmapParams local_costmap;
  double local_window = 4.0;

  AStarParams planner;
  ControllerParams controller;
  MclParams amcl;
  Pose2D initial_pose;
  double initial_xy_spread = 0.1;
  double initial_yaw_spread = 0.1;

  RecoveryServer::Params recovery{0.5, 10.0};
  double spin_target_yaw = 1.57;
  double wait_duration = 5.0;

  NavigatorParams navigator;

  std::vector<AgentSpec> agents;
};

/// Parses a scenario YAML. Throws NavError(ConfigError) on malformed or
/// inconsistent content.
ScenarioConfig load_scenario(const std::string& path);

}  // namespace navstack
