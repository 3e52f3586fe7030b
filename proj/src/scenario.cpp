#include "navstack/app/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <filesystem>

namespace navstack {

namespace {

Pose2D pose_from(const YAML::Node& node) {
  if (!node.IsSequence() || node.size() < 2) {
    throw NavError(ErrorCode::ConfigError, "pose must be [x, y, theta]");
  }
  return Pose2D(node[0].as<double>(), node[1].as<double>(),
                node.size() > 2 ? node[2].as<double>() : 0.0);
}

std::string resolve(const std::filesystem::path& base, const std::string& rel) {
  std::filesystem::path p(rel);
  if (p.is_absolute()) return rel;
  return (base / p).string();
}

void read_costmap(const YAML::Node& node, CostmapParams& params) {
  if (!node) return;
  if (node["inscribed_radius"]) params.inscribed_radius = node["inscribed_radius"].as<double>();
  if (node["inflation_radius"]) params.inflation_radius = node["inflation_radius"].as<double>();
  if (node["cost_scaling"]) params.cost_scaling = node["cost_scaling"].as<double>();
  if (node["voxel_size"]) params.voxel_size = node["voxel_size"].as<double>();
  if (node["decay_sec"]) params.decay_sec = node["decay_sec"].as<double>();
  if (node["z_min"]) params.z_min = node["z_min"].as<double>();
  if (node["z_max"]) params.z_max = node["z_max"].as<double>();
}

}  // namespace

ScenarioConfig load_scenario(const std::string& path) {
  YAML::Node doc;
  try {
    doc = YAML::LoadFile(path);
  } catch (const YAML::Exception& e) {
    throw NavError(ErrorCode::ConfigError, std::string("scenario: ") + e.what());
  }
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  ScenarioConfig cfg;
  try {
    if (!doc["map"] || !doc["map"]["pgm"] || !doc["map"]["meta"]) {
      throw NavError(ErrorCode::ConfigError, "scenario requires map.pgm and map.meta");
    }
    cfg.map_pgm = resolve(base, doc["map"]["pgm"].as<std::string>());
    cfg.map_meta = resolve(base, doc["map"]["meta"].as<std::string>());
    if (doc["bt"]) cfg.bt_xml = resolve(base, doc["bt"].as<std::string>());

    if (!doc["start"]) throw NavError(ErrorCode::ConfigError, "scenario requires start");
    cfg.start = pose_from(doc["start"]);
    if (doc["footprint_radius"]) cfg.footprint_radius = doc["footprint_radius"].as<double>();
    if (cfg.footprint_radius <= 0.0) {
      throw NavError(ErrorCode::ConfigError, "footprint_radius must be positive");
    }

    if (!doc["route"] || !doc["route"].IsSequence() || doc["route"].size() == 0) {
      throw NavError(ErrorCode::ConfigError, "route must be a non-empty list");
    }
    for (const auto& wp : doc["route"]) cfg.route.push_back(pose_from(wp));
    if (doc["laps"]) cfg.laps = doc["laps"].as<int>();
    if (cfg.laps < 1) throw NavError(ErrorCode::ConfigError, "laps must be >= 1");

    if (doc["seed"]) cfg.seed = doc["seed"].as<std::uint64_t>();
    if (doc["sim_dt"]) cfg.sim_dt = doc["sim_dt"].as<double>();
    if (doc["lidar_rate_hz"]) cfg.lidar_rate_hz = doc["lidar_rate_hz"].as<double>();
    if (doc["max_sim_time"]) cfg.max_sim_time = doc["max_sim_time"].as<double>();
    if (doc["waypoint_occupied_timeout"]) {
      cfg.waypoint_occupied_timeout = doc["waypoint_occupied_timeout"].as<double>();
    }

    if (const auto& n = doc["limits"]) {
      if (n["vx_max"]) cfg.limits.vx_max = n["vx_max"].as<double>();
      if (n["wz_max"]) cfg.limits.wz_max = n["wz_max"].as<double>();
      if (n["ax"]) cfg.limits.ax = n["ax"].as<double>();
      if (n["aw"]) cfg.limits.aw = n["aw"].as<double>();
    }
    if (const auto& n = doc["lidar"]) {
      if (n["beams"]) cfg.lidar.beams = n["beams"].as<int>();
      if (n["fov_deg"]) cfg.lidar.fov = n["fov_deg"].as<double>() * M_PI / 180.0;
      if (n["max_range"]) cfg.lidar.max_range = n["max_range"].as<double>();
      if (n["sigma"]) cfg.lidar.sigma = n["sigma"].as<double>();
      if (n["mount_height"]) cfg.lidar.mount_height = n["mount_height"].as<double>();
    }
    if (const auto& n = doc["odom_noise"]) {
      cfg.odom_noise = NoiseParams{n[0].as<double>(), n[1].as<double>(),
                                   n[2].as<double>(), n[3].as<double>()};
    }

    read_costmap(doc["global_costmap"], cfg.global_costmap);
    read_costmap(doc["local_costmap"], cfg.local_costmap);
    if (doc["local_window"]) cfg.local_window = doc["local_window"].as<double>();

    if (const auto& n = doc["planner_server"]) {
      if (n["cost_weight"]) cfg.planner.cost_weight = n["cost_weight"].as<double>();
    }
    if (const auto& n = doc["controller_server"]) {
      if (const auto& w = n["weights"]) {
        if (w["obstacle"]) cfg.controller.weights.obstacle = w["obstacle"].as<double>();
        if (w["path"]) cfg.controller.weights.path = w["path"].as<double>();
        if (w["goal"]) cfg.controller.weights.goal = w["goal"].as<double>();
        if (w["speed"]) cfg.controller.weights.speed = w["speed"].as<double>();
      }
      if (n["xy_tol"]) cfg.controller.tolerances.xy = n["xy_tol"].as<double>();
      if (n["yaw_tol"]) cfg.controller.tolerances.yaw = n["yaw_tol"].as<double>();
      if (n["sim_time"]) cfg.controller.sim_time = n["sim_time"].as<double>();
      if (n["sim_dt"]) cfg.controller.sim_dt = n["sim_dt"].as<double>();
      if (n["n_vx"]) cfg.controller.n_vx = n["n_vx"].as<int>();
      if (n["n_wz"]) cfg.controller.n_wz = n["n_wz"].as<int>();
      if (n["lookahead"]) cfg.controller.lookahead = n["lookahead"].as<double>();
      if (n["rotate_wz"]) cfg.controller.rotate_wz = n["rotate_wz"].as<double>();
    }
    if (const auto& n = doc["amcl"]) {
      if (n["particles"]) cfg.amcl.particle_count = n["particles"].as<int>();
      if (const auto& a = n["noise"]) {
        cfg.amcl.noise = NoiseParams{a[0].as<double>(), a[1].as<double>(),
                                     a[2].as<double>(), a[3].as<double>()};
      }
      if (n["z_hit"]) cfg.amcl.z_hit = n["z_hit"].as<double>();
      if (n["z_rand"]) cfg.amcl.z_rand = n["z_rand"].as<double>();
      if (n["sigma_hit"]) cfg.amcl.sigma_hit = n["sigma_hit"].as<double>();
      if (n["max_dist"]) cfg.amcl.max_dist = n["max_dist"].as<double>();
      if (n["beam_subsample"]) cfg.amcl.beam_subsample = n["beam_subsample"].as<int>();
      if (n["update_min_trans"]) cfg.amcl.update_min_trans = n["update_min_trans"].as<double>();
      if (n["update_min_rot"]) cfg.amcl.update_min_rot = n["update_min_rot"].as<double>();
    }
    cfg.initial_pose = doc["initial_pose"] ? pose_from(doc["initial_pose"]) : cfg.start;
    if (const auto& n = doc["initial_spread"]) {
      if (n["xy"]) cfg.initial_xy_spread = n["xy"].as<double>();
      if (n["yaw"]) cfg.initial_yaw_spread = n["yaw"].as<double>();
    }

    if (const auto& n = doc["recovery_server"]) {
      if (n["spin_wz"]) cfg.recovery.spin_wz = n["spin_wz"].as<double>();
      if (n["clear_throttle_sec"]) cfg.recovery.clear_throttle_sec = n["clear_throttle_sec"].as<double>();
      if (n["spin_target_yaw"]) cfg.spin_target_yaw = n["spin_target_yaw"].as<double>();
      if (n["wait_duration"]) cfg.wait_duration = n["wait_duration"].as<double>();
    }
    if (const auto& n = doc["navigator"]) {
      if (n["tick_period"]) cfg.navigator.tick_period = n["tick_period"].as<double>();
      if (n["max_recovery_rounds"]) {
        cfg.navigator.max_recovery_rounds = n["max_recovery_rounds"].as<int>();
      }
    }

    if (const auto& n = doc["agents"]) {
      for (const auto& a : n) {
        AgentSpec spec;
        spec.x = a["x"].as<double>();
        spec.y = a["y"].as<double>();
        if (a["speed"]) spec.speed = a["speed"].as<double>();
        if (a["radius"]) spec.radius = a["radius"].as<double>();
        if (a["dwell"]) spec.dwell_sec = a["dwell"].as<double>();
        if (const auto& wps = a["waypoints"]) {
          for (const auto& wp : wps) {
            spec.waypoints.emplace_back(wp[0].as<double>(), wp[1].as<double>());
          }
        }
        if (spec.radius <= 0.0 || spec.speed < 0.0) {
          throw NavError(ErrorCode::ConfigError, "agent radius/speed out of range");
        }
        cfg.agents.push_back(std::move(spec));
      }
    }
  } catch (const YAML::Exception& e) {
    throw NavError(ErrorCode::ConfigError, std::string("scenario: ") + e.what());
  }
  if (cfg.sim_dt <= 0.0) {
    throw NavError(ErrorCode::ConfigError, "sim_dt must be positive");
  }
  return cfg;
}

}  // namespace navstack
