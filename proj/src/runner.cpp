#include "navstack/app/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "navstack/app/map_io.hpp"

namespace navstack {

std::string default_tree_xml(double spin_target_yaw, double wait_duration) {
  std::ostringstream xml;
  xml << "<Root>\n"
      << "  <Fallback>\n"
      << "    <ReactiveSequence>\n"
      << "      <RateController hz=\"1.0\">\n"
      << "        <Fallback>\n"
      << "          <ComputePathToPose/>\n"
      << "          <ClearCostmap scope=\"global\"/>\n"
      << "        </Fallback>\n"
      << "      </RateController>\n"
      << "      <Fallback>\n"
      << "        <FollowPath/>\n"
      << "        <ClearCostmap scope=\"local\"/>\n"
      << "      </Fallback>\n"
      << "    </ReactiveSequence>\n"
      << "    <RoundRobin>\n"
      << "      <ClearCostmap scope=\"both\"/>\n"
      << "      <Spin target_yaw=\"" << spin_target_yaw << "\"/>\n"
      << "      <Wait duration=\"" << wait_duration << "\"/>\n"
      << "    </RoundRobin>\n"
      << "  </Fallback>\n"
      << "</Root>\n";
  return xml.str();
}

/// Hosts the tree: the XML is parsed and the navigator allocated on
/// configure, released on cleanup.
struct ScenarioRunner::BtNavigatorServer : ManagedServer {
  BtNavigatorServer(std::string name, std::string xml, ActionRegistry registry,
                    std::shared_ptr<Blackboard> bb, NavigatorParams params)
      : ManagedServer(std::move(name)),
        xml_(std::move(xml)),
        registry_(std::move(registry)),
        blackboard_(std::move(bb)),
        params_(params) {}

  bool on_configure() override {
    try {
      navigator = std::make_unique<Navigator>(parse_tree(xml_, registry_), blackboard_,
                                              params_);
    } catch (const NavError&) {
      return false;
    }
    return true;
  }

  bool on_cleanup() override {
    navigator.reset();
    return true;
  }

  bool on_shutdown() override {
    navigator.reset();
    return true;
  }

  std::unique_ptr<Navigator> navigator;

 private:
  std::string xml_;
  ActionRegistry registry_;
  std::shared_ptr<Blackboard> blackboard_;
  NavigatorParams params_;
};

ScenarioRunner::ScenarioRunner(ScenarioConfig config, Options options)
    : cfg_(std::move(config)), opts_(std::move(options)) {
  if (opts_.seed) cfg_.seed = *opts_.seed;
  if (opts_.max_sim_time) cfg_.max_sim_time = *opts_.max_sim_time;
  cfg_.controller.limits = cfg_.limits;
  cfg_.controller.footprint.radius = cfg_.footprint_radius;
  cfg_.controller.control_period = cfg_.navigator.tick_period;
  cfg_.controller.audit = opts_.audit;
}

ScenarioRunner::~ScenarioRunner() = default;

void ScenarioRunner::build() {
  map_ = std::make_shared<OccupancyGrid>(load_map(cfg_.map_pgm, cfg_.map_meta));
  world_ = std::make_unique<World>(*map_, cfg_.start, cfg_.footprint_radius, cfg_.limits,
                                   cfg_.lidar, cfg_.odom_noise, cfg_.seed);
  for (const AgentSpec& spec : cfg_.agents) {
    AgentState agent;
    agent.x = spec.x;
    agent.y = spec.y;
    agent.speed = spec.speed;
    agent.radius = spec.radius;
    agent.dwell_sec = spec.dwell_sec;
    agent.waypoints = spec.waypoints;
    world_->add_agent(agent);
  }

  mcl_ = std::make_unique<MclFilter>(*map_, cfg_.amcl, cfg_.seed);
  mcl_->init_gaussian(cfg_.initial_pose, cfg_.initial_xy_spread, cfg_.initial_yaw_spread);
  odom_pose_ = cfg_.initial_pose;

  planner_ = std::make_unique<PlannerServer>("planner_server", map_, cfg_.global_costmap);
  planner_->register_plugin("astar", std::make_unique<AStarPlanner>(cfg_.planner));

  controller_ = std::make_unique<ControllerServer>("controller_server", map_,
                                                   cfg_.local_window, cfg_.local_costmap,
                                                   cfg_.controller);
  controller_->set_command_sink([this](const Twist& t) { command_ = t; });

  RecoveryServer::Hooks hooks;
  hooks.clear_costmaps = [this](ClearScope scope) {
    if (scope == ClearScope::Global || scope == ClearScope::Both) planner_->clear_costmap();
    if (scope == ClearScope::Local || scope == ClearScope::Both) controller_->clear_costmap();
  };
  hooks.command = [this](const Twist& t) { command_ = t; };
  hooks.accumulated_yaw = [this]() { return odom_yaw_accum_; };
  recovery_ = std::make_unique<RecoveryServer>("recovery_server", hooks, cfg_.recovery);

  blackboard_ = std::make_shared<Blackboard>();
  ServerBindings bindings{planner_.get(), controller_.get(), recovery_.get()};
  std::string xml;
  const std::string bt_path = !opts_.bt_override.empty() ? opts_.bt_override : cfg_.bt_xml;
  if (!bt_path.empty()) {
    std::ifstream in(bt_path);
    if (!in) {
      throw NavError(ErrorCode::ConfigError, "cannot open behavior tree " + bt_path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    xml = buf.str();
  } else {
    xml = default_tree_xml(cfg_.spin_target_yaw, cfg_.wait_duration);
  }
  bt_server_ = std::make_unique<BtNavigatorServer>("bt_navigator", xml,
                                                   make_navigation_registry(bindings),
                                                   blackboard_, cfg_.navigator);

  lifecycle_.add(planner_.get());
  lifecycle_.add(controller_.get());
  lifecycle_.add(recovery_.get());
  lifecycle_.add(bt_server_.get());
  if (!opts_.quiet) {
    lifecycle_.set_logger([](const std::string& line) {
      std::cerr << "[lifecycle] " << line << "\n";
    });
  }
}

void ScenarioRunner::prime(SimTime t) {
  scan_ = world_->lidar();
  have_scan_ = true;
  const Pose2D est = mcl_->pose();
  const SensorBatch batch{scan_to_points(scan_, est, cfg_.lidar.mount_height)};
  planner_->update_costmap(est, batch, t);
  controller_->update_costmap(est, batch, t);
}

void ScenarioRunner::log_row(SimTime t) {
  MetricsRow row;
  row.timestamp = to_seconds(t);
  row.distance = odom_distance_;
  row.vel_x = world_->robot().twist.vx;
  row.vel_theta = world_->robot().twist.wz;
  std::string kinds;
  const auto& records = recovery_->records();
  for (std::size_t i = recovery_log_cursor_; i < records.size(); ++i) {
    if (records[i].outcome != RecoveryOutcome::Success) continue;
    if (!kinds.empty()) kinds += ";";
    kinds += to_string(records[i].kind);
  }
  recovery_log_cursor_ = records.size();
  row.recovery_executed = std::move(kinds);
  rows_.push_back(std::move(row));
}

void ScenarioRunner::bt_cycle(SimTime t) {
  Navigator* nav = bt_server_->navigator.get();
  if (nav == nullptr || !bt_server_->is_active()) {
    return;
  }
  const std::size_t total =
      static_cast<std::size_t>(cfg_.laps) * cfg_.route.size();
  blackboard_->set(bb::kPose, mcl_->pose());
  blackboard_->set(bb::kTwist, world_->robot().twist);

  if (!nav->active()) {
    if (waypoint_cursor_ >= total) {
      return;
    }
    goal_occupied_accum_ = 0;
    const Pose2D goal = cfg_.route[waypoint_cursor_ % cfg_.route.size()];
    if (!nav->begin(goal, t)) {
      outcomes_.push_back(WaypointOutcome::Skipped);  // goal outside the map
      ++waypoint_cursor_;
      return;
    }
  }

  // Goal-occupancy watchdog: time spent with the goal pose pinned by an
  // obstacle accumulates (clearing the costmap buys a blind plan or two,
  // which must not reset the clock); past the timeout the waypoint is
  // skipped so the route can continue.
  if (blackboard_->has(bb::kGoalOccupiedSince)) {
    goal_occupied_accum_ += from_seconds(cfg_.navigator.tick_period);
    if (goal_occupied_accum_ >= from_seconds(cfg_.waypoint_occupied_timeout)) {
      nav->cancel(t);
      outcomes_.push_back(WaypointOutcome::Skipped);
      ++waypoint_cursor_;
      goal_occupied_accum_ = 0;
      return;
    }
  }

  const Navigator::Step step = nav->tick(t);
  if (std::getenv("NAVSTACK_DEBUG") && t % 500000 == 0) {
    std::cerr << "t=" << to_seconds(t) << " root=" << to_string(nav->root()->status())
              << " plans=" << blackboard_->get_or<std::uint64_t>(bb::kPlanSuccesses, 0)
              << " recov=" << blackboard_->get_or<std::uint64_t>(bb::kRecoveries, 0)
              << " path=" << (blackboard_->has(bb::kPath) ? 1 : 0)
              << " cmd=(" << command_.vx << "," << command_.wz << ")"
              << " gvox=" << (planner_->voxel_store() ? planner_->voxel_store()->size() : 0)
              << " gseal=" << (planner_->snapshot()
                                   ? int(planner_->snapshot()->at_unchecked(77, 40))
                                   : -1)
              << " lfail=" << to_string(planner_->last_failure())
              << " pose=(" << world_->robot().pose.x << "," << world_->robot().pose.y
              << ")\n";
  }
  if (step == Navigator::Step::Succeeded) {
    outcomes_.push_back(WaypointOutcome::Succeeded);
    ++waypoint_cursor_;
  } else if (step == Navigator::Step::Aborted) {
    outcomes_.push_back(WaypointOutcome::Skipped);
    ++waypoint_cursor_;
  }
}

RunReport ScenarioRunner::run() {
  build();
  if (auto failed = lifecycle_.startup()) {
    throw NavError(ErrorCode::BringupFailed, *failed);
  }

  const SimTime dt_us = from_seconds(cfg_.sim_dt);
  const SimTime lidar_period =
      std::max<SimTime>(dt_us, from_seconds(1.0 / cfg_.lidar_rate_hz));
  const SimTime local_period = std::max<SimTime>(dt_us, from_seconds(0.1));
  const SimTime global_period = std::max<SimTime>(dt_us, from_seconds(1.0));
  const SimTime bt_period = std::max<SimTime>(dt_us, from_seconds(cfg_.navigator.tick_period));
  const SimTime log_period = from_seconds(1.0);
  const SimTime end_time = from_seconds(cfg_.max_sim_time);
  const std::size_t total_waypoints =
      static_cast<std::size_t>(cfg_.laps) * cfg_.route.size();

  prime(0);
  log_row(0);
  if (!opts_.trace_path.empty()) {
    trace_ = "t,x,y,theta,vx,wz\n";
  }

  while (waypoint_cursor_ < total_waypoints) {
    if (world_->clock() >= end_time) {
      timed_out_ = true;
      break;
    }
    world_->step(command_, cfg_.sim_dt);
    const SimTime t = world_->clock();

    const OdomDelta odom = world_->last_odometry();
    odom_pose_ = apply_delta(odom_pose_, odom);
    odom_distance_ += std::abs(odom.trans);
    odom_yaw_accum_ += std::abs(normalize_angle(odom.rot1 + odom.rot2));
    mcl_->on_odometry(odom);

    if (auto collision = world_->poll_collision()) {
      ++collisions_;
      std::cerr << "collision at t=" << to_seconds(t) << " ("
                << (collision->kind == CollisionReport::Kind::Static ? "static"
                                                                     : "agent")
                << " " << collision->agent_id << ") robot at ("
                << world_->robot().pose.x << ", " << world_->robot().pose.y << ")\n";
      break;  // a contact ends the run
    }

    if (t % lidar_period == 0) {
      scan_ = world_->lidar();
      have_scan_ = true;
    }
    if (have_scan_) {
      mcl_->maybe_update(scan_);
    }

    const Pose2D est = mcl_->pose();
    if (t % global_period == 0 || t % local_period == 0) {
      const SensorBatch batch{scan_to_points(scan_, est, cfg_.lidar.mount_height)};
      if (t % global_period == 0) planner_->update_costmap(est, batch, t);
      if (t % local_period == 0) controller_->update_costmap(est, batch, t);
    }

    if (t % bt_period == 0) {
      bt_cycle(t);
    }
    if (t % log_period == 0) {
      log_row(t);
    }
    if (!opts_.trace_path.empty()) {
      char buf[200];
      const TrueState& rs = world_->robot();
      std::snprintf(buf, sizeof(buf), "%.6f,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                    to_seconds(t), rs.pose.x, rs.pose.y, rs.pose.theta, rs.twist.vx,
                    rs.twist.wz);
      trace_ += buf;
    }
  }

  if (!opts_.dump_costmaps_dir.empty()) {
    std::filesystem::create_directories(opts_.dump_costmaps_dir);
    if (auto snap = planner_->snapshot()) {
      write_costmap_pgm(*snap, opts_.dump_costmaps_dir + "/global.pgm");
    }
    if (auto snap = controller_->snapshot()) {
      write_costmap_pgm(*snap, opts_.dump_costmaps_dir + "/local.pgm");
    }
  }

  lifecycle_.shutdown();

  RunReport report = make_report(rows_, outcomes_);
  report.collisions = collisions_;
  report.timed_out = timed_out_;
  report.control_cycles = controller_->control_cycles();
  report.control_safety_violations = controller_->audit_violations();

  if (!opts_.log_csv_path.empty()) {
    std::ofstream out(opts_.log_csv_path);
    out << csv();
  }
  if (!opts_.report_path.empty()) {
    std::ofstream out(opts_.report_path);
    out << report_to_json(report);
  }
  if (!opts_.trace_path.empty()) {
    std::ofstream out(opts_.trace_path);
    out << trace_;
  }
  return report;
}

}  // namespace navstack
