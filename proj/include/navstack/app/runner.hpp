#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "navstack/app/metrics.hpp"
#include "navstack/app/scenario.hpp"
#include "navstack/bt.hpp"
#include "navstack/bt_actions.hpp"
#include "navstack/lifecycle.hpp"
#include "navstack/simulator.hpp"

namespace navstack {

/// The built-in tree: 1 Hz gated planning with a contextual global clear,
/// path following with a contextual local clear, and a round-robin recovery
/// ladder (clear both, spin, wait).
std::string default_tree_xml(double spin_target_yaw = 1.57, double wait_duration = 5.0);

/// Drives the whole experiment protocol in one deterministic event loop:
/// sim step, sensors, localization, costmaps, behavior tree, logging.
class ScenarioRunner {
 public:
  struct Options {
    std::optional<std::uint64_t> seed;
    std::string bt_override;
    std::string log_csv_path;
    std::string report_path;
    std::string trace_path;
    std::string dump_costmaps_dir;
    bool audit = false;
    std::optional<double> max_sim_time;
    bool quiet = true;
  };

  ScenarioRunner(ScenarioConfig config, Options options);
  ~ScenarioRunner();

  /// load map -> build servers -> lifecycle startup -> follow waypoints ->
  /// lifecycle shutdown -> report.
  RunReport run();

  const std::vector<MetricsRow>& rows() const { return rows_; }
  const std::vector<WaypointOutcome>& outcomes() const { return outcomes_; }
  std::string csv() const { return to_csv(rows_); }
  const RecoveryServer* recovery_server() const { return recovery_.get(); }
  const ControllerServer* controller_server() const { return controller_.get(); }
  const LifecycleManager& lifecycle() const { return lifecycle_; }

 private:
  struct BtNavigatorServer;

  void build();
  void prime(SimTime t);
  void bt_cycle(SimTime t);
  void log_row(SimTime t);

  ScenarioConfig cfg_;
  Options opts_;

  std::shared_ptr<const OccupancyGrid> map_;
  std::unique_ptr<World> world_;
  std::unique_ptr<MclFilter> mcl_;
  std::unique_ptr<PlannerServer> planner_;
  std::unique_ptr<ControllerServer> controller_;
  std::unique_ptr<RecoveryServer> recovery_;
  std::unique_ptr<BtNavigatorServer> bt_server_;
  LifecycleManager lifecycle_;
  std::shared_ptr<Blackboard> blackboard_;

  // Plant command and odometric dead reckoning.
  Twist command_;
  Pose2D odom_pose_;
  double odom_distance_ = 0.0;
  double odom_yaw_accum_ = 0.0;
  LaserScan scan_;
  bool have_scan_ = false;

  // Waypoint progression.
  std::size_t waypoint_cursor_ = 0;  // over laps * route.size()
  SimTime goal_occupied_accum_ = 0;
  std::vector<WaypointOutcome> outcomes_;
  int collisions_ = 0;
  bool timed_out_ = false;

  std::vector<MetricsRow> rows_;
  std::size_t recovery_log_cursor_ = 0;
  std::string trace_;
};

}  // namespace navstack
