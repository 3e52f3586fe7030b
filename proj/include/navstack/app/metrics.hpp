#pragma once

#include <map>
#include <string>
#include <vector>

#include "navstack/clock.hpp"

namespace navstack {

/// One once-a-second log row; schema mirrors the run log exactly:
/// timestamp,distance,recovery_executed,vel_x,vel_theta
struct MetricsRow {
  double timestamp = 0.0;          // seconds
  double distance = 0.0;           // cumulative odometric meters
  std::string recovery_executed;   // kinds completed since the previous row
  double vel_x = 0.0;
  double vel_theta = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "timestamp,distance,recovery_executed,vel_x,vel_theta";

std::string to_csv_line(const MetricsRow& row);
std::string to_csv(const std::vector<MetricsRow>& rows);

enum class WaypointOutcome { Succeeded, Skipped };

struct RunReport {
  double total_distance = 0.0;
  double total_duration = 0.0;
  double average_speed = 0.0;
  std::map<std::string, std::uint64_t> recoveries_by_kind;
  std::uint64_t recoveries_total = 0;
  int waypoints_completed = 0;
  int waypoints_skipped = 0;
  int collisions = 0;
  std::uint64_t control_cycles = 0;
  std::uint64_t control_safety_violations = 0;
  bool timed_out = false;

  bool passed() const { return collisions == 0 && waypoints_completed > 0 && !timed_out; }
};

/// Aggregates rows and waypoint outcomes into the run report.
RunReport make_report(const std::vector<MetricsRow>& rows,
                      const std::vector<WaypointOutcome>& outcomes);

std::string report_to_json(const RunReport& report);
std::string report_summary(const RunReport& report);

}  // namespace navstack
