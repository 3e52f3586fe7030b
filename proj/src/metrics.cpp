#include "navstack/app/metrics.hpp"

#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace navstack {

std::string to_csv_line(const MetricsRow& row) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%.3f,%.6f,%s,%.6f,%.6f", row.timestamp, row.distance,
                row.recovery_executed.c_str(), row.vel_x, row.vel_theta);
  return buf;
}

std::string to_csv(const std::vector<MetricsRow>& rows) {
  std::ostringstream out;
  out << kMetricsHeader << "\n";
  for (const auto& row : rows) {
    out << to_csv_line(row) << "\n";
  }
  return out.str();
}

RunReport make_report(const std::vector<MetricsRow>& rows,
                      const std::vector<WaypointOutcome>& outcomes) {
  RunReport report;
  if (!rows.empty()) {
    report.total_distance = rows.back().distance;
    report.total_duration = rows.back().timestamp - rows.front().timestamp;
  }
  report.average_speed =
      report.total_duration > 0.0 ? report.total_distance / report.total_duration : 0.0;
  for (const auto& row : rows) {
    if (row.recovery_executed.empty()) continue;
    std::istringstream kinds(row.recovery_executed);
    std::string kind;
    while (std::getline(kinds, kind, ';')) {
      if (kind.empty()) continue;
      ++report.recoveries_by_kind[kind];
      ++report.recoveries_total;
    }
  }
  for (const auto& o : outcomes) {
    if (o == WaypointOutcome::Succeeded) {
      ++report.waypoints_completed;
    } else {
      ++report.waypoints_skipped;
    }
  }
  return report;
}

std::string report_to_json(const RunReport& report) {
  nlohmann::json j;
  j["total_distance_m"] = report.total_distance;
  j["total_duration_s"] = report.total_duration;
  j["average_speed_mps"] = report.average_speed;
  j["recoveries"] = report.recoveries_by_kind;
  j["recoveries_total"] = report.recoveries_total;
  j["waypoints_completed"] = report.waypoints_completed;
  j["waypoints_skipped"] = report.waypoints_skipped;
  j["collisions"] = report.collisions;
  j["control_cycles"] = report.control_cycles;
  j["control_safety_violations"] = report.control_safety_violations;
  j["timed_out"] = report.timed_out;
  j["passed"] = report.passed();
  return j.dump(2) + "\n";
}

std::string report_summary(const RunReport& report) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "distance %.1f m in %.1f s (avg %.3f m/s)\n", report.total_distance,
                report.total_duration, report.average_speed);
  out << buf;
  out << "waypoints: " << report.waypoints_completed << " completed, "
      << report.waypoints_skipped << " skipped\n";
  out << "recoveries: " << report.recoveries_total;
  for (const auto& [kind, count] : report.recoveries_by_kind) {
    out << " " << kind << "=" << count;
  }
  out << "\ncollisions: " << report.collisions << "\n";
  if (report.timed_out) out << "run timed out\n";
  return out.str();
}

}  // namespace navstack
