#include "navstack/sensor.hpp"

#include <cmath>

namespace navstack {

PointCloud scan_to_points(const LaserScan& scan, const Pose2D& pose,
                          double mount_height) {
  PointCloud cloud;
  cloud.points.reserve(scan.ranges.size());
  for (int i = 0; i < scan.beam_count(); ++i) {
    if (!scan.no_return.empty() && scan.no_return[i]) {
      continue;
    }
    const double a = pose.theta + scan.beam_angle(i);
    const double r = scan.ranges[i];
    cloud.points.push_back({pose.x + r * std::cos(a), pose.y + r * std::sin(a),
                            mount_height});
  }
  return cloud;
}

}  // namespace navstack
