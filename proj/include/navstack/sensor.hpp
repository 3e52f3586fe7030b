#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "navstack/geometry.hpp"

namespace navstack {

/// One planar range scan. Beam i points at heading
/// robot.theta + beam_angle(i); beams sweep the field of view symmetrically
/// around the robot's forward axis.
struct LaserScan {
  double fov = 0.0;        // radians covered by the sweep
  double max_range = 0.0;  // meters
  std::vector<double> ranges;
  std::vector<std::uint8_t> no_return;  // 1 when the beam hit nothing

  int beam_count() const { return static_cast<int>(ranges.size()); }
  double beam_angle(int i) const {
    const int n = beam_count();
    if (n <= 1) return 0.0;
    return fov * (static_cast<double>(i) / (n - 1) - 0.5);
  }
};

/// World-frame 3D points, the costmap's input currency.
struct PointCloud {
  std::vector<std::array<double, 3>> points;
};

/// Projects scan returns to world-frame points at the sensor mount height,
/// using `pose` as the scan frame. No-return beams are skipped.
PointCloud scan_to_points(const LaserScan& scan, const Pose2D& pose,
                          double mount_height);

}  // namespace navstack
