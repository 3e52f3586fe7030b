#include "navstack/geometry.hpp"

#include <cmath>

namespace navstack {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::MetaMismatch: return "MetaMismatch";
    case ErrorCode::PoseOutOfMap: return "PoseOutOfMap";
    case ErrorCode::MapParseError: return "MapParseError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownAction: return "UnknownAction";
    case ErrorCode::IllegalTransition: return "IllegalTransition";
    case ErrorCode::TransitionFailed: return "TransitionFailed";
    case ErrorCode::BringupFailed: return "BringupFailed";
    case ErrorCode::ServerUnavailable: return "ServerUnavailable";
    case ErrorCode::RejectedGoal: return "RejectedGoal";
    case ErrorCode::BusyRejected: return "BusyRejected";
  }
  return "UnknownError";
}

Pose2D::Pose2D(double x_, double y_, double theta_)
    : x(x_), y(y_), theta(normalize_angle(theta_)) {}

double normalize_angle(double theta) {
  if (!std::isfinite(theta)) {
    throw NavError(ErrorCode::InvalidInput, "angle must be finite");
  }
  double r = std::remainder(theta, 2.0 * M_PI);
  if (r <= -M_PI) {
    r += 2.0 * M_PI;
  }
  return r;
}

Pose2D compose(const Pose2D& base, const Pose2D& delta) {
  const double c = std::cos(base.theta);
  const double s = std::sin(base.theta);
  return Pose2D(base.x + delta.x * c - delta.y * s,
                base.y + delta.x * s + delta.y * c,
                base.theta + delta.theta);
}

Pose2D inverse(const Pose2D& p) {
  const double c = std::cos(p.theta);
  const double s = std::sin(p.theta);
  return Pose2D(-p.x * c - p.y * s, p.x * s - p.y * c, -p.theta);
}

CellIndex world_to_cell(const GridMeta& meta, double x, double y) {
  const int cx = static_cast<int>(std::floor((x - meta.origin.x) / meta.resolution));
  const int cy = static_cast<int>(std::floor((y - meta.origin.y) / meta.resolution));
  if (!meta.contains(cx, cy)) {
    throw NavError(ErrorCode::OutOfBounds, "point outside grid");
  }
  return CellIndex{cx, cy};
}

std::pair<double, double> cell_to_world(const GridMeta& meta, const CellIndex& cell) {
  if (!meta.contains(cell)) {
    throw NavError(ErrorCode::OutOfBounds, "cell outside grid");
  }
  return {meta.origin.x + (cell.cx + 0.5) * meta.resolution,
          meta.origin.y + (cell.cy + 0.5) * meta.resolution};
}

FootprintCells footprint_cells(const Footprint& fp, const Pose2D& pose,
                               const GridMeta& meta) {
  FootprintCells out;
  const double r = fp.radius;
  const int lo_x = static_cast<int>(std::floor((pose.x - r - meta.origin.x) / meta.resolution));
  const int hi_x = static_cast<int>(std::floor((pose.x + r - meta.origin.x) / meta.resolution));
  const int lo_y = static_cast<int>(std::floor((pose.y - r - meta.origin.y) / meta.resolution));
  const int hi_y = static_cast<int>(std::floor((pose.y + r - meta.origin.y) / meta.resolution));
  const double r2 = r * r;
  for (int cy = lo_y; cy <= hi_y; ++cy) {
    for (int cx = lo_x; cx <= hi_x; ++cx) {
      const double px = meta.origin.x + (cx + 0.5) * meta.resolution;
      const double py = meta.origin.y + (cy + 0.5) * meta.resolution;
      const double dx = px - pose.x;
      const double dy = py - pose.y;
      if (dx * dx + dy * dy <= r2) {
        if (meta.contains(cx, cy)) {
          out.cells.push_back(CellIndex{cx, cy});
        } else {
          out.truncated = true;
        }
      }
    }
  }
  return out;
}

}  // namespace navstack
