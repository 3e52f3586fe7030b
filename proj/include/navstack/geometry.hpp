#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "navstack/error.hpp"

namespace navstack {

/// Planar pose. theta is kept in (-pi, pi] by every constructor and
/// operation in this module.
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Pose2D() = default;
  Pose2D(double x_, double y_, double theta_);
};

/// Commanded or measured body velocity: forward speed and yaw rate.
struct Twist {
  double vx = 0.0;
  double wz = 0.0;
};

struct CellIndex {
  int cx = 0;
  int cy = 0;

  bool operator==(const CellIndex& o) const { return cx == o.cx && cy == o.cy; }
  bool operator<(const CellIndex& o) const {
    return cy != o.cy ? cy < o.cy : cx < o.cx;
  }
};

/// Grid geometry shared by the map, costmaps and likelihood field.
/// origin is the world pose of the corner of cell (0,0); origin.theta is 0.
struct GridMeta {
  double resolution = 0.05;
  Pose2D origin;
  int width = 0;
  int height = 0;

  bool valid() const { return resolution > 0.0 && width > 0 && height > 0; }
  bool contains(int cx, int cy) const {
    return cx >= 0 && cy >= 0 && cx < width && cy < height;
  }
  bool contains(const CellIndex& c) const { return contains(c.cx, c.cy); }
  std::size_t index(int cx, int cy) const {
    return static_cast<std::size_t>(cy) * width + cx;
  }
  std::size_t size() const { return static_cast<std::size_t>(width) * height; }
};

/// Circular collision footprint.
struct Footprint {
  double radius = 0.1;
};

/// Wraps an angle into (-pi, pi]. Throws NavError(InvalidInput) on
/// non-finite input.
double normalize_angle(double theta);

/// SE(2) composition: applies delta in base's frame.
Pose2D compose(const Pose2D& base, const Pose2D& delta);

/// Analytic SE(2) inverse: compose(p, inverse(p)) is the identity.
Pose2D inverse(const Pose2D& p);

/// Cell containing a world point, floor convention on both axes.
/// Throws NavError(OutOfBounds) when the point falls outside the grid.
CellIndex world_to_cell(const GridMeta& meta, double x, double y);

/// Center point of a cell. Throws NavError(OutOfBounds) for cells outside
/// the grid.
std::pair<double, double> cell_to_world(const GridMeta& meta, const CellIndex& cell);

struct FootprintCells {
  std::vector<CellIndex> cells;
  bool truncated = false;  // part of the disc fell outside the grid
};

/// Cells whose centers lie within fp.radius of the pose position.
FootprintCells footprint_cells(const Footprint& fp, const Pose2D& pose,
                               const GridMeta& meta);

}  // namespace navstack
