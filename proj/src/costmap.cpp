#include "navstack/costmap.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "navstack/edt.hpp"

namespace navstack {

OccupancyGrid OccupancyGrid::make(const GridMeta& meta, Occupancy fill) {
  OccupancyGrid g;
  g.meta = meta;
  g.cells.assign(meta.size(), fill);
  return g;
}

Cost CostmapSnapshot::at(const CellIndex& cell) const {
  if (!meta.contains(cell)) {
    throw NavError(ErrorCode::OutOfBounds, "cell outside costmap");
  }
  return cells[meta.index(cell.cx, cell.cy)];
}

Cost cost_at(const CostmapSnapshot& snapshot, const CellIndex& cell) {
  return snapshot.at(cell);
}

void inflate(std::vector<Cost>& cells, const GridMeta& meta, double inscribed_radius,
             double inflation_radius, double cost_scaling) {
  if (inscribed_radius > inflation_radius) {
    throw NavError(ErrorCode::InvalidInput, "inscribed radius exceeds inflation radius");
  }
  std::vector<std::uint8_t> lethal(cells.size(), 0);
  bool any = false;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i] == kCostLethal) {
      lethal[i] = 1;
      any = true;
    }
  }
  if (!any) {
    return;
  }
  const std::vector<double> d2 = squared_edt(lethal, meta.width, meta.height);
  const double res = meta.resolution;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double d = res * std::sqrt(d2[i]);
    Cost c;
    if (d == 0.0) {
      c = kCostLethal;
    } else if (d <= inscribed_radius) {
      c = kCostInscribed;
    } else if (d <= inflation_radius) {
      c = static_cast<Cost>(
          std::floor(252.0 * std::exp(-cost_scaling * (d - inscribed_radius))));
    } else {
      continue;
    }
    if (c > cells[i]) {
      cells[i] = c;
    }
  }
}

TemporalVoxelStore::TemporalVoxelStore(double voxel_size, double decay_sec)
    : voxel_size_(voxel_size), decay_us_(from_seconds(decay_sec)) {
  if (voxel_size <= 0.0 || decay_sec <= 0.0) {
    throw NavError(ErrorCode::InvalidInput, "voxel size and decay must be positive");
  }
}

std::size_t TemporalVoxelStore::observe(const PointCloud& points, SimTime now) {
  std::size_t skipped = 0;
  for (const auto& p : points.points) {
    if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2])) {
      ++skipped;
      continue;
    }
    const Key key{static_cast<int>(std::floor(p[0] / voxel_size_)),
                  static_cast<int>(std::floor(p[1] / voxel_size_)),
                  static_cast<int>(std::floor(p[2] / voxel_size_))};
    voxels_[key] = now + decay_us_;
  }
  return skipped;
}

std::size_t TemporalVoxelStore::decay(SimTime now) {
  std::size_t removed = 0;
  for (auto it = voxels_.begin(); it != voxels_.end();) {
    if (it->second <= now) {
      it = voxels_.erase(it);
      ++removed;
    } else {
      ++it;
    }
  }
  return removed;
}

bool TemporalVoxelStore::contains(int ix, int iy, int iz) const {
  return voxels_.count(Key{ix, iy, iz}) > 0;
}

StaticLayer::StaticLayer(std::shared_ptr<const OccupancyGrid> map)
    : Layer("static", false), map_(std::move(map)) {}

void StaticLayer::update(std::vector<Cost>& cells, const GridMeta& meta,
                         const Pose2D& /*robot*/, const SensorBatch& /*batch*/,
                         SimTime /*now*/) {
  const GridMeta& src = map_->meta;
  for (int cy = 0; cy < meta.height; ++cy) {
    for (int cx = 0; cx < meta.width; ++cx) {
      // Window cell center, resolved in the source map.
      const double wx = meta.origin.x + (cx + 0.5) * meta.resolution;
      const double wy = meta.origin.y + (cy + 0.5) * meta.resolution;
      const int sx = static_cast<int>(std::floor((wx - src.origin.x) / src.resolution));
      const int sy = static_cast<int>(std::floor((wy - src.origin.y) / src.resolution));
      Cost c = kCostUnknown;
      if (src.contains(sx, sy)) {
        switch (map_->at(sx, sy)) {
          case Occupancy::Free: c = kCostFree; break;
          case Occupancy::Occupied: c = kCostLethal; break;
          case Occupancy::Unknown: c = kCostUnknown; break;
        }
      }
      auto& cell = cells[meta.index(cx, cy)];
      if (c > cell) cell = c;
    }
  }
}

VoxelLayer::VoxelLayer(double voxel_size, double decay_sec, double z_min, double z_max)
    : Layer("voxel", true), store_(voxel_size, decay_sec), z_min_(z_min), z_max_(z_max) {
  if (z_min >= z_max) {
    throw NavError(ErrorCode::InvalidInput, "z band empty");
  }
}

void VoxelLayer::update(std::vector<Cost>& cells, const GridMeta& meta,
                        const Pose2D& /*robot*/, const SensorBatch& batch, SimTime now) {
  store_.observe(batch.points, now);
  store_.decay(now);
  const double vs = store_.voxel_size();
  store_.for_each([&](int ix, int iy, int iz, SimTime /*expiry*/) {
    const double zc = (iz + 0.5) * vs;
    if (zc < z_min_ || zc > z_max_) return;
    const double xc = (ix + 0.5) * vs;
    const double yc = (iy + 0.5) * vs;
    const int cx = static_cast<int>(std::floor((xc - meta.origin.x) / meta.resolution));
    const int cy = static_cast<int>(std::floor((yc - meta.origin.y) / meta.resolution));
    if (!meta.contains(cx, cy)) return;
    auto& cell = cells[meta.index(cx, cy)];
    if (kCostLethal > cell) cell = kCostLethal;
  });
}

InflationLayer::InflationLayer(double inscribed_radius, double inflation_radius,
                               double cost_scaling)
    : Layer("inflation", false),
      inscribed_radius_(inscribed_radius),
      inflation_radius_(inflation_radius),
      cost_scaling_(cost_scaling) {}

void InflationLayer::update(std::vector<Cost>& cells, const GridMeta& meta,
                            const Pose2D& /*robot*/, const SensorBatch& /*batch*/,
                            SimTime /*now*/) {
  inflate(cells, meta, inscribed_radius_, inflation_radius_, cost_scaling_);
}

LayeredCostmap LayeredCostmap::make_global(std::shared_ptr<const OccupancyGrid> map,
                                           const CostmapParams& params) {
  LayeredCostmap lc;
  lc.meta_ = map->meta;
  lc.rolling_ = false;
  lc.map_ = map;
  lc.layers_.push_back(std::make_unique<StaticLayer>(map));
  auto voxel = std::make_unique<VoxelLayer>(params.voxel_size, params.decay_sec,
                                            params.z_min, params.z_max);
  lc.voxel_ = voxel.get();
  lc.layers_.push_back(std::move(voxel));
  lc.layers_.push_back(std::make_unique<InflationLayer>(
      params.inscribed_radius, params.inflation_radius, params.cost_scaling));
  return lc;
}

LayeredCostmap LayeredCostmap::make_local(std::shared_ptr<const OccupancyGrid> map,
                                          double window_size,
                                          const CostmapParams& params) {
  if (window_size <= 0.0) {
    throw NavError(ErrorCode::InvalidInput, "window size must be positive");
  }
  LayeredCostmap lc = make_global(map, params);
  lc.rolling_ = true;
  lc.window_size_ = window_size;
  const int cells = std::max(1, static_cast<int>(std::lround(window_size / map->meta.resolution)));
  lc.meta_.width = cells;
  lc.meta_.height = cells;
  return lc;
}

void LayeredCostmap::set_static_map(std::shared_ptr<const OccupancyGrid> map) {
  const GridMeta& m = map->meta;
  if (m.resolution != meta_.resolution) {
    throw NavError(ErrorCode::MetaMismatch, "map resolution differs from costmap");
  }
  if (!rolling_ &&
      (m.width != meta_.width || m.height != meta_.height ||
       m.origin.x != meta_.origin.x || m.origin.y != meta_.origin.y)) {
    throw NavError(ErrorCode::MetaMismatch, "map extent differs from global costmap");
  }
  map_ = map;
  for (auto& layer : layers_) {
    if (dynamic_cast<StaticLayer*>(layer.get()) != nullptr) {
      layer = std::make_unique<StaticLayer>(map);
    }
  }
}

SnapshotPtr LayeredCostmap::update(const Pose2D& robot, const SensorBatch& batch,
                                   SimTime now) {
  const GridMeta& map_meta = map_->meta;
  const bool inside =
      robot.x >= map_meta.origin.x && robot.y >= map_meta.origin.y &&
      robot.x < map_meta.origin.x + map_meta.width * map_meta.resolution &&
      robot.y < map_meta.origin.y + map_meta.height * map_meta.resolution;
  if (!inside) {
    throw NavError(ErrorCode::PoseOutOfMap, "robot pose outside global map");
  }
  if (rolling_) {
    // Recenter the window on the robot, snapped to the resolution grid so
    // window cells stay aligned with the source map.
    const double res = meta_.resolution;
    meta_.origin.x = std::floor((robot.x - window_size_ / 2.0) / res) * res;
    meta_.origin.y = std::floor((robot.y - window_size_ / 2.0) / res) * res;
  }
  std::vector<Cost> cells(meta_.size(), kCostFree);
  for (auto& layer : layers_) {
    layer->update(cells, meta_, robot, batch, now);
  }
  auto snap = std::make_shared<CostmapSnapshot>();
  snap->meta = meta_;
  snap->cells = std::move(cells);
  snap->stamp = now;
  latest_ = snap;
  return latest_;
}

void LayeredCostmap::clear_except_static() {
  for (auto& layer : layers_) {
    if (layer->clearable()) {
      layer->clear();
    }
  }
}

void write_costmap_pgm(const CostmapSnapshot& snapshot, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw NavError(ErrorCode::InvalidInput, "cannot open " + path);
  }
  out << "P5\n" << snapshot.meta.width << " " << snapshot.meta.height << "\n255\n";
  // Image row 0 is the top of the map.
  for (int cy = snapshot.meta.height - 1; cy >= 0; --cy) {
    out.write(reinterpret_cast<const char*>(
                  snapshot.cells.data() + snapshot.meta.index(0, cy)),
              snapshot.meta.width);
  }
}

}  // namespace navstack
