#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "navstack/clock.hpp"
#include "navstack/geometry.hpp"
#include "navstack/sensor.hpp"

namespace navstack {

// Cost byte semantics: 0 free, 1-252 scaled cost, 253 inscribed (center in
// possible collision), 254 lethal, 255 unknown.
using Cost = std::uint8_t;
inline constexpr Cost kCostFree = 0;
inline constexpr Cost kCostInscribed = 253;
inline constexpr Cost kCostLethal = 254;
inline constexpr Cost kCostUnknown = 255;

enum class Occupancy : std::uint8_t { Free, Occupied, Unknown };

/// Static map loaded from disk (or built in tests).
struct OccupancyGrid {
  GridMeta meta;
  std::vector<Occupancy> cells;

  Occupancy at(int cx, int cy) const { return cells[meta.index(cx, cy)]; }
  void set(int cx, int cy, Occupancy v) { cells[meta.index(cx, cy)] = v; }
  static OccupancyGrid make(const GridMeta& meta, Occupancy fill = Occupancy::Free);
};

/// Immutable combined costmap published to planner and controller.
struct CostmapSnapshot {
  GridMeta meta;
  std::vector<Cost> cells;
  SimTime stamp = 0;

  /// Combined cost, throws NavError(OutOfBounds) outside the grid.
  Cost at(const CellIndex& cell) const;
  Cost at_unchecked(int cx, int cy) const { return cells[meta.index(cx, cy)]; }
};
using SnapshotPtr = std::shared_ptr<const CostmapSnapshot>;

/// In-place exponential-decay inflation around lethal cells:
/// d = 0 -> lethal, d <= inscribed -> 253, inscribed < d <= inflation ->
/// floor(252*exp(-cost_scaling*(d - inscribed))). Never lowers a cost.
void inflate(std::vector<Cost>& cells, const GridMeta& meta, double inscribed_radius,
             double inflation_radius, double cost_scaling);

/// Sparse voxel store with per-voxel expiry timestamps.
class TemporalVoxelStore {
 public:
  TemporalVoxelStore(double voxel_size, double decay_sec);

  /// Inserts or refreshes each point's voxel with expiry now + decay.
  /// Returns the number of skipped non-finite points.
  std::size_t observe(const PointCloud& points, SimTime now);

  /// Removes every voxel with expiry <= now; returns the removed count.
  std::size_t decay(SimTime now);

  std::size_t size() const { return voxels_.size(); }
  void clear_all() { voxels_.clear(); }
  double voxel_size() const { return voxel_size_; }
  double decay_seconds() const { return to_seconds(decay_us_); }

  /// True when some voxel key (ix,iy,*) has its z-center inside
  /// [z_min, z_max]. Visitor form used for projection.
  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (const auto& [key, expiry] : voxels_) {
      fn(key.ix, key.iy, key.iz, expiry);
    }
  }

  bool contains(int ix, int iy, int iz) const;

 private:
  struct Key {
    int ix, iy, iz;
    bool operator==(const Key& o) const { return ix == o.ix && iy == o.iy && iz == o.iz; }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::size_t h = static_cast<std::size_t>(k.ix) * 73856093u;
      h ^= static_cast<std::size_t>(k.iy) * 19349663u;
      h ^= static_cast<std::size_t>(k.iz) * 83492791u;
      return h;
    }
  };

  double voxel_size_;
  SimTime decay_us_;
  std::unordered_map<Key, SimTime, KeyHash> voxels_;
};

struct SensorBatch {
  PointCloud points;
};

/// One source of cost writes in the layered costmap.
class Layer {
 public:
  Layer(std::string name, bool clearable) : name_(std::move(name)), clearable_(clearable) {}
  virtual ~Layer() = default;

  const std::string& name() const { return name_; }
  bool clearable() const { return clearable_; }

  virtual void update(std::vector<Cost>& cells, const GridMeta& meta,
                      const Pose2D& robot, const SensorBatch& batch, SimTime now) = 0;
  virtual void clear() {}

 protected:
  std::string name_;
  bool clearable_;
};

/// Writes the static map into the costmap window (occupied -> 254,
/// unknown -> 255). Not clearable.
class StaticLayer : public Layer {
 public:
  explicit StaticLayer(std::shared_ptr<const OccupancyGrid> map);
  void update(std::vector<Cost>& cells, const GridMeta& meta, const Pose2D& robot,
              const SensorBatch& batch, SimTime now) override;
  const OccupancyGrid& map() const { return *map_; }

 private:
  std::shared_ptr<const OccupancyGrid> map_;
};

/// Projects live voxels in a z band down to lethal columns.
class VoxelLayer : public Layer {
 public:
  VoxelLayer(double voxel_size, double decay_sec, double z_min, double z_max);
  void update(std::vector<Cost>& cells, const GridMeta& meta, const Pose2D& robot,
              const SensorBatch& batch, SimTime now) override;
  void clear() override { store_.clear_all(); }
  TemporalVoxelStore& store() { return store_; }
  const TemporalVoxelStore& store() const { return store_; }

 private:
  TemporalVoxelStore store_;
  double z_min_, z_max_;
};

/// Exponential-decay inflation around lethal cells; recomputed every update
/// from whatever lethal cells the earlier layers produced.
class InflationLayer : public Layer {
 public:
  InflationLayer(double inscribed_radius, double inflation_radius, double cost_scaling);
  void update(std::vector<Cost>& cells, const GridMeta& meta, const Pose2D& robot,
              const SensorBatch& batch, SimTime now) override;

 private:
  double inscribed_radius_, inflation_radius_, cost_scaling_;
};

struct CostmapParams {
  double inscribed_radius = 0.22;
  double inflation_radius = 0.55;
  double cost_scaling = 3.0;
  double voxel_size = 0.05;
  double decay_sec = 3.0;
  double z_min = 0.0;
  double z_max = 1.5;
};

/// Ordered layer pipeline over one combined grid. The global costmap covers
/// the static map; the local one is a rolling window recentered on the
/// robot, resampled from the same static map.
class LayeredCostmap {
 public:
  /// Non-rolling costmap covering the whole static map.
  static LayeredCostmap make_global(std::shared_ptr<const OccupancyGrid> map,
                                    const CostmapParams& params);
  /// Rolling window of the given size (meters) at the map's resolution.
  static LayeredCostmap make_local(std::shared_ptr<const OccupancyGrid> map,
                                   double window_size, const CostmapParams& params);

  /// Replaces the static source map. The map must share the costmap's
  /// resolution and, for a non-rolling costmap, its exact extent; otherwise
  /// throws NavError(MetaMismatch).
  void set_static_map(std::shared_ptr<const OccupancyGrid> map);

  /// Runs the layer pipeline and publishes an immutable snapshot.
  /// Throws NavError(PoseOutOfMap) when the robot pose leaves the map.
  SnapshotPtr update(const Pose2D& robot, const SensorBatch& batch, SimTime now);

  /// Empties every clearable layer. Static content is untouched; the next
  /// update re-inflates from static data alone until new points arrive.
  void clear_except_static();

  const GridMeta& meta() const { return meta_; }
  bool rolling() const { return rolling_; }
  SnapshotPtr latest() const { return latest_; }
  VoxelLayer* voxel_layer() { return voxel_; }

 private:
  LayeredCostmap() = default;

  GridMeta meta_;
  bool rolling_ = false;
  double window_size_ = 0.0;
  std::shared_ptr<const OccupancyGrid> map_;
  std::vector<std::unique_ptr<Layer>> layers_;
  VoxelLayer* voxel_ = nullptr;
  SnapshotPtr latest_;
};

/// Combined cost with bounds checking (throws NavError(OutOfBounds)).
Cost cost_at(const CostmapSnapshot& snapshot, const CellIndex& cell);

/// Debug dump as a binary PGM (P5), cost bytes written as-is.
void write_costmap_pgm(const CostmapSnapshot& snapshot, const std::string& path);

}  // namespace navstack
