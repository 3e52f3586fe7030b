#pragma once

#include <string>

#include "navstack/costmap.hpp"

namespace navstack {

struct MapMeta {
  double resolution = 0.05;
  double origin_x = 0.0;
  double origin_y = 0.0;
  double occupied_thresh = 0.65;
  double free_thresh = 0.196;
};

/// Loads a binary (P5) PGM plus its YAML metadata into an occupancy grid.
/// Pixel occupancy p = (255 - value)/255; p >= occupied_thresh is occupied,
/// p <= free_thresh free, anything between unknown. Image row 0 is the top
/// of the map (y-down image to y-up world flip).
/// Throws NavError(MapParseError) for malformed files and
/// NavError(ConfigError) for inverted thresholds.
OccupancyGrid load_map(const std::string& pgm_path, const std::string& meta_path);

/// Same conversion from an in-memory image (row 0 = top).
OccupancyGrid grid_from_image(const std::vector<std::uint8_t>& pixels, int width,
                              int height, const MapMeta& meta);

/// Writes an occupancy grid back out as PGM (occupied 0, free 254,
/// unknown 205) plus metadata; used by the scenario tooling.
void save_map(const OccupancyGrid& grid, const std::string& pgm_path,
              const std::string& meta_path);

}  // namespace navstack
