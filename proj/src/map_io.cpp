#include "navstack/app/map_io.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>

namespace navstack {

namespace {

// Reads one whitespace-delimited PGM header token, skipping '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

}  // namespace

OccupancyGrid grid_from_image(const std::vector<std::uint8_t>& pixels, int width,
                              int height, const MapMeta& meta) {
  if (meta.free_thresh > meta.occupied_thresh) {
    throw NavError(ErrorCode::ConfigError, "free_thresh exceeds occupied_thresh");
  }
  if (width <= 0 || height <= 0 ||
      pixels.size() != static_cast<std::size_t>(width) * height) {
    throw NavError(ErrorCode::MapParseError, "image size mismatch");
  }
  GridMeta gm;
  gm.resolution = meta.resolution;
  gm.origin = Pose2D(meta.origin_x, meta.origin_y, 0.0);
  gm.width = width;
  gm.height = height;
  OccupancyGrid grid = OccupancyGrid::make(gm);
  for (int row = 0; row < height; ++row) {
    const int cy = height - 1 - row;  // image row 0 is the top of the map
    for (int cx = 0; cx < width; ++cx) {
      const double p = (255.0 - pixels[static_cast<std::size_t>(row) * width + cx]) / 255.0;
      Occupancy o;
      if (p >= meta.occupied_thresh) {
        o = Occupancy::Occupied;
      } else if (p <= meta.free_thresh) {
        o = Occupancy::Free;
      } else {
        o = Occupancy::Unknown;
      }
      grid.set(cx, cy, o);
    }
  }
  return grid;
}

OccupancyGrid load_map(const std::string& pgm_path, const std::string& meta_path) {
  MapMeta meta;
  try {
    YAML::Node doc = YAML::LoadFile(meta_path);
    meta.resolution = doc["resolution"].as<double>();
    if (doc["origin"]) {
      meta.origin_x = doc["origin"][0].as<double>();
      meta.origin_y = doc["origin"][1].as<double>();
    }
    if (doc["occupied_thresh"]) meta.occupied_thresh = doc["occupied_thresh"].as<double>();
    if (doc["free_thresh"]) meta.free_thresh = doc["free_thresh"].as<double>();
  } catch (const YAML::Exception& e) {
    throw NavError(ErrorCode::MapParseError, std::string("map meta: ") + e.what());
  }
  if (meta.resolution <= 0.0) {
    throw NavError(ErrorCode::ConfigError, "resolution must be positive");
  }

  std::ifstream in(pgm_path, std::ios::binary);
  if (!in) {
    throw NavError(ErrorCode::MapParseError, "cannot open " + pgm_path);
  }
  if (next_token(in) != "P5") {
    throw NavError(ErrorCode::MapParseError, "not a binary PGM (P5)");
  }
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(next_token(in));
    height = std::stoi(next_token(in));
    maxval = std::stoi(next_token(in));
  } catch (const std::exception&) {
    throw NavError(ErrorCode::MapParseError, "malformed PGM header");
  }
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255) {
    throw NavError(ErrorCode::MapParseError, "unsupported PGM dimensions");
  }
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width) * height);
  in.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(pixels.size())) {
    throw NavError(ErrorCode::MapParseError, "truncated PGM payload");
  }
  return grid_from_image(pixels, width, height, meta);
}

void save_map(const OccupancyGrid& grid, const std::string& pgm_path,
              const std::string& meta_path) {
  std::ofstream out(pgm_path, std::ios::binary);
  if (!out) {
    throw NavError(ErrorCode::InvalidInput, "cannot open " + pgm_path);
  }
  out << "P5\n" << grid.meta.width << " " << grid.meta.height << "\n255\n";
  for (int row = 0; row < grid.meta.height; ++row) {
    const int cy = grid.meta.height - 1 - row;
    for (int cx = 0; cx < grid.meta.width; ++cx) {
      std::uint8_t v = 254;
      switch (grid.at(cx, cy)) {
        case Occupancy::Occupied: v = 0; break;
        case Occupancy::Free: v = 254; break;
        case Occupancy::Unknown: v = 205; break;
      }
      out.put(static_cast<char>(v));
    }
  }
  std::ofstream meta(meta_path);
  meta << "resolution: " << grid.meta.resolution << "\n";
  meta << "origin: [" << grid.meta.origin.x << ", " << grid.meta.origin.y << ", 0.0]\n";
  meta << "occupied_thresh: 0.65\nfree_thresh: 0.196\n";
}

}  // namespace navstack
