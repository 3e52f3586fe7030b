#pragma once

#include <cstdint>

namespace navstack {

// Simulated time in integer microseconds. Integer ticks keep rate gates
// (1 Hz logging, 10 Hz control, 1 Hz replanning) exact over multi-hour runs.
using SimTime = std::int64_t;

constexpr SimTime kUsecPerSec = 1'000'000;

constexpr double to_seconds(SimTime t) { return static_cast<double>(t) * 1e-6; }

constexpr SimTime from_seconds(double s) {
  return static_cast<SimTime>(s * 1e6 + (s >= 0 ? 0.5 : -0.5));
}

}  // namespace navstack
