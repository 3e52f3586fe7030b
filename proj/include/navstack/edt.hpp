#pragma once

#include <cstdint>
#include <vector>

namespace navstack {

/// Exact squared Euclidean distance transform on a cell grid.
///
/// `mask` is row-major (index = cy*width + cx); nonzero entries are sources.
/// Returns per-cell squared distance in cell units to the nearest source
/// (0 on sources). Cells of a grid with no sources get a value larger than
/// any in-grid distance. Two-pass lower-envelope-of-parabolas scheme; with
/// integer inputs the returned minima are exact.
std::vector<double> squared_edt(const std::vector<std::uint8_t>& mask, int width,
                                int height);

}  // namespace navstack
