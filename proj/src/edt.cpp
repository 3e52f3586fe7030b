#include "navstack/edt.hpp"

#include <limits>

namespace navstack {
namespace {

// 1D squared distance transform of a sampled function f, Felzenszwalb &
// Huttenlocher style. n is the sample count; v, z are scratch of size n and
// n+1; out receives min_j (i-j)^2 + f(j).
void dt_1d(const double* f, int n, double* out, int* v, double* z) {
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s = ((f[q] + static_cast<double>(q) * q) -
                (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
               (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + static_cast<double>(q) * q) -
           (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
          (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double d = q - v[k];
    out[q] = d * d + f[v[k]];
  }
}

}  // namespace

std::vector<double> squared_edt(const std::vector<std::uint8_t>& mask, int width,
                                int height) {
  // "Infinity" that exceeds any in-grid squared distance while keeping the
  // envelope intersections well clear of rounding trouble.
  const double far = 1e9;
  std::vector<double> grid(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    grid[i] = mask[i] ? 0.0 : far;
  }

  const int n = width > height ? width : height;
  std::vector<double> f(n), out(n), z(n + 1);
  std::vector<int> v(n);

  // Columns first, then rows.
  for (int cx = 0; cx < width; ++cx) {
    for (int cy = 0; cy < height; ++cy) f[cy] = grid[static_cast<std::size_t>(cy) * width + cx];
    dt_1d(f.data(), height, out.data(), v.data(), z.data());
    for (int cy = 0; cy < height; ++cy) grid[static_cast<std::size_t>(cy) * width + cx] = out[cy];
  }
  for (int cy = 0; cy < height; ++cy) {
    double* row = grid.data() + static_cast<std::size_t>(cy) * width;
    for (int cx = 0; cx < width; ++cx) f[cx] = row[cx];
    dt_1d(f.data(), width, out.data(), v.data(), z.data());
    for (int cx = 0; cx < width; ++cx) row[cx] = out[cx];
  }
  return grid;
}

}  // namespace navstack
