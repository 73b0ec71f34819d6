#pragma once

// Scanline polygon fill on pixel centers.
//
// Pixel (x, y) is covered when its center (x + 0.5, y + 0.5) lies inside the
// polygon under the even-odd rule. An edge crosses scanline py when exactly
// one endpoint has v > py; the crossing abscissa is always evaluated from the
// endpoint with the smaller v so the result is independent of vertex order.
// A center lying exactly on a crossing belongs to the span on its right.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "ghost/geometry.hpp"
#include "ghost/grid.hpp"

namespace ghost {

namespace detail {

inline double edge_crossing(const PixelPoint& p, const PixelPoint& q,
                            double py) {
  const PixelPoint& a = p.v < q.v ? p : q;
  const PixelPoint& b = p.v < q.v ? q : p;
  return a.u + (py - a.v) * (b.u - a.u) / (b.v - a.v);
}

// First column x in [0, width] with x + 0.5 >= bound.
inline int first_center_at_or_after(double bound, int width) {
  if (!(bound > -1.0)) return 0;
  if (bound > width + 1.0) return width;
  int x = static_cast<int>(std::ceil(bound - 0.5));
  while (x > 0 && (x - 1) + 0.5 >= bound) --x;
  while (x < width && x + 0.5 < bound) ++x;
  return std::clamp(x, 0, width);
}

}  // namespace detail

template <typename T>
void fill_polygon(std::span<const PixelPoint> poly, Grid<T>& grid, T value) {
  const std::size_t n = poly.size();
  if (n < 3 || grid.empty()) return;
  double vmin = poly[0].v, vmax = poly[0].v;
  for (const auto& p : poly) {
    if (!std::isfinite(p.u) || !std::isfinite(p.v)) return;
    vmin = std::min(vmin, p.v);
    vmax = std::max(vmax, p.v);
  }
  const int y0 = std::max(0, static_cast<int>(std::floor(vmin - 0.5)));
  const int y1 =
      std::min(grid.height() - 1, static_cast<int>(std::ceil(vmax - 0.5)));
  std::vector<double> xs;
  xs.reserve(n);
  for (int y = y0; y <= y1; ++y) {
    const double py = y + 0.5;
    xs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = poly[i];
      const auto& q = poly[(i + 1) % n];
      if ((p.v > py) != (q.v > py)) xs.push_back(detail::edge_crossing(p, q, py));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int xa = detail::first_center_at_or_after(xs[k], grid.width());
      const int xb = detail::first_center_at_or_after(xs[k + 1], grid.width());
      for (int x = xa; x < xb; ++x) grid(x, y) = value;
    }
  }
}

}  // namespace ghost
