#include "kernelconv/metrics.hpp"

#include <algorithm>
#include <limits>

namespace kernelconv {

GridMask closure(const GridMask& a) {
  const GridSpec& g = a.spec();
  GridMask out(g);
  const auto& in = a.bits();
  auto& ov = out.bits();
  for (int y = 0; y < g.ny; ++y) {
    const int y0 = std::max(y - 1, 0), y1 = std::min(y + 1, g.ny - 1);
    for (int x = 0; x < g.nx; ++x) {
      const int x0 = std::max(x - 1, 0), x1 = std::min(x + 1, g.nx - 1);
      std::uint8_t any = 0;
      for (int py = y0; py <= y1 && !any; ++py)
        for (int px = x0; px <= x1; ++px)
          if (in[static_cast<std::size_t>(py) * g.nx + px]) {
            any = 1;
            break;
          }
      ov[static_cast<std::size_t>(y) * g.nx + x] = any;
    }
  }
  return out;
}

DistanceField distance_field(const GridMask& a) {
  DistanceField out;
  out.spec = a.spec();
  std::vector<int> cells = chebyshev_cell_distance(a);
  out.dist.resize(cells.size());
  const double h = a.spec().hmax();
  for (std::size_t i = 0; i < cells.size(); ++i)
    out.dist[i] = cells[i] >= unreachable_cells ? std::numeric_limits<double>::infinity()
                                                : cells[i] * h;
  return out;
}

double hausdorff_distance(const GridMask& a, const GridMask& b) {
  if (!(a.spec() == b.spec())) throw MetricError("hausdorff_distance: grid windows differ");
  if (!a.any() || !b.any()) throw MetricError("hausdorff_distance: operand mask is empty");

  std::vector<int> to_a = chebyshev_cell_distance(a);
  std::vector<int> to_b = chebyshev_cell_distance(b);
  const auto& av = a.bits();
  const auto& bv = b.bits();
  int worst = 0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    if (av[i]) worst = std::max(worst, to_b[i]);
    if (bv[i]) worst = std::max(worst, to_a[i]);
  }
  return worst * a.spec().hmax();
}

}  // namespace kernelconv
