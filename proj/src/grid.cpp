#include "kernelconv/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <string>

namespace kernelconv {

namespace {

void require_same_window(const GridSpec& a, const GridSpec& b, const char* op) {
  if (!(a == b)) throw GridError(std::string(op) + ": grid windows differ");
}

}  // namespace

GridSpec GridSpec::make(Point origin, Point extent, int nx, int ny) {
  if (!(extent.x > origin.x) || !(extent.y > origin.y))
    throw GridError("grid extent must exceed origin componentwise");
  if (nx < 4 || ny < 4) throw GridError("grid resolution must be at least 4 cells per axis");
  GridSpec s;
  s.origin = origin;
  s.extent = extent;
  s.nx = nx;
  s.ny = ny;
  return s;
}

std::optional<Cell> GridSpec::cell_at(Point p) const {
  double fx = (p.x - origin.x) / hx();
  double fy = (p.y - origin.y) / hy();
  if (fx < 0 || fy < 0 || fx >= nx || fy >= ny) return std::nullopt;
  Cell c{static_cast<int>(fx), static_cast<int>(fy)};
  if (!contains(c)) return std::nullopt;
  return c;
}

bool GridMask::any() const {
  for (std::uint8_t b : bits_)
    if (b) return true;
  return false;
}

std::size_t GridMask::count() const {
  return std::accumulate(bits_.begin(), bits_.end(), std::size_t{0});
}

GridMask intersect(const GridMask& a, const GridMask& b) {
  require_same_window(a.spec(), b.spec(), "intersect");
  GridMask out = a;
  intersect_into(out, b);
  return out;
}

GridMask unite(const GridMask& a, const GridMask& b) {
  require_same_window(a.spec(), b.spec(), "unite");
  GridMask out = a;
  unite_into(out, b);
  return out;
}

bool intersect_into(GridMask& acc, const GridMask& b) {
  require_same_window(acc.spec(), b.spec(), "intersect");
  auto& av = acc.bits();
  const auto& bv = b.bits();
  std::uint8_t changed = 0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    std::uint8_t v = av[i] & bv[i];
    changed |= static_cast<std::uint8_t>(v ^ av[i]);
    av[i] = v;
  }
  return changed != 0;
}

bool unite_into(GridMask& acc, const GridMask& b) {
  require_same_window(acc.spec(), b.spec(), "unite");
  auto& av = acc.bits();
  const auto& bv = b.bits();
  std::uint8_t changed = 0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    std::uint8_t v = av[i] | bv[i];
    changed |= static_cast<std::uint8_t>(v ^ av[i]);
    av[i] = v;
  }
  return changed != 0;
}

bool subset_of(const GridMask& a, const GridMask& b) {
  require_same_window(a.spec(), b.spec(), "subset_of");
  const auto& av = a.bits();
  const auto& bv = b.bits();
  for (std::size_t i = 0; i < av.size(); ++i)
    if (av[i] & ~bv[i]) return false;
  return true;
}

GridMask interior(const GridMask& a) {
  const GridSpec& g = a.spec();
  GridMask out(g);
  const auto& in = a.bits();
  auto& ov = out.bits();
  // Border rows and columns stay unset: clipped neighbors count as outside.
  for (int y = 1; y + 1 < g.ny; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * g.nx;
    for (int x = 1; x + 1 < g.nx; ++x) {
      const std::size_t i = row + x;
      std::uint8_t all = in[i - g.nx - 1] & in[i - g.nx] & in[i - g.nx + 1] & in[i - 1] & in[i] &
                         in[i + 1] & in[i + g.nx - 1] & in[i + g.nx] & in[i + g.nx + 1];
      ov[i] = all;
    }
  }
  return out;
}

GridMask connected_component(const GridMask& a, Cell q) {
  const GridSpec& g = a.spec();
  if (!g.contains(q)) throw GridError("connected_component: cell outside grid window");
  GridMask out(g);
  if (!a.test(q)) return out;

  std::vector<std::size_t> stack;
  stack.reserve(256);
  const auto& in = a.bits();
  auto& ov = out.bits();
  const std::size_t start = g.index(q);
  ov[start] = 1;
  stack.push_back(start);
  const std::size_t nx = static_cast<std::size_t>(g.nx);
  while (!stack.empty()) {
    std::size_t i = stack.back();
    stack.pop_back();
    std::size_t x = i % nx;
    std::size_t y = i / nx;
    auto visit = [&](std::size_t n) {
      if (in[n] && !ov[n]) {
        ov[n] = 1;
        stack.push_back(n);
      }
    };
    if (x > 0) visit(i - 1);
    if (x + 1 < nx) visit(i + 1);
    if (y > 0) visit(i - nx);
    if (y + 1 < static_cast<std::size_t>(g.ny)) visit(i + nx);
  }
  return out;
}

int component_count(const GridMask& a) {
  const GridSpec& g = a.spec();
  std::vector<std::uint8_t> seen(g.cells(), 0);
  const auto& in = a.bits();
  const std::size_t nx = static_cast<std::size_t>(g.nx);
  std::vector<std::size_t> stack;
  int components = 0;
  for (std::size_t start = 0; start < in.size(); ++start) {
    if (!in[start] || seen[start]) continue;
    ++components;
    seen[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      std::size_t i = stack.back();
      stack.pop_back();
      std::size_t x = i % nx;
      std::size_t y = i / nx;
      auto visit = [&](std::size_t n) {
        if (in[n] && !seen[n]) {
          seen[n] = 1;
          stack.push_back(n);
        }
      };
      if (x > 0) visit(i - 1);
      if (x + 1 < nx) visit(i + 1);
      if (y > 0) visit(i - nx);
      if (y + 1 < static_cast<std::size_t>(g.ny)) visit(i + nx);
    }
  }
  return components;
}

GridMask boundary_cells(const GridMask& a) {
  const GridSpec& g = a.spec();
  GridMask out(g);
  const auto& in = a.bits();
  auto& ov = out.bits();
  for (int y = 0; y < g.ny; ++y) {
    for (int x = 0; x < g.nx; ++x) {
      const std::size_t i = g.index({x, y});
      bool self = in[i];
      bool flip = false;
      for (int dy = -1; dy <= 1 && !flip; ++dy) {
        for (int dx = -1; dx <= 1 && !flip; ++dx) {
          if (dx == 0 && dy == 0) continue;
          int px = x + dx, py = y + dy;
          // Outside the window counts as unset.
          bool nb = g.contains({px, py}) && in[g.index({px, py})];
          if (nb != self) flip = true;
        }
      }
      ov[i] = flip ? 1 : 0;
    }
  }
  return out;
}

std::vector<int> chebyshev_cell_distance(const GridMask& src) {
  const GridSpec& g = src.spec();
  std::vector<int> dist(g.cells(), unreachable_cells);
  const auto& in = src.bits();
  const int nx = g.nx, ny = g.ny;
  for (std::size_t i = 0; i < in.size(); ++i)
    if (in[i]) dist[i] = 0;

  // Two-pass chamfer sweep; exact for the Chebyshev metric with unit steps.
  auto relax = [&](std::size_t i, std::size_t from) {
    if (dist[from] + 1 < dist[i]) dist[i] = dist[from] + 1;
  };
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      std::size_t i = static_cast<std::size_t>(y) * nx + x;
      if (x > 0) relax(i, i - 1);
      if (y > 0) {
        relax(i, i - nx);
        if (x > 0) relax(i, i - nx - 1);
        if (x + 1 < nx) relax(i, i - nx + 1);
      }
    }
  }
  for (int y = ny - 1; y >= 0; --y) {
    for (int x = nx - 1; x >= 0; --x) {
      std::size_t i = static_cast<std::size_t>(y) * nx + x;
      if (x + 1 < nx) relax(i, i + 1);
      if (y + 1 < ny) {
        relax(i, i + nx);
        if (x + 1 < nx) relax(i, i + nx + 1);
        if (x > 0) relax(i, i + nx - 1);
      }
    }
  }
  return dist;
}

BandCompare masks_equal_within_band(const GridMask& a, const GridMask& b, int band) {
  require_same_window(a.spec(), b.spec(), "masks_equal_within_band");
  if (band < 0) throw GridError("masks_equal_within_band: band must be nonnegative");

  BandCompare out;
  const auto& av = a.bits();
  const auto& bv = b.bits();
  bool identical = av == bv;
  if (identical) {
    out.equal = true;
    return out;
  }

  std::vector<int> to_a_boundary = chebyshev_cell_distance(boundary_cells(a));
  std::vector<int> to_b_boundary = chebyshev_cell_distance(boundary_cells(b));
  int worst = 0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    if (av[i] == bv[i]) continue;
    ++out.mismatches;
    // A cell set only in a is judged against b's boundary and vice versa.
    int d = av[i] ? to_b_boundary[i] : to_a_boundary[i];
    worst = std::max(worst, d);
  }
  out.measured_band = std::max(worst, 1);
  out.equal = out.measured_band <= band;
  return out;
}

}  // namespace kernelconv
