#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "kernelconv/errors.hpp"

namespace kernelconv {

struct Point {
  double x = 0;
  double y = 0;
  bool operator==(const Point&) const = default;
};

struct Cell {
  int x = 0;
  int y = 0;
  bool operator==(const Cell&) const = default;
};

/// Rectangular window [origin, extent) split into nx-by-ny cells. Masks are
/// evaluated at cell centers; every center lies strictly inside the window.
struct GridSpec {
  Point origin;
  Point extent;
  int nx = 0;
  int ny = 0;

  /// Validates extent > origin componentwise and nx, ny >= 4.
  static GridSpec make(Point origin, Point extent, int nx, int ny);

  double hx() const { return (extent.x - origin.x) / nx; }
  double hy() const { return (extent.y - origin.y) / ny; }
  double hmax() const { return hx() > hy() ? hx() : hy(); }
  std::size_t cells() const { return static_cast<std::size_t>(nx) * ny; }

  bool contains(Cell c) const { return c.x >= 0 && c.x < nx && c.y >= 0 && c.y < ny; }
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * nx + c.x; }
  Point center(Cell c) const {
    return {origin.x + (c.x + 0.5) * hx(), origin.y + (c.y + 0.5) * hy()};
  }

  /// Cell whose box contains p, or nullopt when p is outside the window.
  std::optional<Cell> cell_at(Point p) const;

  bool operator==(const GridSpec&) const = default;
};

/// Boolean occupancy per cell, row-major (row = y index).
class GridMask {
 public:
  GridMask() = default;
  explicit GridMask(const GridSpec& spec, bool fill = false)
      : spec_(spec), bits_(spec.cells(), fill ? 1 : 0) {}

  const GridSpec& spec() const { return spec_; }
  bool test(Cell c) const { return bits_[spec_.index(c)] != 0; }
  void set(Cell c, bool v = true) { bits_[spec_.index(c)] = v ? 1 : 0; }
  bool any() const;
  std::size_t count() const;

  std::vector<std::uint8_t>& bits() { return bits_; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  bool operator==(const GridMask&) const = default;

 private:
  GridSpec spec_;
  std::vector<std::uint8_t> bits_;
};

/// Mask plus a designated base cell. An absent point is the EMPTY sentinel:
/// the mask is all-false and there is no base point (kernel accumulations
/// need a neutral value when the base point falls outside the set).
struct PointedMask {
  GridMask mask;
  std::optional<Cell> point;

  static PointedMask empty(const GridSpec& spec) { return {GridMask(spec), std::nullopt}; }
  bool is_empty() const { return !point.has_value(); }
};

/// Cellwise AND. Throws GridError on window mismatch.
GridMask intersect(const GridMask& a, const GridMask& b);

/// Cellwise OR. Throws GridError on window mismatch.
GridMask unite(const GridMask& a, const GridMask& b);

/// ANDs b into acc in place; returns true when acc changed.
bool intersect_into(GridMask& acc, const GridMask& b);

/// ORs b into acc in place; returns true when acc changed.
bool unite_into(GridMask& acc, const GridMask& b);

/// True when every set cell of a is also set in b.
bool subset_of(const GridMask& a, const GridMask& b);

/// One-cell 3x3 Chebyshev erosion. Cells clipped at the window edge count as
/// outside, so border cells are never interior.
GridMask interior(const GridMask& a);

/// 4-connected component of cell q, as a mask. q outside the window is a
/// GridError; q on an unset cell yields the all-false mask.
GridMask connected_component(const GridMask& a, Cell q);

/// Number of 4-connected components of the set cells.
int component_count(const GridMask& a);

/// Cells where the mask flips across an 8-neighborhood: set cells with an
/// unset (or out-of-window) neighbor, plus unset cells with a set neighbor.
GridMask boundary_cells(const GridMask& a);

/// Chebyshev distance, in cells, from each cell to the nearest set cell of
/// src (0 on set cells). Empty src gives the `unreachable` sentinel everywhere.
std::vector<int> chebyshev_cell_distance(const GridMask& src);
constexpr int unreachable_cells = 1 << 29;

struct BandCompare {
  bool equal = false;
  std::size_t mismatches = 0;
  /// 0 when the masks agree exactly; otherwise the largest Chebyshev distance
  /// (in cells, clamped >= 1) from a mismatched cell to the other mask's
  /// boundary, so band 0 accepts only exact equality.
  int measured_band = 0;
};

/// Tolerant comparison: masks agree within `band` when every mismatched cell
/// lies within Chebyshev distance `band` of the other mask's boundary cells.
BandCompare masks_equal_within_band(const GridMask& a, const GridMask& b, int band);

}  // namespace kernelconv
