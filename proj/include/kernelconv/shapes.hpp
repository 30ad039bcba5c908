#pragma once

#include <string>
#include <variant>

#include "kernelconv/expr.hpp"
#include "kernelconv/grid.hpp"

namespace kernelconv {

/// Open Euclidean disc; center and radius may depend on the index j.
struct DiscShape {
  Expr cx, cy, radius;
};

/// Open axis-aligned rectangle given by center and half-widths.
struct RectShape {
  Expr cx, cy, half_w, half_h;
};

/// Open unit disc minus the horizontal slit (-1, 1 - 1/j) x {0}. The index
/// expression must evaluate positive. A cell counts as slit when its center
/// is within half a cell height of the slit segment.
struct SlitDiscShape {
  Expr index;
};

/// Graph domain x > phi(y); phi may depend on y and j.
struct HalfspaceGraphShape {
  Expr phi;
};

/// Strict sublevel set psi(x, y, j) < 0; r and s alias x and y.
struct SublevelShape {
  Expr psi;
};

using ShapeSpec = std::variant<DiscShape, RectShape, SlitDiscShape, HalfspaceGraphShape, SublevelShape>;

DiscShape disc(double cx, double cy, double radius);
RectShape rect(double cx, double cy, double half_w, double half_h);

/// Checks free-variable discipline for every parameter expression; `where`
/// names the shape in error messages.
void validate_shape(const ShapeSpec& shape, const std::string& where);

/// Rasterizes the shape at index j: a cell is set iff its center satisfies
/// the defining strict inequality. Degenerate parameters (radius <= 0,
/// half-width <= 0, slit index <= 0) raise SpecError.
GridMask rasterize_shape(const ShapeSpec& shape, const GridSpec& grid, double j = 0.0);

}  // namespace kernelconv
