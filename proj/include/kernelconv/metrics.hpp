#pragma once

#include "kernelconv/grid.hpp"

namespace kernelconv {

/// One-cell 3x3 Chebyshev dilation (grid closure). closure(empty) = empty.
GridMask closure(const GridMask& a);

/// Distance, in length units, from each cell to the nearest set cell.
/// Chebyshev cell distances scaled by max(hx, hy); zero exactly on set cells,
/// changes by at most one cell step between neighbors.
struct DistanceField {
  GridSpec spec;
  std::vector<double> dist;
};

DistanceField distance_field(const GridMask& a);

/// Symmetric Hausdorff distance between two nonempty masks on the same
/// window, in length units (Chebyshev cell metric). Empty operand or window
/// mismatch raises MetricError.
double hausdorff_distance(const GridMask& a, const GridMask& b);

}  // namespace kernelconv
