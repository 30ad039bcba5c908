#pragma once

#include <string>
#include <utility>
#include <vector>

#include "kernelconv/grid.hpp"
#include "kernelconv/sequences.hpp"

namespace kernelconv {

/// Scalar samples at cell centers. -infinity is representable; +infinity and
/// NaN are rejected at the point of production.
struct FieldGrid {
  GridSpec spec;
  std::vector<double> values;

  FieldGrid() = default;
  explicit FieldGrid(const GridSpec& s, double fill = 0) : spec(s), values(s.cells(), fill) {}
  double at(Cell c) const { return values[spec.index(c)]; }
};

enum class MonotoneHint { None, Increasing, Decreasing };

/// Sequence of scalar fields psi_j given by one expression in x, y (aliases
/// r, s) and j, under the same budget parameters as functional tails.
struct ScalarFieldSeq {
  Expr expr;
  long j0 = 1;
  long j_max = 512;
  int window = 5;
  MonotoneHint hint = MonotoneHint::None;

  static ScalarFieldSeq make(Expr expr, long j0, long j_max, int window, MonotoneHint hint);
};

constexpr double default_eps_sup = 1e-9;

/// Evaluates psi_j at every cell center. NaN or +infinity raises FieldError
/// naming the cell; -infinity (log of zero) is kept.
FieldGrid sample_field(const ScalarFieldSeq& seq, long j, const GridSpec& grid);

/// Upper-semicontinuous regularization: one pass of the 3x3 neighborhood max,
/// clipped at the window edge. Absorbs isolated -infinity dips.
FieldGrid usc_regularize(const FieldGrid& f);

/// Cellwise supremum of psi_j over j >= k. Monotone hints shortcut the loop
/// (increasing: single evaluation at j_max, flagged budget-limited;
/// decreasing: exact evaluation at k). Without a hint the running max runs
/// until the per-cell change stays below eps for `window` consecutive steps
/// or j reaches j_max.
std::pair<FieldGrid, StabilizationReport> tail_sup(const ScalarFieldSeq& seq, long k,
                                                   const GridSpec& grid,
                                                   double eps = default_eps_sup);

/// The regularized limit envelope: cellwise running min over k of
/// usc_regularize(sup over j >= k), nonincreasing in k by construction
/// (violations raise InternalError). Tail suprema are evaluated exactly over
/// [k, j_max] by a suffix sweep; the outer loop stops once the per-cell
/// change stays below eps for `window` consecutive k.
std::pair<FieldGrid, StabilizationReport> capital_psi(const ScalarFieldSeq& seq, const GridSpec& grid,
                                                      double eps = default_eps_sup);

/// Strict sublevel set {Psi < 0} pointed at p_hat's cell, restricted to its
/// 4-connected component. Psi(p_hat) >= 0 raises TamenessError.
PointedMask kernel_from_psi(const FieldGrid& psi, Point p_hat);
PointedMask kernel_from_psi(const ScalarFieldSeq& seq, Point p_hat, const GridSpec& grid);

struct BoundaryDiagnostic {
  bool ok = true;
  double delta = 0;
  std::vector<Cell> violations;  ///< near-zero cells far from the sublevel boundary
};

/// Flags cells with Psi in [-delta, 0] lying more than two cells from the
/// boundary of {Psi < 0}: evidence of a flat spot where the sublevel
/// hypothesis {Psi <= 0} interior = {Psi < 0} fails.
BoundaryDiagnostic boundary_condition_diagnostic(const FieldGrid& psi, double delta);

struct CrossCheckResult {
  bool equal = false;
  int band_allowed = 2;
  int band_measured = 0;
  std::size_t mismatches = 0;
  bool component_hypothesis_ok = true;  ///< {Psi < 0} connected
  bool boundary_hypothesis_ok = true;
  std::vector<std::string> warnings;
  PointedMask kernel_domains;
  PointedMask kernel_psi;
};

/// Dual-route agreement check: the kernel of the rasterized domain sequence
/// ({psi_j < 0}, p_hat) against the sublevel set of capital_psi, compared
/// within `band`. Hypothesis violations (disconnected sublevel set, flat
/// boundary) are reported as warnings rather than failures.
CrossCheckResult cross_check_sublevel(const ScalarFieldSeq& seq, Point p_hat, const GridSpec& grid,
                                      int band = 2);

}  // namespace kernelconv
