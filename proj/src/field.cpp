#include "kernelconv/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "kernelconv/kernel.hpp"
#include "kernelconv/parallel.hpp"

namespace kernelconv {

namespace {

constexpr long snapshot_stride = 32;
constexpr double cross_check_boundary_delta = 0.05;

/// Cellwise max into acc.
void max_into(FieldGrid& acc, const FieldGrid& f) {
  for (std::size_t i = 0; i < acc.values.size(); ++i)
    acc.values[i] = std::max(acc.values[i], f.values[i]);
}

/// |a - b| that treats two equal infinities as zero distance.
double gap(double a, double b) { return a == b ? 0.0 : std::fabs(a - b); }

}  // namespace

ScalarFieldSeq ScalarFieldSeq::make(Expr expr, long j0, long j_max, int window, MonotoneHint hint) {
  ScalarFieldSeq s;
  s.expr = std::move(expr);
  s.j0 = j0;
  s.j_max = j_max;
  s.window = window;
  s.hint = hint;
  require_free_vars(s.expr, VarSet::of({Var::X, Var::Y, Var::R, Var::S, Var::J}), "field");
  if (s.window < 1) throw SpecError("field window must be at least 1");
  if (s.j0 < 1) throw SpecError("field start index must be at least 1");
  if (s.j_max < s.j0 + s.window)
    throw SpecError("field budget must cover the start index plus window");
  return s;
}

FieldGrid sample_field(const ScalarFieldSeq& seq, long j, const GridSpec& grid) {
  FieldGrid out(grid);
  const Expr& e = seq.expr;
  parallel_rows(grid.ny, [&](int y0, int y1) {
    for (int iy = y0; iy < y1; ++iy)
      for (int ix = 0; ix < grid.nx; ++ix) {
        Cell c{ix, iy};
        Point p = grid.center(c);
        EvalEnv env = EvalEnv::at_point(p.x, p.y, static_cast<double>(j));
        try {
          out.values[grid.index(c)] = e.eval(env);
        } catch (const EvalError& err) {
          throw FieldError("field at cell (" + std::to_string(ix) + ", " + std::to_string(iy) +
                           "), j=" + std::to_string(j) + ": " + err.what());
        }
      }
  });
  return out;
}

FieldGrid usc_regularize(const FieldGrid& f) {
  const GridSpec& g = f.spec;
  FieldGrid out(g);
  parallel_rows(g.ny, [&](int y0, int y1) {
    for (int iy = y0; iy < y1; ++iy)
      for (int ix = 0; ix < g.nx; ++ix) {
        double m = -std::numeric_limits<double>::infinity();
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            Cell n{ix + dx, iy + dy};
            if (g.contains(n)) m = std::max(m, f.at(n));
          }
        out.values[g.index({ix, iy})] = m;
      }
  });
  return out;
}

std::pair<FieldGrid, StabilizationReport> tail_sup(const ScalarFieldSeq& seq, long k,
                                                   const GridSpec& grid, double eps) {
  if (k < seq.j0) throw SpecError("tail_sup: k must be at least the field start index");
  StabilizationReport report;

  if (seq.hint == MonotoneHint::Decreasing) {
    report.stabilized = true;
    report.k_or_j_reached = k;
    report.window_held = seq.window;
    report.method = "exact";
    return {sample_field(seq, k, grid), report};
  }
  if (seq.hint == MonotoneHint::Increasing) {
    report.stabilized = false;
    report.k_or_j_reached = seq.j_max;
    report.window_held = 0;
    report.method = "budget";
    return {sample_field(seq, seq.j_max, grid), report};
  }

  FieldGrid acc = sample_field(seq, k, grid);
  int held = 0;
  long j = k;
  while (j < seq.j_max && held < seq.window) {
    ++j;
    FieldGrid next = sample_field(seq, j, grid);
    double delta = 0;
    for (std::size_t i = 0; i < acc.values.size(); ++i) {
      if (next.values[i] > acc.values[i]) {
        delta = std::max(delta, gap(next.values[i], acc.values[i]));
        acc.values[i] = next.values[i];
      }
    }
    held = delta < eps ? held + 1 : 0;
  }
  report.stabilized = held >= seq.window;
  report.k_or_j_reached = j;
  report.window_held = held;
  report.method = report.stabilized ? "window" : "budget";
  return {std::move(acc), report};
}

std::pair<FieldGrid, StabilizationReport> capital_psi(const ScalarFieldSeq& seq,
                                                      const GridSpec& grid, double eps) {
  const long lo = seq.j0;
  const long hi = seq.j_max;

  // Suffix sweep: snapshots of the exact suffix max every `snapshot_stride`
  // indices, so the ascending scan below can rebuild any suffix in O(stride).
  std::map<long, FieldGrid> snaps;
  {
    FieldGrid s = sample_field(seq, hi, grid);
    if ((hi - lo) % snapshot_stride == 0) snaps.emplace(hi, s);
    for (long j = hi - 1; j >= lo; --j) {
      max_into(s, sample_field(seq, j, grid));
      if ((j - lo) % snapshot_stride == 0) snaps.emplace(j, s);
    }
  }

  auto build_suffix = [&](long k) {
    long aligned = lo + ((k - lo + snapshot_stride - 1) / snapshot_stride) * snapshot_stride;
    FieldGrid s;
    long from;
    if (aligned <= hi) {
      s = snaps.at(aligned);
      from = aligned - 1;
    } else {
      s = sample_field(seq, hi, grid);
      from = hi - 1;
    }
    for (long j = from; j >= k; --j) max_into(s, sample_field(seq, j, grid));
    return s;
  };

  // Block cache: suffix maxima for a run of consecutive k, filled backward so
  // each entry costs one sample past the block seed.
  std::vector<FieldGrid> block;
  long block_lo = -1;
  auto suffix_at = [&](long k) -> const FieldGrid& {
    if (block_lo < 0 || k < block_lo || k >= block_lo + static_cast<long>(block.size())) {
      block_lo = k;
      long top = std::min(k + snapshot_stride - 1, hi);
      block.assign(top - k + 1, FieldGrid());
      block.back() = build_suffix(top);
      for (long idx = top - k - 1; idx >= 0; --idx) {
        block[idx] = block[idx + 1];
        max_into(block[idx], sample_field(seq, k + idx, grid));
      }
    }
    return block[k - block_lo];
  };

  const long k_cap = hi - seq.window;
  FieldGrid prev = usc_regularize(suffix_at(lo));
  StabilizationReport report;
  report.k_or_j_reached = lo;
  int held = 0;
  long k = lo;
  while (k < k_cap && held < seq.window) {
    ++k;
    FieldGrid cur = usc_regularize(suffix_at(k));
    double delta = 0;
    for (std::size_t i = 0; i < cur.values.size(); ++i) {
      if (cur.values[i] > prev.values[i])
        throw InternalError("capital_psi: envelope increased at k=" + std::to_string(k));
      delta = std::max(delta, gap(cur.values[i], prev.values[i]));
    }
    held = delta < eps ? held + 1 : 0;
    prev = std::move(cur);
  }
  report.stabilized = held >= seq.window;
  report.k_or_j_reached = k;
  report.window_held = held;
  report.method = report.stabilized ? "window" : "budget";
  return {std::move(prev), report};
}

PointedMask kernel_from_psi(const FieldGrid& psi, Point p_hat) {
  auto q = psi.spec.cell_at(p_hat);
  if (!q) throw SpecError("base point lies outside the grid window");
  if (!(psi.at(*q) < 0))
    throw TamenessError("base point is not interior to the sublevel set: envelope value there is " +
                        std::to_string(psi.at(*q)));
  GridMask sub(psi.spec);
  for (int iy = 0; iy < psi.spec.ny; ++iy)
    for (int ix = 0; ix < psi.spec.nx; ++ix)
      if (psi.at({ix, iy}) < 0) sub.set({ix, iy});
  return {connected_component(sub, *q), *q};
}

PointedMask kernel_from_psi(const ScalarFieldSeq& seq, Point p_hat, const GridSpec& grid) {
  return kernel_from_psi(capital_psi(seq, grid).first, p_hat);
}

BoundaryDiagnostic boundary_condition_diagnostic(const FieldGrid& psi, double delta) {
  BoundaryDiagnostic diag;
  diag.delta = delta;
  GridMask sub(psi.spec);
  for (int iy = 0; iy < psi.spec.ny; ++iy)
    for (int ix = 0; ix < psi.spec.nx; ++ix)
      if (psi.at({ix, iy}) < 0) sub.set({ix, iy});
  std::vector<int> dist = chebyshev_cell_distance(boundary_cells(sub));
  for (int iy = 0; iy < psi.spec.ny; ++iy)
    for (int ix = 0; ix < psi.spec.nx; ++ix) {
      Cell c{ix, iy};
      double v = psi.at(c);
      if (v >= -delta && v <= 0 && dist[psi.spec.index(c)] > 2) diag.violations.push_back(c);
    }
  diag.ok = diag.violations.empty();
  return diag;
}

CrossCheckResult cross_check_sublevel(const ScalarFieldSeq& seq, Point p_hat, const GridSpec& grid,
                                      int band) {
  if (seq.j0 != 1)
    throw ClassError("sublevel cross-check needs the field indexed from 1");

  CrossCheckResult res;
  res.band_allowed = band;

  // Route one: rasterize each {psi_j < 0} as a domain and take the pointed
  // set limit of the sequence.
  DomainSequenceSpec dom = DomainSequenceSpec::make(
      grid, {}, FunctionalTail{SublevelShape{seq.expr}, seq.j0, seq.j_max, seq.window},
      Expr::constant(p_hat.x), Expr::constant(p_hat.y), p_hat);
  SequenceEvaluator ev(dom);
  try {
    res.kernel_domains = kernel(ev).pointed;
  } catch (const TamenessError& e) {
    res.warnings.push_back(std::string("domain route: ") + e.what());
    GridMask pk = pre_kernel(ev);
    GridMask comp = connected_component(pk, ev.limit_cell());
    res.kernel_domains = comp.any() ? PointedMask{std::move(comp), ev.limit_cell()}
                                    : PointedMask::empty(grid);
  }

  // Route two: the regularized limit envelope and its strict sublevel set.
  auto [psi, psi_report] = capital_psi(seq, grid);
  if (!psi_report.stabilized)
    res.warnings.push_back("envelope stopped on budget at k=" +
                           std::to_string(psi_report.k_or_j_reached));
  try {
    res.kernel_psi = kernel_from_psi(psi, p_hat);
  } catch (const TamenessError& e) {
    res.warnings.push_back(std::string("sublevel route: ") + e.what());
    res.kernel_psi = PointedMask::empty(grid);
  }

  GridMask sub(grid);
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix)
      if (psi.at({ix, iy}) < 0) sub.set({ix, iy});
  int comps = component_count(sub);
  res.component_hypothesis_ok = comps <= 1;
  if (!res.component_hypothesis_ok)
    res.warnings.push_back("sublevel set splits into " + std::to_string(comps) +
                           " components; the comparison only sees the pointed one");

  BoundaryDiagnostic bd = boundary_condition_diagnostic(psi, cross_check_boundary_delta);
  res.boundary_hypothesis_ok = bd.ok;
  if (!bd.ok)
    res.warnings.push_back("flat boundary: " + std::to_string(bd.violations.size()) +
                           " near-zero cells lie far from the sublevel boundary");

  BandCompare cmp = masks_equal_within_band(res.kernel_domains.mask, res.kernel_psi.mask, band);
  res.equal = cmp.equal;
  res.band_measured = cmp.measured_band;
  res.mismatches = cmp.mismatches;
  return res;
}

}  // namespace kernelconv
