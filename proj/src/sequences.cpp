#include "kernelconv/sequences.hpp"

#include <algorithm>
#include <cmath>

namespace kernelconv {

namespace {

constexpr long fallback_j_max = 512;

const ShapeSpec& tail_shape(const TailRule& tail, long residue) {
  if (const auto* c = std::get_if<ConstantTail>(&tail)) return c->shape;
  if (const auto* p = std::get_if<PeriodicTail>(&tail)) return p->shapes[residue];
  return std::get<FunctionalTail>(tail).shape;
}

}  // namespace

DomainSequenceSpec DomainSequenceSpec::make(GridSpec grid, std::vector<ShapeSpec> prefix,
                                            TailRule tail, Expr track_x, Expr track_y,
                                            Point declared_limit) {
  DomainSequenceSpec s;
  s.grid = grid;
  s.prefix = std::move(prefix);
  s.tail = std::move(tail);
  s.track_x = std::move(track_x);
  s.track_y = std::move(track_y);
  s.declared_limit = declared_limit;

  for (std::size_t i = 0; i < s.prefix.size(); ++i)
    validate_shape(s.prefix[i], "prefix[" + std::to_string(i + 1) + "]");
  if (const auto* p = std::get_if<PeriodicTail>(&s.tail)) {
    if (p->shapes.empty()) throw SpecError("periodic tail needs at least one shape");
    for (std::size_t i = 0; i < p->shapes.size(); ++i)
      validate_shape(p->shapes[i], "tail residue " + std::to_string(i));
  } else if (const auto* c = std::get_if<ConstantTail>(&s.tail)) {
    validate_shape(c->shape, "constant tail");
  } else {
    const auto& f = std::get<FunctionalTail>(s.tail);
    validate_shape(f.shape, "functional tail");
    if (f.window < 1) throw SpecError("functional tail window must be at least 1");
    if (f.j0 < 1) throw SpecError("functional tail start index must be at least 1");
    if (f.j_max < f.j0 + f.window)
      throw SpecError("functional tail budget must cover start index plus window");
    if (f.j0 > s.prefix_len() + 1)
      throw SpecError("functional tail start index exceeds the first tail position");
  }

  const VarSet index_only = VarSet::of({Var::J});
  require_free_vars(s.track_x, index_only, "point track x");
  require_free_vars(s.track_y, index_only, "point track y");
  return s;
}

long DomainSequenceSpec::period() const {
  if (std::holds_alternative<ConstantTail>(tail)) return 1;
  if (const auto* p = std::get_if<PeriodicTail>(&tail)) return static_cast<long>(p->shapes.size());
  return 0;
}

long DomainSequenceSpec::j_max() const {
  if (const auto* f = std::get_if<FunctionalTail>(&tail)) return f->j_max;
  return fallback_j_max;
}

int DomainSequenceSpec::window() const {
  if (const auto* f = std::get_if<FunctionalTail>(&tail)) return f->window;
  return 5;
}

Point DomainSequenceSpec::track_at(long j) const {
  EvalEnv env = EvalEnv::at_index(static_cast<double>(j));
  return {track_x.eval(env), track_y.eval(env)};
}

SequenceEvaluator::SequenceEvaluator(DomainSequenceSpec spec) : spec_(std::move(spec)) {}

long SequenceEvaluator::canonical_index(long j) const {
  if (j < 1) throw SpecError("sequence index must be at least 1");
  const long P = spec_.prefix_len();
  if (j <= P) return j;
  if (std::holds_alternative<ConstantTail>(spec_.tail)) return P + 1;
  if (const auto* p = std::get_if<PeriodicTail>(&spec_.tail)) {
    const long m = static_cast<long>(p->shapes.size());
    return P + 1 + (j - P - 1) % m;
  }
  return j;
}

const GridMask& SequenceEvaluator::raster_for(long canonical_j) const {
  auto it = cache_.find(canonical_j);
  if (it != cache_.end()) return it->second;

  const long P = spec_.prefix_len();
  GridMask mask = (canonical_j <= P)
                      ? rasterize_shape(spec_.prefix[canonical_j - 1], spec_.grid,
                                        static_cast<double>(canonical_j))
                      : rasterize_shape(tail_shape(spec_.tail, canonical_j - P - 1), spec_.grid,
                                        static_cast<double>(canonical_j));
  return cache_.emplace(canonical_j, std::move(mask)).first->second;
}

const GridMask& SequenceEvaluator::domain_at(long j) const { return raster_for(canonical_index(j)); }

std::pair<GridMask, StabilizationReport> SequenceEvaluator::tail_intersection(long k) const {
  if (k < 1) throw SpecError("tail_intersection: k must be at least 1");
  auto hit = tail_cache_.find(k);
  if (hit != tail_cache_.end()) return hit->second;
  const long P = spec_.prefix_len();
  StabilizationReport report;

  if (!spec_.functional()) {
    // Constant and Periodic tails reduce exactly: the prefix terms from k on,
    // then one full period (every residue repeats forever regardless of k).
    const long m = spec_.period();
    GridMask acc(spec_.grid, true);
    for (long j = k; j <= P; ++j) intersect_into(acc, domain_at(j));
    const long first_tail = std::max(k, P + 1);
    for (long r = 0; r < m; ++r) intersect_into(acc, domain_at(P + 1 + r));
    report.stabilized = true;
    report.k_or_j_reached = first_tail + m - 1;
    report.window_held = spec_.window();
    report.method = "exact";
    return tail_cache_.emplace(k, std::make_pair(std::move(acc), report)).first->second;
  }

  // A quiet window alone is not enough: slowly drifting streams (tip moving
  // like 1/j) pause for many steps between cell crossings. A run only counts
  // once the accumulated mask also survives the term at the doubled index.
  const long j_max = spec_.j_max();
  const int window = spec_.window();
  GridMask acc = domain_at(k);
  int held = 0;
  long j = k;
  bool accepted = false;
  while (j < j_max && !accepted) {
    ++j;
    bool changed = intersect_into(acc, domain_at(j));
    held = changed ? 0 : held + 1;
    if (held >= window) accepted = subset_of(acc, domain_at(std::min(2 * j, j_max)));
  }
  report.stabilized = accepted;
  report.k_or_j_reached = j;
  report.window_held = held;
  report.method = report.stabilized ? "window" : "budget";
  return tail_cache_.emplace(k, std::make_pair(std::move(acc), report)).first->second;
}

long SequenceEvaluator::outer_stop() const {
  if (outer_stop_ >= 0) return outer_stop_;
  const long P = spec_.prefix_len();
  if (!spec_.functional()) {
    outer_stop_ = P + spec_.period();
    outer_stabilized_ = true;
    outer_window_held_ = spec_.window();
    return outer_stop_;
  }

  // First tail index where the domain raster stream stays unchanged for
  // `window` consecutive steps AND still matches the raster at the doubled
  // index. The second condition screens out slow drifts (features moving
  // like 1/j) whose cell crossings pause longer than the window. Every outer
  // accumulation loop shares this stop, which is what makes dual-route
  // identities exact on the grid.
  const long j_max = spec_.j_max();
  const int window = spec_.window();
  int held = 0;
  long j = P + 1;
  bool accepted = false;
  while (j < j_max && !accepted) {
    bool same = domain_at(j) == domain_at(j + 1);
    held = same ? held + 1 : 0;
    ++j;
    if (held >= window) accepted = domain_at(j) == domain_at(std::min(2 * j, j_max));
  }
  outer_stabilized_ = accepted;
  outer_window_held_ = held;
  outer_stop_ = std::max<long>(accepted ? j - held : j_max - window, P + 1);
  return outer_stop_;
}

bool SequenceEvaluator::outer_stabilized() const {
  outer_stop();
  return outer_stabilized_;
}

StabilizationReport SequenceEvaluator::outer_report() const {
  StabilizationReport r;
  r.k_or_j_reached = outer_stop();
  r.stabilized = outer_stabilized_;
  r.window_held = outer_window_held_;
  r.method = spec_.functional() ? (outer_stabilized_ ? "window" : "budget") : "exact";
  return r;
}

Cell SequenceEvaluator::limit_cell() const {
  auto c = spec_.grid.cell_at(spec_.declared_limit);
  if (!c) throw SpecError("declared limit point lies outside the grid window");
  return *c;
}

TamenessReport SequenceEvaluator::tameness_check() const {
  TamenessReport report;
  const GridSpec& g = spec_.grid;
  const double h = g.hmax();

  Point tracked = spec_.track_at(spec_.j_max());
  report.point_track_gap = std::max(std::fabs(tracked.x - spec_.declared_limit.x),
                                    std::fabs(tracked.y - spec_.declared_limit.y));
  report.point_track_ok = report.point_track_gap <= 2 * h;
  if (!report.point_track_ok) {
    report.reason = "point-track";
    return report;
  }

  const Cell q = limit_cell();
  const long P = spec_.prefix_len();
  const long k_max = spec_.functional() ? P + spec_.window() : P + 2 * spec_.period();
  const double half_span = 0.5 * std::min(g.extent.x - g.origin.x, g.extent.y - g.origin.y);

  bool point_ever_inside = false;
  for (long k = 1; k <= k_max; ++k) {
    GridMask tail = tail_intersection(k).first;
    if (!tail.test(q)) continue;
    point_ever_inside = true;

    auto ball_fits = [&](double r) {
      return subset_of(rasterize_shape(disc(spec_.declared_limit.x, spec_.declared_limit.y, r), g),
                       tail);
    };

    // Coarse dyadic descent from half the window span, then dyadic bisection
    // back toward the preceding failure, to within half a cell.
    double lo = 0, hi = half_span * 2;
    for (double r = half_span; r >= 2 * h; r *= 0.5) {
      if (ball_fits(r)) {
        lo = r;
        break;
      }
      hi = r;
    }
    if (lo == 0) continue;
    while (hi - lo > 0.5 * h) {
      double mid = 0.5 * (lo + hi);
      if (ball_fits(mid))
        lo = mid;
      else
        hi = mid;
    }
    report.tamed = true;
    report.k = k;
    report.ball_radius = lo;
    return report;
  }

  report.reason = point_ever_inside ? "budget" : "geometry";
  return report;
}

GridMask domain_at(const DomainSequenceSpec& seq, long j) {
  return SequenceEvaluator(seq).domain_at(j);
}

std::pair<GridMask, StabilizationReport> tail_intersection(const DomainSequenceSpec& seq, long k) {
  return SequenceEvaluator(seq).tail_intersection(k);
}

TamenessReport tameness_check(const DomainSequenceSpec& seq) {
  return SequenceEvaluator(seq).tameness_check();
}

}  // namespace kernelconv
