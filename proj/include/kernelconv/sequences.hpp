#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "kernelconv/shapes.hpp"

namespace kernelconv {

/// Tail rules fix the sequence beyond the finite prefix. Constant repeats one
/// domain, Periodic cycles through m of them, Functional evaluates a shape
/// template at each index j under an evaluation budget.
struct ConstantTail {
  ShapeSpec shape;
};

struct PeriodicTail {
  std::vector<ShapeSpec> shapes;
};

struct FunctionalTail {
  ShapeSpec shape;
  long j0 = 1;
  long j_max = 512;
  int window = 5;
};

using TailRule = std::variant<ConstantTail, PeriodicTail, FunctionalTail>;

/// Pointed domain sequence (G_j, p_j) with declared limit point. Indices are
/// 1-based: prefix shapes cover j = 1..P, the tail rule covers j > P.
struct DomainSequenceSpec {
  GridSpec grid;
  std::vector<ShapeSpec> prefix;
  TailRule tail;
  Expr track_x, track_y;  ///< p_j as expressions in j
  Point declared_limit;

  static DomainSequenceSpec make(GridSpec grid, std::vector<ShapeSpec> prefix, TailRule tail,
                                 Expr track_x, Expr track_y, Point declared_limit);

  long prefix_len() const { return static_cast<long>(prefix.size()); }
  /// Period of the tail rule (Constant counts as 1, Functional as 0).
  long period() const;
  long j_max() const;
  int window() const;
  bool functional() const { return std::holds_alternative<FunctionalTail>(tail); }

  Point track_at(long j) const;
};

struct StabilizationReport {
  bool stabilized = false;
  long k_or_j_reached = 0;
  int window_held = 0;
  std::string method;  ///< "exact", "window", or "budget"
};

struct TamenessReport {
  bool tamed = false;
  long k = 0;
  double ball_radius = 0;
  /// "budget" when no ball was certified within the k budget, "geometry" when
  /// the base cell is unset in every tail intersection tried, "point-track"
  /// when p_j fails to approach the declared limit.
  std::string reason;
  bool point_track_ok = false;
  double point_track_gap = 0;
};

/// Memoizing evaluator for one sequence. Rasterized domains are cached by
/// index, and the stream quiescence index (first k opening a `window`-long
/// unchanged run that also matches the raster at the doubled index) is
/// computed once; every outer accumulation loop shares it so cross-route
/// identities hold exactly.
class SequenceEvaluator {
 public:
  explicit SequenceEvaluator(DomainSequenceSpec spec);

  const DomainSequenceSpec& spec() const { return spec_; }

  /// Rasterized G_j (1-based, cached). j < 1 raises SpecError.
  const GridMask& domain_at(long j) const;

  /// Intersection of G_j over j >= k. Constant and Periodic tails reduce
  /// exactly (one period past the prefix); Functional tails iterate until the
  /// running mask is unchanged for `window` consecutive steps and is still a
  /// subset of the domain at the doubled index (so slow drifts with long
  /// pauses between cell crossings keep iterating), or j reaches j_max, and
  /// the report says which.
  std::pair<GridMask, StabilizationReport> tail_intersection(long k) const;

  /// Last index of the shared outer loop: prefix + one period for Constant
  /// and Periodic tails; for Functional tails the start of the first run
  /// where the raster stream is quiescent for `window` steps and agrees with
  /// the raster at the doubled index (or j_max - window when the budget runs
  /// out first).
  long outer_stop() const;
  bool outer_stabilized() const;
  StabilizationReport outer_report() const;

  TamenessReport tameness_check() const;

  /// Base cell of the declared limit; SpecError when it lies outside the window.
  Cell limit_cell() const;

 private:
  const GridMask& raster_for(long canonical_j) const;
  long canonical_index(long j) const;

  DomainSequenceSpec spec_;
  mutable std::map<long, GridMask> cache_;
  mutable std::map<long, std::pair<GridMask, StabilizationReport>> tail_cache_;
  mutable long outer_stop_ = -1;
  mutable bool outer_stabilized_ = false;
  mutable int outer_window_held_ = 0;
};

GridMask domain_at(const DomainSequenceSpec& seq, long j);
std::pair<GridMask, StabilizationReport> tail_intersection(const DomainSequenceSpec& seq, long k);
TamenessReport tameness_check(const DomainSequenceSpec& seq);

}  // namespace kernelconv
