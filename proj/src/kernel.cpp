#include "kernelconv/kernel.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <string>

namespace kernelconv {

namespace {

void require_tamed(const SequenceEvaluator& seq) {
  TamenessReport t = seq.tameness_check();
  if (!t.tamed)
    throw TamenessError("sequence is not tamed (" + t.reason + "), pointed set limit is undefined");
}

long residue_count(const SequenceEvaluator& seq) {
  if (seq.spec().functional())
    throw ClassError("residue subsequences need a Constant or Periodic tail");
  return seq.spec().period();
}

std::vector<int> checked_residues(const SequenceEvaluator& seq, const std::vector<int>& residues) {
  const long m = residue_count(seq);
  if (residues.empty()) throw SpecError("residue subset must be nonempty");
  std::set<int> uniq;
  for (int r : residues) {
    if (r < 0 || r >= m)
      throw SpecError("residue index " + std::to_string(r) + " out of range for period " +
                      std::to_string(m));
    uniq.insert(r);
  }
  return {uniq.begin(), uniq.end()};
}

}  // namespace

KernelResult kernel(const SequenceEvaluator& seq) {
  require_tamed(seq);
  const Cell q = seq.limit_cell();
  const long stop = seq.outer_stop();

  GridMask acc(seq.spec().grid);
  long first_k = 0;
  for (long k = 1; k <= stop; ++k) {
    GridMask comp = connected_component(interior(seq.tail_intersection(k).first), q);
    if (!comp.any()) continue;
    if (first_k == 0) first_k = k;
    unite_into(acc, comp);
  }

  KernelResult res;
  res.k_stabilized = first_k;
  res.stabilization = seq.outer_report();
  res.pointed = acc.any() ? PointedMask{std::move(acc), q} : PointedMask::empty(seq.spec().grid);
  return res;
}

GridMask pre_kernel(const SequenceEvaluator& seq) {
  const long stop = seq.outer_stop();
  GridMask acc(seq.spec().grid);
  for (long k = 1; k <= stop; ++k) unite_into(acc, interior(seq.tail_intersection(k).first));
  return acc;
}

GridMask liminf_set(const SequenceEvaluator& seq) {
  const long stop = seq.outer_stop();
  GridMask acc(seq.spec().grid);
  for (long k = 1; k <= stop; ++k) unite_into(acc, seq.tail_intersection(k).first);
  return acc;
}

KernelResult kernel_monotone(const SequenceEvaluator& seq, Monotone direction, long check_budget) {
  require_tamed(seq);
  const Cell q = seq.limit_cell();
  const long stop = seq.outer_stop();

  for (long j = 1; j <= check_budget; ++j) {
    const GridMask& a = seq.domain_at(j);
    const GridMask& b = seq.domain_at(j + 1);
    bool ok = direction == Monotone::Increasing ? subset_of(a, b) : subset_of(b, a);
    if (!ok)
      throw MonotoneError("domains fail to nest " +
                          std::string(direction == Monotone::Increasing ? "upward" : "downward") +
                          " between indices " + std::to_string(j) + " and " + std::to_string(j + 1));
  }

  // Increasing: the tails recover each domain, so the union over the outer
  // range dominates and one component extraction suffices. Decreasing: every
  // tail intersection equals the first one.
  GridMask base(seq.spec().grid);
  long k_stab = 1;
  if (direction == Monotone::Increasing) {
    for (long j = 1; j <= stop; ++j) unite_into(base, seq.domain_at(j));
    k_stab = stop;
  } else {
    base = seq.tail_intersection(1).first;
  }

  GridMask comp = connected_component(interior(base), q);
  KernelResult res;
  res.k_stabilized = comp.any() ? k_stab : 0;
  res.stabilization = seq.outer_report();
  res.pointed =
      comp.any() ? PointedMask{std::move(comp), q} : PointedMask::empty(seq.spec().grid);
  return res;
}

PointedMask kernel_of_residue_subset(const SequenceEvaluator& seq, const std::vector<int>& residues) {
  std::vector<int> rs = checked_residues(seq, residues);
  const long P = seq.spec().prefix_len();
  const Cell q = seq.limit_cell();

  // Only the residues repeated forever survive in a deep tail, so the
  // subsequence kernel is the component of the eroded AND over the subset.
  GridMask acc(seq.spec().grid, true);
  for (int r : rs) intersect_into(acc, seq.domain_at(P + 1 + r));
  GridMask comp = connected_component(interior(acc), q);
  return comp.any() ? PointedMask{std::move(comp), q} : PointedMask::empty(seq.spec().grid);
}

ConvergenceVerdict convergence_check(const SequenceEvaluator& seq) {
  const long m = residue_count(seq);
  KernelResult full = kernel(seq);

  ConvergenceVerdict verdict;
  std::vector<int> all(m);
  for (int r = 0; r < m; ++r) {
    all[r] = r;
    verdict.residue_kernels.emplace(r, kernel_of_residue_subset(seq, {r}));
  }

  // Subset antitonicity sandwiches every subsequence kernel between the full
  // kernel and a singleton kernel, so singleton agreement decides the verdict.
  verdict.converges = true;
  for (int r = 0; r < m && verdict.converges; ++r)
    verdict.converges = verdict.residue_kernels.at(r).mask == full.pointed.mask;
  if (verdict.converges) return verdict;

  for (int r = 0; r < m && !verdict.witness; ++r)
    for (int s = r + 1; s < m && !verdict.witness; ++s)
      if (!(verdict.residue_kernels.at(r).mask == verdict.residue_kernels.at(s).mask))
        verdict.witness = {{r}, {s}};
  if (!verdict.witness)
    for (int r = 0; r < m && !verdict.witness; ++r)
      if (!(verdict.residue_kernels.at(r).mask == full.pointed.mask))
        verdict.witness = {{r}, all};
  return verdict;
}

SelectionResult select_subsequence(const SequenceEvaluator& seq) {
  const long m = residue_count(seq);
  require_tamed(seq);

  std::vector<PointedMask> kernels;
  for (int r = 0; r < m; ++r) kernels.push_back(kernel_of_residue_subset(seq, {r}));

  SelectionResult sel;
  for (int r = 0; r < m; ++r) {
    bool dominated = false;
    for (int s = 0; s < m && !dominated; ++s) {
      if (s == r) continue;
      dominated = subset_of(kernels[r].mask, kernels[s].mask) &&
                  !(kernels[r].mask == kernels[s].mask);
    }
    if (!dominated) sel.maximal_residues.push_back(r);
  }
  // Every kernel being dominated is impossible in a finite poset.
  sel.residue = sel.maximal_residues.front();
  sel.residue_label = sel.residue + 1;
  sel.kernel = kernels[sel.residue];
  return sel;
}

namespace {

/// Random 4-connected submask of `host` through q: breadth-first growth where
/// each frontier cell joins with probability p, up to size_cap cells.
GridMask random_connected_submask(const GridMask& host, Cell q, std::mt19937_64& rng,
                                  std::size_t size_cap, double p) {
  GridMask out(host.spec());
  if (!host.test(q)) return out;
  auto coin = [&rng, p] {
    return (static_cast<double>(rng() >> 11) * 0x1.0p-53) < p;
  };
  std::vector<Cell> queue{q};
  out.set(q);
  std::size_t taken = 1;
  const int dx[4] = {1, -1, 0, 0};
  const int dy[4] = {0, 0, 1, -1};
  for (std::size_t head = 0; head < queue.size() && taken < size_cap; ++head) {
    Cell c = queue[head];
    for (int d = 0; d < 4 && taken < size_cap; ++d) {
      Cell n{c.x + dx[d], c.y + dy[d]};
      if (!host.spec().contains(n) || !host.test(n) || out.test(n)) continue;
      if (!coin()) continue;
      out.set(n);
      queue.push_back(n);
      ++taken;
    }
  }
  return out;
}

}  // namespace

bool normal_limit_verify(const SequenceEvaluator& seq, const PointedMask& candidate, int trials,
                         std::uint64_t rng_seed) {
  const Cell q = seq.limit_cell();
  if (!candidate.is_empty() && !(*candidate.point == q)) return false;
  const long stop = seq.outer_stop();

  // Deep tails dominate, so one eroded tail intersection absorbs every
  // admissible test set.
  GridMask absorber = interior(seq.tail_intersection(stop).first);

  // Inward direction: every pointed component of an eroded tail intersection
  // must already lie in the candidate.
  for (long k = 1; k <= stop; ++k) {
    GridMask comp = connected_component(interior(seq.tail_intersection(k).first), q);
    if (candidate.is_empty()) {
      if (comp.any()) return false;
    } else if (!subset_of(comp, candidate.mask)) {
      return false;
    }
  }
  if (candidate.is_empty()) return true;

  // Outward direction, extreme test set first: the whole eroded candidate.
  if (!subset_of(connected_component(interior(candidate.mask), q), absorber)) return false;

  // Randomized test sets: eroded components of random connected submasks.
  std::mt19937_64 rng(rng_seed);
  const std::size_t cells = candidate.mask.count();
  for (int t = 0; t < trials; ++t) {
    std::size_t cap = 1 + static_cast<std::size_t>(rng() % std::max<std::size_t>(cells, 1));
    double p = 0.3 + 0.6 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    GridMask sub = random_connected_submask(candidate.mask, q, rng, cap, p);
    if (!subset_of(connected_component(interior(sub), q), absorber)) return false;
  }
  return true;
}

}  // namespace kernelconv
