#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "kernelconv/sequences.hpp"

namespace kernelconv {

struct KernelResult {
  PointedMask pointed;
  long k_stabilized = 0;
  StabilizationReport stabilization;
};

/// Set limit of the pointed sequence: union over k of the connected component
/// at the base cell of the eroded tail intersection. Requires tameness
/// (TamenessError otherwise); the base cell is set whenever the result is
/// nonempty, and the EMPTY sentinel means no eroded tail intersection
/// contained it.
KernelResult kernel(const SequenceEvaluator& seq);

/// Union over k of the eroded tail intersections, with no component
/// extraction. Open but possibly disconnected; no tameness requirement.
GridMask pre_kernel(const SequenceEvaluator& seq);

/// Union over k of the raw tail intersections (no erosion).
GridMask liminf_set(const SequenceEvaluator& seq);

enum class Monotone { Increasing, Decreasing };

/// Shortcut for verified monotone sequences. Increasing: component of the
/// eroded union of domains. Decreasing: component of the eroded full
/// intersection. Sampled pairs G_j, G_{j+1} up to check_budget must nest in
/// the claimed direction (MonotoneError names the first failure). Matches
/// kernel() exactly because both sides run over the shared outer loop.
KernelResult kernel_monotone(const SequenceEvaluator& seq, Monotone direction, long check_budget = 32);

/// Kernel of any subsequence whose infinitely repeated residues are exactly S
/// (0-based tail positions). Periodic or Constant tail only (ClassError);
/// empty or out-of-range S raises SpecError. May be the EMPTY sentinel.
PointedMask kernel_of_residue_subset(const SequenceEvaluator& seq, const std::vector<int>& residues);

struct ConvergenceVerdict {
  bool converges = false;
  /// Two residue subsets whose subsequence kernels differ, present iff not converging.
  std::optional<std::pair<std::vector<int>, std::vector<int>>> witness;
  std::map<int, PointedMask> residue_kernels;
};

/// A periodic sequence converges to its kernel iff every singleton residue
/// subsequence reproduces the full kernel exactly.
ConvergenceVerdict convergence_check(const SequenceEvaluator& seq);

struct SelectionResult {
  int residue = 0;        ///< 0-based tail position of the chosen residue
  int residue_label = 1;  ///< same residue, 1-based as reported
  PointedMask kernel;
  std::vector<int> maximal_residues;  ///< all 0-based residues with maximal kernels
};

/// Picks the constant subsequence with set-maximal kernel among singleton
/// residues (smallest residue on ties). Requires a tamed Periodic or
/// Constant sequence.
SelectionResult select_subsequence(const SequenceEvaluator& seq);

/// Randomized falsifier for the two-sided normal-limit characterization:
/// (1) every compact connected test set inside the candidate that contains
/// the base point must land in some eroded tail intersection, and (2) every
/// connected set through the base point inside an eroded tail intersection
/// must land in the candidate. Test sets are erosions of random connected
/// submasks of the candidate plus erosions of tail intersections. Agreement
/// with kernel() is the expected outcome exactly when the candidate is the
/// kernel.
bool normal_limit_verify(const SequenceEvaluator& seq, const PointedMask& candidate, int trials,
                         std::uint64_t rng_seed);

}  // namespace kernelconv
