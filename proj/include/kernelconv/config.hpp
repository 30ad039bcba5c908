#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kernelconv/field.hpp"
#include "kernelconv/sequences.hpp"

namespace kernelconv {

/// Knobs shared by the commands; every field has a default.
struct RunParams {
  int band = 2;
  int trials = 50;
  std::uint64_t seed = 42;
  long monotone_budget = 32;
  double eps_sup = default_eps_sup;
  double boundary_delta = 0.05;
  std::vector<long> hausdorff_js = {4, 8, 16, 32};
  std::vector<long> render_js = {1};
  std::optional<ShapeSpec> reference_shape;  ///< hausdorff comparison target
  std::optional<ShapeSpec> candidate_shape;  ///< normal-verify candidate (default: computed kernel)
};

/// Parsed and validated run configuration.
struct RunConfig {
  GridSpec grid;
  std::optional<DomainSequenceSpec> sequence;
  std::optional<ScalarFieldSeq> field;
  std::optional<Point> field_point;  ///< base point for the sublevel pipeline
  RunParams params;
  std::string digest;       ///< FNV-1a 64 of the raw config bytes, hex
  std::string source_path;  ///< as given on the command line
};

/// Loads a config file. Unknown keys, missing required keys, and malformed
/// values raise ValidationError with a JSON-pointer-style path.
RunConfig load_config(const std::string& path);

/// Parses config text (path only labels messages and the digest source).
RunConfig parse_config(const std::string& text, const std::string& path);

}  // namespace kernelconv
