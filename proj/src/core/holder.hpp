#pragma once

#include <cstdint>
#include <string>

#include "core/field.hpp"

namespace qpat {

struct HolderNorm {
  double sup = 0;        // sup |f| over the region
  double seminorm = 0;   // sup |f(x)-f(y)| / |x-y|^alpha
  double total = 0;      // sup + seminorm
  bool exact = true;     // false when the pair set was sampled
  std::uint64_t pairs_evaluated = 0;
};

/// Discrete Hölder norm over the region's node pairs. If the pair count
/// exceeds pair_budget, a deterministic seeded sample is used: every
/// axis-neighbor pair plus stratified random pairs up to the budget.
HolderNorm holder_norm(const ScalarField& f, double alpha, const IndexBox& region,
                       std::uint64_t pair_budget = 20000000, std::uint64_t seed = 0);

/// C^{1,alpha}-style norm: holder(f) + sum over axes of holder(df/dx_a),
/// gradients by second-order differences.
HolderNorm c1_alpha_norm(const ScalarField& f, double alpha, const IndexBox& region,
                         std::uint64_t pair_budget = 20000000, std::uint64_t seed = 0);

}  // namespace qpat
