#pragma once

#include <cstdint>
#include <vector>

#include "core/qpat_chain.hpp"

namespace qpat {

/// Compactly supported polynomial bump (1 - |x-c|^2/rho^2)^3 extended by 0.
/// Twice differentiable with Lipschitz second derivatives across the support
/// sphere, so small multiples keep a coefficient inside the admissible class.
ScalarField bump_field(const Grid& g, const Vec3& center, double rho);

enum class PerturbTarget { A, B, Both };

struct PerturbationSpec {
  Vec3 bump_center;
  double bump_radius = 0;
  double amplitude = 0;  ///< signed bump multiple added to the target
  PerturbTarget target = PerturbTarget::A;
};

/// base with amplitude * bump added to the targeted coefficient(s). The bump
/// support must lie strictly inside the coefficient box, which keeps the
/// boundary traces of the pair bit-identical to the base. Class certificates
/// are inherited from the base; callers re-validate admissibility.
AdmissiblePair apply_perturbation(const AdmissiblePair& base,
                                  const PerturbationSpec& pert);

struct StabilityEntry {
  double epsilon = 0;
  double data_dist = 0;   ///< ||v1 - ~v1||_C + ||v2 - ~v2||_C over the data box
  double coeff_dist = 0;  ///< ||a - ~a||_{C^{1,alpha}} + ||b - ~b||_{C^{0,alpha}}
  double sigma_dist = 0;  ///< ||a u1^2 - ~a ~u1^2||_C over the data box
};

struct StabilityLadder {
  std::vector<StabilityEntry> entries;  ///< sorted by epsilon
  double alpha = 0;
  double gamma_hat = 0;  ///< slope of log coeff_dist against log data_dist
  double r2 = 0;         ///< coefficient of determination of that fit
  double K = 0;          ///< max of data_dist / epsilon over fitted entries
  int fit_points = 0;    ///< entries that entered the fit
  double fit_floor = 0;  ///< data_dist below this was excluded (solver noise)
};

struct LadderOptions {
  double alpha = 0.5;          ///< Holder exponent of the coefficient norms
  double solver_tol = 1e-10;   ///< forward-solve tolerance; floor is 10x this
  int workers = 1;             ///< concurrent ladder entries
  std::uint64_t norm_budget = 2000000;  ///< node-pair budget for Holder norms
};

/// The stability experiment: for each epsilon, forward-solve the base and the
/// perturbed pair from the same two sources, and compare the sup-norm data
/// distance with the Holder coefficient distance. Fits
/// log coeff_dist = gamma_hat log data_dist + const over the entries whose
/// data distance resolves above the solver-noise floor; epsilon = 0 entries
/// are recorded as exact zeros and excluded from the fit. Entries are
/// independent and run on `workers` threads; results do not depend on the
/// worker count. Throws ValidationError (naming the failing certificate,
/// tagged by epsilon) if any perturbed pair leaves the admissible class;
/// solver and degeneracy errors are rethrown tagged by epsilon.
StabilityLadder run_ladder(const AdmissiblePair& base, const PerturbationSpec& pert,
                           const std::vector<double>& epsilons,
                           const SourceConfig& sources, const Box& omega,
                           const LadderOptions& opts = {});

struct ReconErrorEntry {
  double epsilon = 0;
  double err_a = 0;  ///< sup |a_hat - a| over the data box
  double err_b = 0;  ///< sup |b_hat - b| over the data box
};

struct ReconErrorReport {
  std::vector<ReconErrorEntry> entries;  ///< epsilon = 0 baseline first
  double baseline_a = 0;  ///< clean-data reconstruction error in a
  double baseline_b = 0;
  double slope_a = 0;    ///< log-log slope of err_a against epsilon (eps > 0)
  int inversions = 0;    ///< strict decreases of err_a along the ladder
};

/// The practical counterpart of the stability experiment: perturb the data
/// itself (both components, additively, by epsilon times the bump sampled on
/// the data grid), run the full reconstruction with the true traces, and
/// report the coefficient errors against the unperturbed truth. The epsilon
/// = 0 entry is the clean-data discretization baseline. The bump is
/// nonnegative, so positive amplitudes cannot push the data through zero.
ReconErrorReport reconstruction_error_ladder(const AdmissiblePair& base,
                                             const PerturbationSpec& pert,
                                             const std::vector<double>& epsilons,
                                             const SourceConfig& sources,
                                             const Box& omega,
                                             double reg_lambda = 1e-6,
                                             double tol = 1e-10);

}  // namespace qpat
