#pragma once

#include <string>

#include "core/elliptic.hpp"

namespace qpat {

/// Two point-source locations and the discretization used to solve for them.
struct SourceConfig {
  Vec3 xi1;
  Vec3 xi2;
  GreensMode mode = GreensMode::SingularitySplit;
};

/// Internal absorbed-energy data v_j = b u_j restricted to the observation
/// box omega (node-aligned sub-box of the simulation grid).
struct InternalData {
  ScalarField v1;
  ScalarField v2;
  Vec3 xi1;
  Vec3 xi2;
  Box omega;
  std::string noise_meta = "clean";
};

/// Internal data together with the full point-source solutions and their
/// iteration reports, for callers that archive the forward fields.
struct ForwardSolve {
  GreensResult s1;
  GreensResult s2;
  InternalData data;
};

/// Solve the two point-source problems for the pair, multiply by b, and
/// restrict to omega. Sources must lie outside omega; non-positive v1 or v2
/// on omega raises DegenerateData.
ForwardSolve forward_solve(const AdmissiblePair& pair, const SourceConfig& sources,
                           const Box& omega, double tol = 1e-10);

/// forward_solve keeping only the internal data.
InternalData generate_data(const AdmissiblePair& pair, const SourceConfig& sources,
                           const Box& omega, double tol = 1e-10);

/// w = v2 / v1 node-wise; b and all common positive factors cancel.
/// min v1 below the floor raises DegenerateData instead of clamping.
ScalarField quotient_field(const InternalData& data, double floor = 1e-12);

struct SigmaRecovery {
  ScalarField sigma;
  SolveReport report;
  bool constant_quotient = false;  ///< flux rows vanished; output is the
                                   ///< regularized extension of boundary data
};

/// Recover the effective conductivity from div(sigma grad w) = 0 as
/// row-normalized regularized least squares in p = sqrt(sigma): with face
/// conductivities taken as geometric means p_c p_nb, the flux balance at a
/// node is linear in the neighbours' p values and is exactly consistent with
/// data produced by the matched five-point operator (constant diffusion).
/// p is pinned to sqrt(sigma_boundary) on the faces of w's grid. A sign
/// change in the recovered p raises DegenerateData (sigma would lose
/// positivity; the location of the minimum is reported).
SigmaRecovery recover_sigma(const ScalarField& w, const ScalarField& sigma_boundary,
                            double reg_lambda = 1e-6, double tol = 1e-10,
                            int max_iter = 50000);

struct ReconstructionResult {
  ScalarField sigma_hat;
  ScalarField rho_hat;  ///< reconstructed 1/u1
  ScalarField a_hat;    ///< sigma_hat * rho_hat^2 node-wise
  ScalarField b_hat;    ///< v1 * rho_hat node-wise
  double residual_conductivity = 0;  ///< RMS of the normalized flux rows at sigma_hat
  double residual_elliptic = 0;      ///< RMS of -div(sigma_hat grad rho_hat) - v1
                                     ///< in the geometric-mean flux form
  SolveReport sigma_report;
  SolveReport rho_report;
  bool constant_quotient = false;
};

/// Full three-step chain: quotient, conductivity, then (a, b) through
/// rho = 1/u1 solving -div(sigma_hat grad rho) = v1 in the geometric-mean
/// flux form matched to the recovery. a_trace and b_trace live on the data
/// grid; only their face values enter (coefficients are known on the
/// observation boundary).
ReconstructionResult reconstruct(const InternalData& data, const ScalarField& a_trace,
                                 const ScalarField& b_trace, double reg_lambda = 1e-6,
                                 double tol = 1e-10);

}  // namespace qpat
