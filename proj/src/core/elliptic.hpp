#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/field.hpp"
#include "core/stencil.hpp"

namespace qpat {

/// Coefficient pair (a, b) together with the class constants it claims to
/// satisfy: 1/lambda <= a with ||a||_{C^{1,1}} <= lambda, and
/// 1/kappa <= b with ||b||_{C^{0,1}} <= kappa.
struct AdmissiblePair {
  ScalarField a;
  ScalarField b;
  double lambda_cert = 0;
  double kappa_cert = 0;
};

/// Check the admissibility certificate; returns the list of violated
/// conditions (empty means admissible). Norms are the discrete node-pair
/// Holder norms, exact when the node count allows it.
std::vector<std::string> check_admissible(const AdmissiblePair& pair,
                                          std::size_t pair_budget = 20000000,
                                          std::uint64_t seed = 0);

/// Throws ValidationError when check_admissible reports violations.
void require_admissible(const AdmissiblePair& pair,
                        std::size_t pair_budget = 20000000,
                        std::uint64_t seed = 0);

enum class GreensMode {
  SingularitySplit,  ///< subtract the constant-coefficient kernel at the pole
  DiscreteDelta,     ///< unit point mass on the nearest node
};

struct GreensResult {
  ScalarField u;       ///< point-source solution, zero on the box faces
                       ///< only in DiscreteDelta mode (split mode carries the
                       ///< kernel tail on the faces)
  Vec3 source;         ///< requested source location
  SolveReport report;  ///< iteration report of the correction solve
};

/// Solve L_{a,b} u = delta_xi with zero Dirichlet values on the box faces.
///
/// SingularitySplit writes u = g + r with g the constant-coefficient kernel
/// frozen at xi (clamped within r_reg = h_min/4 of the pole), and solves for
/// the correction r with right-hand side -L g, zeroed within
/// r_excl = 2.5 h_max of the pole where the discrete residual of the
/// sampled kernel is not meaningful.
GreensResult greens_function(const AdmissiblePair& pair, const Vec3& xi,
                             GreensMode mode = GreensMode::SingularitySplit,
                             double tol = 1e-10, int max_iter = 20000);

/// Solve -div(sigma grad u) = rhs in the interior with u = boundary on the
/// box faces. boundary supplies values on the full grid; only its face
/// values are used.
struct DirichletResult {
  ScalarField u;
  SolveReport report;
};

DirichletResult solve_div_dirichlet(const ScalarField& sigma, const ScalarField& rhs,
                                    const ScalarField& boundary, double tol = 1e-10,
                                    int max_iter = 20000);

/// Same with the zeroth-order term: -div(a grad u) + b u = rhs.
DirichletResult solve_lab_dirichlet(const ScalarField& a, const ScalarField& b,
                                    const ScalarField& rhs, const ScalarField& boundary,
                                    double tol = 1e-10, int max_iter = 20000);

}  // namespace qpat
