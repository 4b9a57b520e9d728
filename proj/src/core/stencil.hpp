#pragma once

#include <functional>

#include "core/field.hpp"

namespace qpat {

/// Apply L u = -div(a grad u) + b u with the 7-point flux stencil
/// (face coefficients are arithmetic averages). Interior nodes only;
/// the output is zero on the box faces.
void apply_lab(const ScalarField& a, const ScalarField& b, const ScalarField& u,
               ScalarField& out);

/// Apply -div(sigma grad u), same stencil without the zeroth-order term.
void apply_div_form(const ScalarField& sigma, const ScalarField& u, ScalarField& out);

/// Diagonal of the 7-point operator at interior nodes (zero on faces);
/// used for Jacobi preconditioning.
ScalarField operator_diagonal(const ScalarField& a, const ScalarField* b);

struct SolveReport {
  int iterations = 0;
  double residual = 0;       // final relative residual
  double tolerance = 0;
  bool converged = false;
};

/// Preconditioned conjugate gradient on vectors with pinned (zero) entries;
/// inv_diag must be zero exactly on pinned entries. Residual criterion is
/// ||r|| <= tol ||rhs||.
SolveReport pcg(const std::function<void(const std::vector<double>&,
                                         std::vector<double>&)>& apply,
                const std::vector<double>& inv_diag, const std::vector<double>& rhs,
                std::vector<double>& x, double tol, int max_iter);

}  // namespace qpat
