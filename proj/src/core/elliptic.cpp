#include "core/elliptic.hpp"

#include <cmath>
#include <sstream>

#include "core/holder.hpp"
#include "core/log.hpp"
#include "core/quadrature.hpp"
#include "core/specfun.hpp"

namespace qpat {

std::vector<std::string> check_admissible(const AdmissiblePair& pair,
                                          std::size_t pair_budget,
                                          std::uint64_t seed) {
  std::vector<std::string> v;
  if (!pair.a.grid().same_layout(pair.b.grid())) {
    v.push_back("a and b live on different grids");
    return v;
  }
  if (pair.lambda_cert <= 0) v.push_back("lambda must be positive");
  if (pair.kappa_cert <= 0) v.push_back("kappa must be positive");
  if (!pair.a.all_finite()) v.push_back("a has non-finite values");
  if (!pair.b.all_finite()) v.push_back("b has non-finite values");
  if (!v.empty()) return v;

  const IndexBox full = pair.a.grid().full_box();
  auto fail = [&v](const std::string& what, double got, double bound,
                   const char* rel) {
    std::ostringstream os;
    os << what << " = " << got << " violates " << what << " " << rel << " " << bound;
    v.push_back(os.str());
  };

  double amin = pair.a.min_value();
  if (amin < 1.0 / pair.lambda_cert)
    fail("min(a)", amin, 1.0 / pair.lambda_cert, ">=");
  HolderNorm na = c1_alpha_norm(pair.a, 1.0, full, pair_budget, seed);
  if (na.total > pair.lambda_cert)
    fail("||a||_{C^{1,1}}", na.total, pair.lambda_cert, "<=");

  double bmin = pair.b.min_value();
  if (bmin < 1.0 / pair.kappa_cert)
    fail("min(b)", bmin, 1.0 / pair.kappa_cert, ">=");
  HolderNorm nb = holder_norm(pair.b, 1.0, full, pair_budget, seed + 17);
  if (nb.total > pair.kappa_cert)
    fail("||b||_{C^{0,1}}", nb.total, pair.kappa_cert, "<=");
  return v;
}

void require_admissible(const AdmissiblePair& pair, std::size_t pair_budget,
                        std::uint64_t seed) {
  auto v = check_admissible(pair, pair_budget, seed);
  if (!v.empty()) throw ValidationError(v);
}

namespace {

/// Zero-Dirichlet interior solve: apply is the full-stencil operator, rhs is
/// zero on faces, the solution vector stays zero on faces.
SolveReport interior_solve(const ScalarField& a, const ScalarField* b,
                           const std::vector<double>& rhs, ScalarField& x,
                           double tol, int max_iter) {
  const Grid& g = a.grid();
  ScalarField xs(g), ys(g);
  auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
    xs.values() = in;
    if (b)
      apply_lab(a, *b, xs, ys);
    else
      apply_div_form(a, xs, ys);
    out = ys.values();
  };
  ScalarField diag = operator_diagonal(a, b);
  std::vector<double> inv_diag(g.size(), 0.0);
  for (std::size_t m = 0; m < g.size(); ++m)
    if (diag.values()[m] != 0.0) inv_diag[m] = 1.0 / diag.values()[m];
  if (!x.grid().same_layout(g)) x = ScalarField(g);
  SolveReport rep = pcg(apply, inv_diag, rhs, x.values(), tol, max_iter);
  if (!rep.converged)
    throw SolverError("conjugate gradient stalled at relative residual " +
                      std::to_string(rep.residual) + " after " +
                      std::to_string(rep.iterations) + " iterations");
  return rep;
}

/// Move inhomogeneous face values to the right-hand side: returns the
/// face-extension field and subtracts its image under the operator from rhs.
ScalarField lift_boundary(const ScalarField& a, const ScalarField* b,
                          const ScalarField& boundary, std::vector<double>& rhs) {
  const Grid& g = a.grid();
  ScalarField ub(g, 0.0);
  const auto& d = g.dims();
  for (std::int64_t i = 0; i < d[0]; ++i)
    for (std::int64_t j = 0; j < d[1]; ++j)
      for (std::int64_t k = 0; k < d[2]; ++k)
        if (g.full_box().on_face({i, j, k}))
          ub.at(i, j, k) = boundary.at(i, j, k);
  ScalarField t(g);
  if (b)
    apply_lab(a, *b, ub, t);
  else
    apply_div_form(a, ub, t);
  for (std::size_t m = 0; m < g.size(); ++m) rhs[m] -= t.values()[m];
  return ub;
}

/// Zero rhs entries on the box faces so the pinned system stays consistent.
void mask_faces(const Grid& g, std::vector<double>& rhs) {
  const auto& d = g.dims();
  for (std::int64_t i = 0; i < d[0]; ++i)
    for (std::int64_t j = 0; j < d[1]; ++j)
      for (std::int64_t k = 0; k < d[2]; ++k)
        if (g.full_box().on_face({i, j, k})) rhs[g.flat(i, j, k)] = 0.0;
}

}  // namespace

GreensResult greens_function(const AdmissiblePair& pair, const Vec3& xi,
                             GreensMode mode, double tol, int max_iter) {
  const Grid& g = pair.a.grid();
  if (!g.same_layout(pair.b.grid()))
    throw InvalidArgument("a and b live on different grids");
  if (pair.a.min_value() <= 0) throw InvalidArgument("a must be positive");
  if (pair.b.min_value() < 0) throw InvalidArgument("b must be nonnegative");
  if (g.box().boundary_distance(xi) < 2.0 * g.h_max())
    throw InvalidArgument("point source too close to the box boundary");

  GreensResult res;
  res.source = xi;

  if (mode == GreensMode::DiscreteDelta) {
    Index3 node = g.nearest_node(xi);
    std::vector<double> rhs(g.size(), 0.0);
    const Vec3& h = g.spacing();
    rhs[g.flat(node[0], node[1], node[2])] = 1.0 / (h.x * h.y * h.z);
    res.report = interior_solve(pair.a, &pair.b, rhs, res.u, tol, max_iter);
    return res;
  }

  // Freeze coefficients at the pole and subtract the matching kernel.
  double mu = interp(pair.a, xi);
  double nu = interp(pair.b, xi);
  if (nu <= 0) throw InvalidArgument("b must be positive at the source for the split");
  const double r_reg = 0.25 * g.h_min();
  ScalarField gk = ScalarField::sample(g, [&](const Vec3& p) {
    double r = std::max(dist(p, xi), r_reg);
    return fs_eval(mu, nu, 3, r);
  });

  ScalarField lg(g);
  apply_lab(pair.a, pair.b, gk, lg);

  // The sampled kernel is not a discrete solution near the pole. Keep its
  // residual there as the concentrated source, normalized to unit discrete
  // mass (the raw mass carries an O(1) defect from the jagged cut through
  // the truncation field), and cancel the residual everywhere else.
  const double r_excl = 2.5 * g.h_max();
  const Vec3& h = g.spacing();
  const double cell = h.x * h.y * h.z;
  const auto& d = g.dims();
  double q = 0;
  for (std::int64_t i = 0; i < d[0]; ++i)
    for (std::int64_t j = 0; j < d[1]; ++j)
      for (std::int64_t k = 0; k < d[2]; ++k)
        if (dist(g.node(i, j, k), xi) <= r_excl) q += cell * lg.at(i, j, k);
  if (q < 0.5 || q > 2.0)
    throw SolverError("near-pole source mass " + std::to_string(q) +
                      " is far from 1; grid too coarse for the split");
  std::vector<double> rhs(g.size());
  for (std::int64_t i = 0; i < d[0]; ++i)
    for (std::int64_t j = 0; j < d[1]; ++j)
      for (std::int64_t k = 0; k < d[2]; ++k) {
        std::size_t m = g.flat(i, j, k);
        bool inside = dist(g.node(i, j, k), xi) <= r_excl;
        rhs[m] = inside ? (1.0 / q - 1.0) * lg.values()[m] : -lg.values()[m];
      }

  ScalarField corr(g);
  res.report = interior_solve(pair.a, &pair.b, rhs, corr, tol, max_iter);
  res.u = gk;
  for (std::size_t m = 0; m < g.size(); ++m) res.u.values()[m] += corr.values()[m];
  log_debug("greens split solve: " + std::to_string(res.report.iterations) +
            " iterations, residual " + std::to_string(res.report.residual));
  return res;
}

DirichletResult solve_div_dirichlet(const ScalarField& sigma, const ScalarField& rhs,
                                    const ScalarField& boundary, double tol,
                                    int max_iter) {
  const Grid& g = sigma.grid();
  if (!g.same_layout(rhs.grid()) || !g.same_layout(boundary.grid()))
    throw InvalidArgument("fields live on different grids");
  if (sigma.min_value() <= 0) throw InvalidArgument("sigma must be positive");
  std::vector<double> b = rhs.values();
  ScalarField ub = lift_boundary(sigma, nullptr, boundary, b);
  mask_faces(g, b);
  DirichletResult out;
  out.report = interior_solve(sigma, nullptr, b, out.u, tol, max_iter);
  for (std::size_t m = 0; m < g.size(); ++m) out.u.values()[m] += ub.values()[m];
  return out;
}

DirichletResult solve_lab_dirichlet(const ScalarField& a, const ScalarField& b,
                                    const ScalarField& rhs, const ScalarField& boundary,
                                    double tol, int max_iter) {
  const Grid& g = a.grid();
  if (!g.same_layout(b.grid()) || !g.same_layout(rhs.grid()) ||
      !g.same_layout(boundary.grid()))
    throw InvalidArgument("fields live on different grids");
  if (a.min_value() <= 0) throw InvalidArgument("a must be positive");
  if (b.min_value() < 0) throw InvalidArgument("b must be nonnegative");
  std::vector<double> r = rhs.values();
  ScalarField ub = lift_boundary(a, &b, boundary, r);
  mask_faces(g, r);
  DirichletResult out;
  out.report = interior_solve(a, &b, r, out.u, tol, max_iter);
  for (std::size_t m = 0; m < g.size(); ++m) out.u.values()[m] += ub.values()[m];
  return out;
}

}  // namespace qpat
