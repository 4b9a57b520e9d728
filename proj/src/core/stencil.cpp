#include "core/stencil.hpp"

#include <algorithm>
#include <cmath>

namespace qpat {

namespace {

/// Shared flux-stencil kernel; with b == nullptr it is the pure divergence form.
void apply_stencil(const ScalarField& a, const ScalarField* b, const ScalarField& u,
                   ScalarField& out) {
  const Grid& g = u.grid();
  if (!g.same_layout(a.grid()) || (b && !g.same_layout(b->grid())))
    throw InvalidArgument("operator fields live on different grids");
  if (!out.grid().same_layout(g)) out = ScalarField(g);
  const auto& d = g.dims();
  const double ih2[3] = {1.0 / (g.spacing().x * g.spacing().x),
                         1.0 / (g.spacing().y * g.spacing().y),
                         1.0 / (g.spacing().z * g.spacing().z)};
  const std::size_t stride[3] = {static_cast<std::size_t>(d[1]) * d[2],
                                 static_cast<std::size_t>(d[2]), 1};
  const double* av = a.values().data();
  const double* uv = u.values().data();
  double* ov = out.values().data();

  std::fill(out.values().begin(), out.values().end(), 0.0);
  for (std::int64_t i = 1; i < d[0] - 1; ++i)
    for (std::int64_t j = 1; j < d[1] - 1; ++j) {
      std::size_t row = (static_cast<std::size_t>(i) * d[1] + j) * d[2];
      for (std::int64_t k = 1; k < d[2] - 1; ++k) {
        std::size_t c = row + k;
        double acc = 0;
        for (int ax = 0; ax < 3; ++ax) {
          std::size_t p = c + stride[ax], m = c - stride[ax];
          double ae = 0.5 * (av[c] + av[p]);  // face-averaged coefficient
          double aw = 0.5 * (av[c] + av[m]);
          acc += (ae * (uv[c] - uv[p]) + aw * (uv[c] - uv[m])) * ih2[ax];
        }
        if (b) acc += b->values()[c] * uv[c];
        ov[c] = acc;
      }
    }
}

}  // namespace

void apply_lab(const ScalarField& a, const ScalarField& b, const ScalarField& u,
               ScalarField& out) {
  apply_stencil(a, &b, u, out);
}

void apply_div_form(const ScalarField& sigma, const ScalarField& u, ScalarField& out) {
  apply_stencil(sigma, nullptr, u, out);
}

ScalarField operator_diagonal(const ScalarField& a, const ScalarField* b) {
  const Grid& g = a.grid();
  const auto& d = g.dims();
  const double ih2[3] = {1.0 / (g.spacing().x * g.spacing().x),
                         1.0 / (g.spacing().y * g.spacing().y),
                         1.0 / (g.spacing().z * g.spacing().z)};
  const std::size_t stride[3] = {static_cast<std::size_t>(d[1]) * d[2],
                                 static_cast<std::size_t>(d[2]), 1};
  ScalarField diag(g, 0.0);
  const double* av = a.values().data();
  for (std::int64_t i = 1; i < d[0] - 1; ++i)
    for (std::int64_t j = 1; j < d[1] - 1; ++j) {
      std::size_t row = (static_cast<std::size_t>(i) * d[1] + j) * d[2];
      for (std::int64_t k = 1; k < d[2] - 1; ++k) {
        std::size_t c = row + k;
        double acc = 0;
        for (int ax = 0; ax < 3; ++ax) {
          double ae = 0.5 * (av[c] + av[c + stride[ax]]);
          double aw = 0.5 * (av[c] + av[c - stride[ax]]);
          acc += (ae + aw) * ih2[ax];
        }
        if (b) acc += b->values()[c];
        diag.values()[c] = acc;
      }
    }
  return diag;
}

SolveReport pcg(const std::function<void(const std::vector<double>&,
                                         std::vector<double>&)>& apply,
                const std::vector<double>& inv_diag, const std::vector<double>& rhs,
                std::vector<double>& x, double tol, int max_iter) {
  const std::size_t n = rhs.size();
  if (x.size() != n) x.assign(n, 0.0);
  std::vector<double> r(n), z(n), p(n), ap(n);

  auto dot = [&](const std::vector<double>& u, const std::vector<double>& v) {
    double s = 0;
    for (std::size_t m = 0; m < n; ++m) s += u[m] * v[m];
    return s;
  };

  apply(x, ap);
  for (std::size_t m = 0; m < n; ++m) r[m] = rhs[m] - ap[m];
  double norm_b = std::sqrt(dot(rhs, rhs));
  SolveReport rep;
  rep.tolerance = tol;
  if (norm_b == 0.0) {  // zero data: solution is zero
    x.assign(n, 0.0);
    rep.converged = true;
    return rep;
  }

  for (std::size_t m = 0; m < n; ++m) z[m] = inv_diag[m] * r[m];
  p = z;
  double rz = dot(r, z);
  double res = std::sqrt(dot(r, r)) / norm_b;

  int it = 0;
  while (res > tol && it < max_iter) {
    apply(p, ap);
    double alpha = rz / dot(p, ap);
    for (std::size_t m = 0; m < n; ++m) {
      x[m] += alpha * p[m];
      r[m] -= alpha * ap[m];
    }
    for (std::size_t m = 0; m < n; ++m) z[m] = inv_diag[m] * r[m];
    double rz_new = dot(r, z);
    double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t m = 0; m < n; ++m) p[m] = z[m] + beta * p[m];
    res = std::sqrt(dot(r, r)) / norm_b;
    ++it;
  }
  rep.iterations = it;
  rep.residual = res;
  rep.converged = res <= tol;
  return rep;
}

}  // namespace qpat
