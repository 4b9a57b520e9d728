#include "core/qpat_chain.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "core/log.hpp"

namespace qpat {

namespace {

std::string point_str(const Grid& g, const Index3& idx) {
  Vec3 p = g.node(idx[0], idx[1], idx[2]);
  std::ostringstream os;
  os << "(" << p.x << ", " << p.y << ", " << p.z << ")";
  return os.str();
}

}  // namespace

ForwardSolve forward_solve(const AdmissiblePair& pair, const SourceConfig& sources,
                           const Box& omega, double tol) {
  const Grid& g = pair.a.grid();
  if (!g.same_layout(pair.b.grid()))
    throw InvalidArgument("a and b live on different grids");
  if (omega.contains(sources.xi1) || omega.contains(sources.xi2))
    throw InvalidArgument("point sources must lie outside the observation box");
  IndexBox region = g.index_box(omega);

  ForwardSolve fs;
  fs.s1 = greens_function(pair, sources.xi1, sources.mode, tol);
  fs.s2 = greens_function(pair, sources.xi2, sources.mode, tol);

  InternalData& data = fs.data;
  data.xi1 = sources.xi1;
  data.xi2 = sources.xi2;
  data.v1 = multiply(pair.b, fs.s1.u).restrict_to(region);
  data.v2 = multiply(pair.b, fs.s2.u).restrict_to(region);
  data.omega = data.v1.grid().box();

  Index3 where;
  double m1 = data.v1.min_in(data.v1.grid().full_box(), &where);
  if (m1 <= 0)
    throw DegenerateData("v1 is non-positive (min " + std::to_string(m1) + " at " +
                         point_str(data.v1.grid(), where) + ")");
  double m2 = data.v2.min_in(data.v2.grid().full_box(), &where);
  if (m2 <= 0)
    throw DegenerateData("v2 is non-positive (min " + std::to_string(m2) + " at " +
                         point_str(data.v2.grid(), where) + ")");
  return fs;
}

InternalData generate_data(const AdmissiblePair& pair, const SourceConfig& sources,
                           const Box& omega, double tol) {
  return forward_solve(pair, sources, omega, tol).data;
}

ScalarField quotient_field(const InternalData& data, double floor) {
  Index3 where;
  double m1 = data.v1.min_in(data.v1.grid().full_box(), &where);
  if (m1 < floor)
    throw DegenerateData("min v1 = " + std::to_string(m1) + " at " +
                         point_str(data.v1.grid(), where) +
                         " is below the quotient floor " + std::to_string(floor));
  ScalarField w(data.v1.grid());
  for (std::size_t m = 0; m < w.grid().size(); ++m)
    w.values()[m] = data.v2.values()[m] / data.v1.values()[m];
  return w;
}

namespace {

/// Flux rows of the quotient equation div(sigma grad w) = 0 in the factored
/// variable p = sqrt(sigma). With face conductivities taken as geometric
/// means sigma_f = p_c p_nb, the five-point flux balance at an interior node
/// c, divided by p_c > 0, reads
///     sum_f (w_nb - w_c) / h_a^2 * p_nb = 0,
/// which is linear in p with coefficients on the six neighbours only. Data
/// manufactured by the matched five-point operator satisfies these rows
/// exactly when the diffusion coefficient is constant; variable diffusion
/// adds an O(h^2) geometric-versus-arithmetic averaging defect. The residual
/// therefore measures genuine data inconsistency, not discretization error,
/// and the six-neighbour coupling anchors both checkerboard parities to the
/// boundary (a centered advection stencil would leave half the lattice
/// floating on the data error). Rows are scaled to unit coefficient norm;
/// near-vanishing rows keep their small scale instead of being blown up.
class FluxRows {
 public:
  explicit FluxRows(const ScalarField& w) : m_grid(w.grid()), m_w(w) {
    const auto& d = m_grid.dims();
    m_scale = ScalarField(m_grid, 0.0);
    double smax = 0;
    for (std::int64_t i = 1; i < d[0] - 1; ++i)
      for (std::int64_t j = 1; j < d[1] - 1; ++j)
        for (std::int64_t k = 1; k < d[2] - 1; ++k) {
          double s2 = 0;
          for (int f = 0; f < 6; ++f) {
            double c = coeff(i, j, k, f);
            s2 += c * c;
          }
          double s = std::sqrt(s2);
          m_scale.at(i, j, k) = s;
          smax = std::max(smax, s);
        }
    m_row_max = smax;
    // unit rows where healthy; tiny rows stay tiny (relative clamp)
    double clamp = std::max(smax * 1e-6, 1e-300);
    for (auto& s : m_scale.values()) s = 1.0 / std::max(s, clamp);
  }

  const Grid& grid() const { return m_grid; }
  double row_max() const { return m_row_max; }

  /// y = A x over interior rows (x indexed over the full grid)
  void apply(const std::vector<double>& x, std::vector<double>& y) const {
    const auto& d = m_grid.dims();
    const std::ptrdiff_t stride[3] = {static_cast<std::ptrdiff_t>(d[1]) * d[2],
                                      static_cast<std::ptrdiff_t>(d[2]), 1};
    y.assign(x.size(), 0.0);
    for (std::int64_t i = 1; i < d[0] - 1; ++i)
      for (std::int64_t j = 1; j < d[1] - 1; ++j)
        for (std::int64_t k = 1; k < d[2] - 1; ++k) {
          std::size_t c = m_grid.flat(i, j, k);
          double acc = 0;
          for (int f = 0; f < 6; ++f)
            acc += coeff(i, j, k, f) * x[c + face_offset(f, stride)];
          y[c] = acc * m_scale.values()[c];
        }
  }

  /// t = A^T r for r supported on interior rows
  void apply_transpose(const std::vector<double>& r, std::vector<double>& t) const {
    const auto& d = m_grid.dims();
    const std::ptrdiff_t stride[3] = {static_cast<std::ptrdiff_t>(d[1]) * d[2],
                                      static_cast<std::ptrdiff_t>(d[2]), 1};
    t.assign(r.size(), 0.0);
    for (std::int64_t i = 1; i < d[0] - 1; ++i)
      for (std::int64_t j = 1; j < d[1] - 1; ++j)
        for (std::int64_t k = 1; k < d[2] - 1; ++k) {
          std::size_t c = m_grid.flat(i, j, k);
          double rc = r[c] * m_scale.values()[c];
          if (rc == 0.0) continue;
          for (int f = 0; f < 6; ++f)
            t[c + face_offset(f, stride)] += coeff(i, j, k, f) * rc;
        }
  }

  /// RMS of the scaled flux residual A p over interior rows (the system is
  /// homogeneous: boundary values enter through elimination, not a rhs)
  double residual_rms(const std::vector<double>& p) const {
    std::vector<double> r(p.size());
    apply(p, r);
    const auto& d = m_grid.dims();
    double s = 0;
    std::int64_t cnt = 0;
    for (std::int64_t i = 1; i < d[0] - 1; ++i)
      for (std::int64_t j = 1; j < d[1] - 1; ++j)
        for (std::int64_t k = 1; k < d[2] - 1; ++k) {
          double e = r[m_grid.flat(i, j, k)];
          s += e * e;
          ++cnt;
        }
    return std::sqrt(s / cnt);
  }

  /// diag(A^T A) by scattering squared row entries
  void add_normal_diagonal(std::vector<double>& diag) const {
    const auto& d = m_grid.dims();
    const std::ptrdiff_t stride[3] = {static_cast<std::ptrdiff_t>(d[1]) * d[2],
                                      static_cast<std::ptrdiff_t>(d[2]), 1};
    for (std::int64_t i = 1; i < d[0] - 1; ++i)
      for (std::int64_t j = 1; j < d[1] - 1; ++j)
        for (std::int64_t k = 1; k < d[2] - 1; ++k) {
          std::size_t c = m_grid.flat(i, j, k);
          double s = m_scale.values()[c];
          for (int f = 0; f < 6; ++f) {
            double g = coeff(i, j, k, f) * s;
            diag[c + face_offset(f, stride)] += g * g;
          }
        }
  }

 private:
  // faces f = 2*axis + (0: +e_a, 1: -e_a); coefficient (w_nb - w_c)/h_a^2
  static std::ptrdiff_t face_offset(int f, const std::ptrdiff_t stride[3]) {
    return (f & 1) ? -stride[f >> 1] : stride[f >> 1];
  }
  double coeff(std::int64_t i, std::int64_t j, std::int64_t k, int f) const {
    const Vec3& h = m_grid.spacing();
    const double ih2[3] = {1.0 / (h.x * h.x), 1.0 / (h.y * h.y), 1.0 / (h.z * h.z)};
    int a = f >> 1;
    std::int64_t nb[3] = {i, j, k};
    nb[a] += (f & 1) ? -1 : 1;
    return (m_w.at(nb[0], nb[1], nb[2]) - m_w.at(i, j, k)) * ih2[a];
  }

  Grid m_grid;
  ScalarField m_w;
  ScalarField m_scale;  // reciprocal row norms (clamped)
  double m_row_max = 0;
};

/// y += reg * G^T G x with G the forward-difference gradient over all
/// adjacent node pairs (the smoothness regularizer).
void add_graph_laplacian(const Grid& g, double reg, const std::vector<double>& x,
                         std::vector<double>& y) {
  const auto& d = g.dims();
  const Vec3& h = g.spacing();
  const double ih2[3] = {reg / (h.x * h.x), reg / (h.y * h.y), reg / (h.z * h.z)};
  const std::size_t stride[3] = {static_cast<std::size_t>(d[1]) * d[2],
                                 static_cast<std::size_t>(d[2]), 1};
  for (std::int64_t i = 0; i < d[0]; ++i)
    for (std::int64_t j = 0; j < d[1]; ++j)
      for (std::int64_t k = 0; k < d[2]; ++k) {
        std::size_t c = g.flat(i, j, k);
        std::int64_t idx[3] = {i, j, k};
        for (int a = 0; a < 3; ++a) {
          if (idx[a] + 1 >= d[a]) continue;
          double diff = (x[c + stride[a]] - x[c]) * ih2[a];
          y[c] -= diff;
          y[c + stride[a]] += diff;
        }
      }
}

void add_graph_laplacian_diagonal(const Grid& g, double reg, std::vector<double>& diag) {
  const auto& d = g.dims();
  const Vec3& h = g.spacing();
  const double ih2[3] = {reg / (h.x * h.x), reg / (h.y * h.y), reg / (h.z * h.z)};
  for (std::int64_t i = 0; i < d[0]; ++i)
    for (std::int64_t j = 0; j < d[1]; ++j)
      for (std::int64_t k = 0; k < d[2]; ++k) {
        std::size_t c = g.flat(i, j, k);
        std::int64_t idx[3] = {i, j, k};
        for (int a = 0; a < 3; ++a) {
          if (idx[a] + 1 < d[a]) diag[c] += ih2[a];
          if (idx[a] - 1 >= 0) diag[c] += ih2[a];
        }
      }
}

void face_extension(const Grid& g, const ScalarField& boundary, std::vector<double>& out) {
  const auto& d = g.dims();
  for (std::int64_t i = 0; i < d[0]; ++i)
    for (std::int64_t j = 0; j < d[1]; ++j)
      for (std::int64_t k = 0; k < d[2]; ++k)
        if (g.full_box().on_face({i, j, k}))
          out[g.flat(i, j, k)] = boundary.at(i, j, k);
}

void zero_faces(const Grid& g, std::vector<double>& x) {
  const auto& d = g.dims();
  for (std::int64_t i = 0; i < d[0]; ++i)
    for (std::int64_t j = 0; j < d[1]; ++j)
      for (std::int64_t k = 0; k < d[2]; ++k)
        if (g.full_box().on_face({i, j, k})) x[g.flat(i, j, k)] = 0.0;
}

/// y = -div(sigma grad x) over interior rows with geometric-mean face
/// conductivities sigma_f = p_c p_nb, p = sqrt(sigma) at nodes. This is the
/// flux form matched to the factored conductivity recovery: on data from the
/// five-point operator with constant diffusion, rho = 1/u1 satisfies
/// -div(sigma grad rho) = v1 exactly in this discretization.
void apply_geo_flux(const ScalarField& p, const std::vector<double>& x,
                    std::vector<double>& y) {
  const Grid& g = p.grid();
  const auto& d = g.dims();
  const Vec3& h = g.spacing();
  const double ih2[3] = {1.0 / (h.x * h.x), 1.0 / (h.y * h.y), 1.0 / (h.z * h.z)};
  const std::ptrdiff_t stride[3] = {static_cast<std::ptrdiff_t>(d[1]) * d[2],
                                    static_cast<std::ptrdiff_t>(d[2]), 1};
  y.assign(x.size(), 0.0);
  for (std::int64_t i = 1; i < d[0] - 1; ++i)
    for (std::int64_t j = 1; j < d[1] - 1; ++j)
      for (std::int64_t k = 1; k < d[2] - 1; ++k) {
        std::size_t c = g.flat(i, j, k);
        double pc = p.values()[c];
        double acc = 0;
        for (int a = 0; a < 3; ++a) {
          std::size_t e = c + stride[a], w_ = c - stride[a];
          acc += pc * p.values()[e] * (x[c] - x[e]) * ih2[a];
          acc += pc * p.values()[w_] * (x[c] - x[w_]) * ih2[a];
        }
        y[c] = acc;
      }
}

/// Dirichlet solve -div(sigma grad rho) = rhs with the geometric-mean flux
/// operator; rho pinned to boundary on the faces.
DirichletResult solve_geo_dirichlet(const ScalarField& p, const ScalarField& rhs,
                                    const ScalarField& boundary, double tol,
                                    int max_iter = 20000) {
  const Grid& g = p.grid();
  const auto& d = g.dims();
  const Vec3& h = g.spacing();
  const double ih2[3] = {1.0 / (h.x * h.x), 1.0 / (h.y * h.y), 1.0 / (h.z * h.z)};
  const std::ptrdiff_t stride[3] = {static_cast<std::ptrdiff_t>(d[1]) * d[2],
                                    static_cast<std::ptrdiff_t>(d[2]), 1};

  std::vector<double> lift(g.size(), 0.0);
  face_extension(g, boundary, lift);
  std::vector<double> b(g.size());
  apply_geo_flux(p, lift, b);
  for (std::size_t m = 0; m < g.size(); ++m) b[m] = rhs.values()[m] - b[m];
  zero_faces(g, b);

  std::vector<double> inv_diag(g.size(), 0.0);
  for (std::int64_t i = 1; i < d[0] - 1; ++i)
    for (std::int64_t j = 1; j < d[1] - 1; ++j)
      for (std::int64_t k = 1; k < d[2] - 1; ++k) {
        std::size_t c = g.flat(i, j, k);
        double pc = p.values()[c];
        double diag = 0;
        for (int a = 0; a < 3; ++a)
          diag += pc * (p.values()[c + stride[a]] + p.values()[c - stride[a]]) * ih2[a];
        if (diag > 0) inv_diag[c] = 1.0 / diag;
      }

  auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
    apply_geo_flux(p, x, y);
  };
  std::vector<double> x(g.size(), 0.0);
  DirichletResult out;
  out.report = pcg(apply, inv_diag, b, x, tol, max_iter);
  if (!out.report.converged)
    throw SolverError("potential solve stalled at relative residual " +
                      std::to_string(out.report.residual));
  out.u = ScalarField(g);
  for (std::size_t m = 0; m < g.size(); ++m) out.u.values()[m] = lift[m] + x[m];
  return out;
}

}  // namespace

SigmaRecovery recover_sigma(const ScalarField& w, const ScalarField& sigma_boundary,
                            double reg_lambda, double tol, int max_iter) {
  const Grid& g = w.grid();
  if (!g.same_layout(sigma_boundary.grid()))
    throw InvalidArgument("w and sigma_boundary live on different grids");
  if (!w.all_finite()) throw InvalidArgument("w has non-finite values");
  if (reg_lambda <= 0) throw InvalidArgument("reg_lambda must be positive");
  const auto& d = g.dims();
  for (std::int64_t i = 0; i < d[0]; ++i)
    for (std::int64_t j = 0; j < d[1]; ++j)
      for (std::int64_t k = 0; k < d[2]; ++k)
        if (g.full_box().on_face({i, j, k}) && !(sigma_boundary.at(i, j, k) > 0))
          throw InvalidArgument("sigma_boundary must be positive on the faces");

  FluxRows A(w);
  SigmaRecovery out;
  // constant quotient: every flux row is numerically zero (coefficients are
  // w-differences over h^2, so roundoff-constant w gives row norms of order
  // eps |w| / h^2) and the least-squares problem degenerates to the
  // regularized boundary extension
  double w_scale = std::max(1.0, w.max_abs());
  out.constant_quotient = A.row_max() * g.h_min() * g.h_min() < 1e-12 * w_scale;
  if (out.constant_quotient)
    log_warn("quotient field is numerically constant; conductivity is only "
             "determined by the regularized boundary extension");

  // p = sqrt(sigma); boundary values eliminated
  ScalarField root_bdry(g, 0.0);
  for (std::int64_t i = 0; i < d[0]; ++i)
    for (std::int64_t j = 0; j < d[1]; ++j)
      for (std::int64_t k = 0; k < d[2]; ++k)
        if (g.full_box().on_face({i, j, k}))
          root_bdry.at(i, j, k) = std::sqrt(sigma_boundary.at(i, j, k));
  std::vector<double> p0(g.size(), 0.0);
  face_extension(g, root_bdry, p0);

  // normal operator M = A^T A + reg G^T G
  std::vector<double> scratch_a(g.size());
  auto apply_m = [&](const std::vector<double>& x, std::vector<double>& y) {
    if (!out.constant_quotient) {
      A.apply(x, scratch_a);
      A.apply_transpose(scratch_a, y);
    } else {
      y.assign(x.size(), 0.0);
    }
    add_graph_laplacian(g, reg_lambda, x, y);
  };

  // rhs = P [-A^T A p0 - reg G^T G p0] (the flux rows are homogeneous)
  std::vector<double> rhs(g.size(), 0.0);
  if (!out.constant_quotient) {
    std::vector<double> r0(g.size());
    A.apply(p0, r0);
    for (std::size_t m = 0; m < g.size(); ++m) r0[m] = -r0[m];
    A.apply_transpose(r0, rhs);
  }
  std::vector<double> reg0(g.size(), 0.0);
  add_graph_laplacian(g, reg_lambda, p0, reg0);
  for (std::size_t m = 0; m < g.size(); ++m) rhs[m] -= reg0[m];
  zero_faces(g, rhs);

  auto apply_pm = [&](const std::vector<double>& x, std::vector<double>& y) {
    apply_m(x, y);
    zero_faces(g, y);
  };

  std::vector<double> diag(g.size(), 0.0);
  if (!out.constant_quotient) A.add_normal_diagonal(diag);
  add_graph_laplacian_diagonal(g, reg_lambda, diag);
  std::vector<double> inv_diag(g.size(), 0.0);
  for (std::int64_t i = 1; i < d[0] - 1; ++i)
    for (std::int64_t j = 1; j < d[1] - 1; ++j)
      for (std::int64_t k = 1; k < d[2] - 1; ++k) {
        std::size_t c = g.flat(i, j, k);
        if (diag[c] > 0) inv_diag[c] = 1.0 / diag[c];
      }

  std::vector<double> pi(g.size(), 0.0);
  out.report = pcg(apply_pm, inv_diag, rhs, pi, tol, max_iter);
  if (!out.report.converged)
    throw SolverError("conductivity least squares stalled at relative residual " +
                      std::to_string(out.report.residual));

  out.sigma = ScalarField(g);
  double pmin = std::numeric_limits<double>::infinity();
  Index3 where{0, 0, 0};
  for (std::int64_t i = 0; i < d[0]; ++i)
    for (std::int64_t j = 0; j < d[1]; ++j)
      for (std::int64_t k = 0; k < d[2]; ++k) {
        std::size_t c = g.flat(i, j, k);
        double p = p0[c] + pi[c];
        if (p < pmin) {
          pmin = p;
          where = {i, j, k};
        }
        out.sigma.values()[c] = p * p;
      }
  if (!(pmin > 0) || !out.sigma.all_finite())
    throw DegenerateData("recovered conductivity loses positivity (sqrt sigma has min " +
                         std::to_string(pmin) + " at " + point_str(g, where) + ")");
  return out;
}

ReconstructionResult reconstruct(const InternalData& data, const ScalarField& a_trace,
                                 const ScalarField& b_trace, double reg_lambda,
                                 double tol) {
  const Grid& g = data.v1.grid();
  if (!g.same_layout(a_trace.grid()) || !g.same_layout(b_trace.grid()))
    throw InvalidArgument("traces must live on the data grid");
  if (a_trace.min_value() <= 0 || b_trace.min_value() <= 0)
    throw InvalidArgument("boundary traces must be positive");

  ScalarField w;
  try {
    w = quotient_field(data);
  } catch (const DegenerateData& e) {
    throw DegenerateData(std::string("quotient stage: ") + e.what());
  }

  // sigma on the boundary from the known traces: sigma = a v1^2 / b^2
  ScalarField sigma_bdry(g);
  for (std::size_t m = 0; m < g.size(); ++m) {
    double v1 = data.v1.values()[m];
    double bt = b_trace.values()[m];
    sigma_bdry.values()[m] = a_trace.values()[m] * v1 * v1 / (bt * bt);
  }

  ReconstructionResult res;
  SigmaRecovery rec;
  try {
    rec = recover_sigma(w, sigma_bdry, reg_lambda, tol);
  } catch (const DegenerateData& e) {
    throw DegenerateData(std::string("conductivity stage: ") + e.what());
  } catch (const Error& e) {
    throw SolverError(std::string("conductivity stage: ") + e.what());
  }
  res.sigma_hat = std::move(rec.sigma);
  res.sigma_report = rec.report;
  res.constant_quotient = rec.constant_quotient;

  // rho = 1/u1 solves -div(sigma grad rho) = v1 with boundary trace b/v1;
  // the solve uses the geometric-mean flux form matched to the recovery
  ScalarField rho_bdry(g);
  for (std::size_t m = 0; m < g.size(); ++m)
    rho_bdry.values()[m] = b_trace.values()[m] / data.v1.values()[m];
  ScalarField root_sigma(g);
  for (std::size_t m = 0; m < g.size(); ++m)
    root_sigma.values()[m] = std::sqrt(res.sigma_hat.values()[m]);
  DirichletResult rho;
  try {
    rho = solve_geo_dirichlet(root_sigma, data.v1, rho_bdry, tol);
  } catch (const DegenerateData& e) {
    throw DegenerateData(std::string("potential stage: ") + e.what());
  } catch (const Error& e) {
    throw SolverError(std::string("potential stage: ") + e.what());
  }
  res.rho_hat = std::move(rho.u);
  res.rho_report = rho.report;

  res.a_hat = ScalarField(g);
  res.b_hat = ScalarField(g);
  for (std::size_t m = 0; m < g.size(); ++m) {
    double r = res.rho_hat.values()[m];
    res.a_hat.values()[m] = res.sigma_hat.values()[m] * r * r;
    res.b_hat.values()[m] = data.v1.values()[m] * r;
  }

  // residual diagnostics over interior nodes, in the same discretizations
  // the two stages solved
  FluxRows A(w);
  res.residual_conductivity = A.residual_rms(root_sigma.values());
  std::vector<double> lap_rho(g.size());
  apply_geo_flux(root_sigma, res.rho_hat.values(), lap_rho);
  const auto& d = g.dims();
  double s_ell = 0;
  std::int64_t n_int = 0;
  for (std::int64_t i = 1; i < d[0] - 1; ++i)
    for (std::int64_t j = 1; j < d[1] - 1; ++j)
      for (std::int64_t k = 1; k < d[2] - 1; ++k) {
        std::size_t c = g.flat(i, j, k);
        double e = lap_rho[c] - data.v1.values()[c];
        s_ell += e * e;
        ++n_int;
      }
  res.residual_elliptic = std::sqrt(s_ell / n_int);
  return res;
}

}  // namespace qpat
