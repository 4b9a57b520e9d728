#pragma once

#include <vector>

#include "core/field.hpp"
#include "core/quadrature.hpp"

namespace qpat {

/// First nonzero Neumann eigenvalue of -Laplace on the unit ball in 3-D
/// (square of the first positive root of the derivative of the first
/// spherical Bessel function, t = 2.0815759778181006). Scales as mu2 / r^2
/// on B(x, r); used by the mean-removed Poincare step of the gradient
/// doubling check. The value is pinned against a radial Neumann eigensolve
/// in the test suite.
inline constexpr double kNeumannMu2UnitBall = 4.3329585514293817;

/// Geometric radius ladder r0 * ratio^i, i = 0..count-1. The default ratio
/// resolves the radial derivatives in the identity checks without
/// amplifying quadrature noise.
std::vector<double> radius_ladder(double r0, int count = 32, double ratio = 1.08);

/// Weighted frequency data of a field u about a center x0. Per radius r:
///   H      boundary mass        int_{dB} sigma u^2 dS
///   D      Dirichlet energy     int_B sigma |grad u|^2 dx
///   K      ball mass            int_B sigma u^2 dx
///   Hhat   flux square          int_{dB} sigma (d_nu u)^2 dS
///   Htilde weight drift (shell) int_{dB} u^2 grad sigma . nu dS
///   Dtilde weight drift (ball)  int_B |grad u|^2 grad sigma . (x - x0) dx
///   Dflux  flux form of D       int_{dB} sigma u d_nu u dS
///   N      frequency            r D / H, flagged undefined where H = 0
/// Dflux is evaluated on the same sphere points as H and Hhat so that the
/// Cauchy-Schwarz inequality Dflux^2 <= H Hhat is exact for the discrete
/// sums; it agrees with D up to discretization error when div(sigma grad u)
/// vanishes.
struct FrequencyCurve {
  Vec3 center;
  std::vector<double> radii;
  std::vector<double> H, D, K, Hhat, Htilde, Dtilde, Dflux;
  std::vector<double> N;        ///< valid where n_defined
  std::vector<bool> n_defined;  ///< false where H vanishes (u zero on the sphere)
};

/// Evaluate the frequency quantities by sphere/ball quadrature of the
/// trilinearly interpolated fields; d_nu u is the interpolated gradient
/// dotted with the outward normal. Requires sigma > 0, matching grids, and
/// every ball B(x0, r) inside the field box.
FrequencyCurve frequency_curve(const ScalarField& u, const ScalarField& sigma,
                               const Vec3& x0, const std::vector<double>& radii,
                               const QuadSpec& quad = {});

/// Defects of the radial derivative identities
///   d_r H = (n-1)/r H + Htilde + 2 D
///   d_r D = (n-2)/r D + Dtilde / r + 2 Hhat
/// (centered differences of log value against log radius on the geometric
/// ladder, exact on power laws; plain centered differences where a stencil
/// value is nonpositive), the Cauchy-Schwarz slack
/// Dflux^2 <= H Hhat, and the ball-mass bound
///   K(r) <= delta^n e^{delta kappa_sq} / n * H(r)  for r < delta.
/// The D identity is also evaluated with Dtilde carrying no 1/r factor;
/// that variant is reported as a diagnostic only (defect_dD_stated).
struct FrequencyIdentityReport {
  std::vector<double> radii;             ///< interior radii of the ladder
  std::vector<double> defect_dH;         ///< relative defect of the H identity
  std::vector<double> defect_dD;         ///< relative defect of the D identity
  std::vector<double> defect_dD_stated;  ///< diagnostic variant (no 1/r on Dtilde)
  double max_defect_dH = 0;
  double max_defect_dD = 0;
  std::vector<double> cs_slack;  ///< (H Hhat - Dflux^2) / scale, every radius
  double min_cs_slack = 0;
  std::vector<double> flux_gap;  ///< |D - Dflux| / scale, every radius
  double max_flux_gap = 0;
  double delta = 0;              ///< radius bound used by the K check
  double kappa_sq = 0;           ///< squared coefficient certificate used
  double min_k_slack = 0;        ///< min over r < delta of (bound - K) / bound
  bool k_bound_pass = false;
};

/// delta = 0 selects max(1, last radius); radii at or beyond delta are
/// excluded from the K check. kappa_sq is the square of the certificate
/// kappa with 1/kappa <= sigma and ||sigma||_{C^{0,1}} <= kappa. Needs at
/// least 5 radii for the centered differences.
FrequencyIdentityReport check_frequency_identities(const FrequencyCurve& curve,
                                                   double delta = 0,
                                                   double kappa_sq = 1.0);

/// Almost-monotonicity of the frequency: r -> e^{mu r} N(r) nondecreasing
/// within a relative tolerance per step, plus the endpoint bound
/// N(r) <= e^{mu delta} N(delta) with delta the last ladder radius.
/// mu = kappa^2 (1 + inradius of the region) for conductivity solutions.
struct MonotonicityReport {
  double mu = 0;
  double tol = 0;
  bool monotone_pass = false;
  double worst_step = 0;      ///< min over steps of the e^{mu r} N ratio
  bool endpoint_pass = false;
  double endpoint_worst = 0;  ///< max over r of N(r) / (e^{mu delta} N(delta))
  int skipped = 0;            ///< steps skipped at undefined or zero N
};

MonotonicityReport check_frequency_monotonicity(const FrequencyCurve& curve, double mu,
                                                double tol = 0.02);

/// Three-ball data for the gradient of a conductivity solution: the L2
/// gradient norms on B(y, k r), B(y, l r), B(y, m r), the exponent fitted
/// from log ||grad v||_l = gamma log ||grad v||_k + (1-gamma) log ||grad v||_m,
/// and the log-combination defect at the pinned gamma = 1/2.
struct ThreeBallReport {
  Vec3 center;
  double radii[3] = {0, 0, 0};
  double norms[3] = {0, 0, 0};
  bool zero_norm = false;    ///< some ball had vanishing gradient norm
  bool gamma_valid = false;  ///< fitted gamma exists and lies in (0, 1)
  double fitted_gamma = 0;
  double defect_half = 0;
};

/// Requires 0 < k < l < m and m r < dist(y, box boundary).
ThreeBallReport three_ball_check(const ScalarField& v, const Vec3& y, double r,
                                 double k, double l, double m,
                                 const QuadSpec& quad = {});

/// Exit-time cover of the straight segment from x to x0 by balls of radius
/// delta: y_0 = x, and y_{k+1} is the first point of the path leaving
/// B(y_k, delta), until the endpoint lies inside the last ball. Consecutive
/// centers are exactly delta apart; N <= N0 = floor(2 n |x - x0| / delta)
/// (geodesic/Euclidean ratio 1 on convex boxes).
struct BallChain {
  Vec3 x, x0;
  double delta = 0;
  std::vector<Vec3> centers;  ///< y_0 .. y_N
  int N = 0;
  int N0_bound = 0;
};

/// Requires both endpoints in the domain box and
/// delta < dist(segment, boundary) / 3.
BallChain chain_of_balls(const Vec3& x, const Vec3& x0, double delta,
                         const Box& domain);

/// Propagated lower bound for ||grad u||_{L2(B(x, delta))}:
///   exp(-[ln(c M / eta) / gamma] * exp([2 n |ln gamma|] frak_c dist / delta))
/// with n = 3. Requires M >= 1, 0 < eta < M, 0 < gamma < 1, c >= 1,
/// frak_c >= 1, dist >= 0, delta > 0.
double lower_bound_eval(double M, double eta, double gamma, double c, double frak_c,
                        double dist, double delta);

/// Local vanishing order versus the measured frequency ceiling: fits the
/// log-log slope of rho -> ||u||^2_{L2(B(x, rho))} on a geometric ladder
/// ending at r and checks it against n + 2 sup N(x, rho), the growth rate
/// the doubling inequality permits. The gradient variant applies the
/// mean-removed Poincare step ||u - avg||^2 <= rho^2 / mu2 ||grad u||^2
/// with the frozen unit-ball constant. reference_frequency records
/// N(x0, delta) of the same field for context.
struct DoublingReport {
  double fitted_slope = 0;       ///< d log ||u||^2_{B(x,rho)} / d log rho
  double frequency_ceiling = 0;  ///< n + 2 sup N over the ladder
  double tol = 0;
  bool pass = false;             ///< fitted_slope <= ceiling + tol
  double grad_slope = 0;         ///< same fit for ||grad u||^2
  double pw_worst = 0;           ///< max of mu2 ||u - avg||^2 / (rho^2 ||grad u||^2)
  bool pw_pass = false;          ///< pw_worst <= 1 + tol_pw (5%)
  double reference_frequency = 0;
  bool reference_defined = false;
  int skipped = 0;               ///< ladder radii with vanishing norms
};

DoublingReport doubling_lower_bound_check(const ScalarField& u, const ScalarField& sigma,
                                          const Vec3& x0, const Vec3& x, double delta,
                                          double r, double tol = 0.25,
                                          const QuadSpec& quad = {});

/// Near-source behaviour of the quotient of two point-source solutions
/// about the pole xi2, on the annulus r_lo <= |x - xi2| <= |xi1 - xi2| / 2:
/// (i) extremes of the compensated value |x - xi2|^{n-2} w(x), giving the
/// two-sided band [1/c_star, c_star]; (ii) the maximizing ball of the
/// gradient norm over a frozen search shell (centers at 0.30..0.35 of the
/// separation, ball radius a tenth of it), whose value feeds the
/// lower-bound regression. positive is false when w fails to stay positive
/// on the sampled annulus.
struct NearSourceReport {
  double annulus_lo = 0, annulus_hi = 0;
  double min_rw = 0, max_rw = 0;
  double c_star = 0;
  bool positive = false;
  Vec3 best_center;
  double rho = 0;             ///< search ball radius
  double best_grad_norm = 0;  ///< ||grad w||_{L2(B(best_center, rho))}
};

/// Requires the annulus closure inside the field box and
/// r_lo < |xi1 - xi2| / 2.
NearSourceReport near_source_gradient_check(const ScalarField& w, const Vec3& xi1,
                                            const Vec3& xi2, double r_lo = 0.1,
                                            const QuadSpec& quad = {});

/// Pointwise weighted-interpolation inequality at centers x sampled from
/// omega and ladder radii r, for f normalized by its Holder norm over the
/// whole field domain:
///   |f(x)| <= ||f |grad u|^2||_{L1(B(x,r))} / ||grad u||^2_{L2(B(x,r))} + r^alpha.
/// Both integrals are node Riemann sums over the same node set, and the
/// normalizing seminorm is made exact on every pair the inequality touches
/// (the sampled global seminorm is raised to the exact center-to-node
/// seminorm when larger), which makes the inequality a theorem of the
/// discrete data; max_violation <= 0 reports success.
struct InterpolationReport {
  double alpha = 0;
  double holder_total = 0;  ///< normalizing C^{0,alpha} norm of f
  int tested = 0;           ///< (center, radius) pairs evaluated
  int skipped = 0;          ///< pairs skipped: zero-gradient ball or escaping box
  double max_violation = 0; ///< max of |f(x)| - bound over tested pairs
  bool pass = false;
  std::vector<Vec3> centers;
  std::vector<double> tightest_r;      ///< per center: radius of the smallest bound
  std::vector<double> tightest_bound;  ///< the bound at that radius
};

InterpolationReport weighted_interpolation_check(const ScalarField& f,
                                                 const ScalarField& u, const Box& omega,
                                                 double alpha,
                                                 const std::vector<double>& r_ladder,
                                                 int centers_per_axis = 3);

}  // namespace qpat
