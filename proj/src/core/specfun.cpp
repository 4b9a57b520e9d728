#include "core/specfun.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "core/errors.hpp"

namespace qpat {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEulerGamma = 0.57721566490153286061;

/// Scaled half-integer ladder: returns e^z K_{m+1/2}(z) via the closed forms
/// e^z K_{1/2} = sqrt(pi/(2z)), e^z K_{3/2} = sqrt(pi/(2z)) (1 + 1/z) and the
/// upward recurrence K_{v+1} = K_{v-1} + (2v/z) K_v.
double scaled_half_integer(int m, double z) {
  double s0 = std::sqrt(kPi / (2.0 * z));
  if (m == 0) return s0;
  double s1 = s0 * (1.0 + 1.0 / z);
  for (int k = 1; k < m; ++k) {
    double s2 = s0 + (2.0 * (k + 0.5) / z) * s1;
    s0 = s1;
    s1 = s2;
  }
  return s1;
}

/// K_0 and K_1 for z <= 2 by the convergent ascending series at order zero.
void series_k0_k1(double z, double& k0, double& k1) {
  const double d = -std::log(0.5 * z);
  double ff = d - kEulerGamma;
  double p = 0.5, q = 0.5, c = 1.0;
  double sum0 = ff, sum1 = p;  // sum1 accumulates the (z/2) K_1 series
  const double zz4 = 0.25 * z * z;
  for (int i = 1; i <= 200; ++i) {
    ff = (i * ff + p + q) / (double(i) * i);
    c *= zz4 / i;
    p /= i;
    q /= i;
    double del0 = c * ff;
    sum0 += del0;
    double del1 = c * (p - i * ff);
    sum1 += del1;
    if (std::fabs(del0) < std::fabs(sum0) * 1e-18) break;
  }
  k0 = sum0;
  k1 = sum1 * (2.0 / z);
}

/// e^z K_0(z) and e^z K_1(z) for z > 2 by the Thompson-Barnett continued
/// fraction (order-zero case).
void cf2_k0_k1_scaled(double z, double& k0s, double& k1s) {
  const double a1 = 0.25;  // 1/4 - mu^2 with mu = 0
  double b = 2.0 * (1.0 + z);
  double d = 1.0 / b;
  double h = d, delh = d;
  double q1 = 0.0, q2 = 1.0;
  double a = -a1;
  double q = a1, c = a1;
  double s = 1.0 + q * delh;
  for (int i = 2; i <= 20000; ++i) {
    a -= 2.0 * (i - 1);
    c = -a * c / i;
    double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    double dels = q * delh;
    s += dels;
    if (std::fabs(dels / s) < 1e-16) break;
  }
  h = a1 * h;
  k0s = std::sqrt(kPi / (2.0 * z)) / s;
  k1s = k0s * (z + 0.5 - h) / z;
}

/// Scaled integer ladder: e^z K_m(z).
double scaled_integer(int m, double z) {
  double k0s, k1s;
  if (z <= 2.0) {
    double k0, k1;
    series_k0_k1(z, k0, k1);
    double ez = std::exp(z);  // z <= 2, no overflow
    k0s = k0 * ez;
    k1s = k1 * ez;
  } else {
    cf2_k0_k1_scaled(z, k0s, k1s);
  }
  if (m == 0) return k0s;
  if (m == 1) return k1s;
  double s0 = k0s, s1 = k1s;
  for (int k = 1; k < m; ++k) {
    double s2 = s0 + (2.0 * k / z) * s1;
    s0 = s1;
    s1 = s2;
  }
  return s1;
}

}  // namespace

BesselEval bessel_k(BesselOrder order, double z) {
  if (!(z > 0.0)) throw InvalidArgument("bessel_k: z must be positive");
  if (order.numerator < 0)
    throw InvalidArgument("bessel_k: order numerator must be nonnegative");
  double scaled = order.half_integer()
                      ? scaled_half_integer(order.numerator / 2, z)
                      : scaled_integer(order.numerator / 2, z);
  BesselEval out;
  // unscale via exp(-z); flag hitting zero even though K(z) > 0
  out.value = scaled * std::exp(-z);
  out.underflow = (out.value == 0.0 && scaled > 0.0);
  return out;
}

double fs_eval(double mu, double nu, int dim, double r) {
  if (!(mu > 0.0) || !(nu > 0.0))
    throw InvalidArgument("fs_eval: mu and nu must be positive");
  if (dim < 3) throw InvalidArgument("fs_eval: dim must be at least 3");
  if (!(r > 0.0)) throw InvalidArgument("fs_eval: r must be positive");
  const double half_n = 0.5 * dim;
  const double order = half_n - 1.0;
  double z = std::sqrt(nu) * r / std::sqrt(mu);
  BesselEval k = bessel_k({dim - 2}, z);
  return std::pow(2.0 * kPi * mu, -half_n) *
         std::pow(std::sqrt(nu * mu) / r, order) * k.value;
}

BoundCertificate certify_two_sided(double mu, double nu, int dim, double constant,
                                   double r_min, double r_max, int samples) {
  if (!(mu > 0.0) || !(nu > 0.0))
    throw InvalidArgument("certify_two_sided: mu and nu must be positive");
  if (dim < 3) throw InvalidArgument("certify_two_sided: dim must be at least 3");
  if (!(constant > 0.0))
    throw InvalidArgument("certify_two_sided: constant must be positive");
  if (!(r_min > 0.0) || !(r_min < r_max))
    throw InvalidArgument("certify_two_sided: need 0 < r_min < r_max");
  if (samples < 2) throw InvalidArgument("certify_two_sided: need samples >= 2");

  BoundCertificate cert;
  cert.mu = mu;
  cert.nu = nu;
  cert.dim = dim;
  cert.constant = constant;
  cert.r_min = r_min;
  cert.r_max = r_max;
  cert.samples = samples;

  const double rate = std::sqrt(nu) / std::sqrt(mu);
  double worst = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    double t = double(s) / (samples - 1);
    double r = r_min * std::pow(r_max / r_min, t);
    double g = fs_eval(mu, nu, dim, r);
    double envelope = std::pow(r, -(dim - 2.0));
    double lower = std::exp(-rate * r) * envelope / constant;
    double upper = constant * std::exp(-0.5 * rate * r) * envelope;
    worst = std::max(worst, lower - g);
    worst = std::max(worst, g - upper);
  }
  cert.max_violation = worst;
  cert.passed = worst <= 0.0;
  return cert;
}

std::string certificate_json(const BoundCertificate& c) {
  nlohmann::json j;
  j["mu"] = c.mu;
  j["nu"] = c.nu;
  j["dim"] = c.dim;
  j["constant"] = c.constant;
  j["r_min"] = c.r_min;
  j["r_max"] = c.r_max;
  j["samples"] = c.samples;
  j["max_violation"] = c.max_violation;
  j["passed"] = c.passed;
  return j.dump(2) + "\n";
}

}  // namespace qpat
