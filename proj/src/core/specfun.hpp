#pragma once

#include <string>

namespace qpat {

/// Order of a modified Bessel function as a half-integer: order = numerator/2.
/// Dimension n maps to numerator = n - 2 (order n/2 - 1).
struct BesselOrder {
  int numerator = 1;
  double value() const { return 0.5 * numerator; }
  bool half_integer() const { return numerator % 2 != 0; }
};

struct BesselEval {
  double value = 0;
  bool underflow = false;  // true value positive but below doubles
};

/// Modified Bessel function of the second kind K_order(z), z > 0.
/// Half-integer orders use the exact closed forms built up from K_{1/2};
/// integer orders use a convergent series for z <= 2 and a continued
/// fraction for z > 2.
BesselEval bessel_k(BesselOrder order, double z);

/// Radially symmetric fundamental solution of -mu Laplace + nu in dimension
/// dim >= 3, evaluated at radius r > 0:
/// (2 pi mu)^{-n/2} (sqrt(nu mu)/r)^{n/2-1} K_{n/2-1}(sqrt(nu) r / sqrt(mu)).
double fs_eval(double mu, double nu, int dim, double r);

/// Certificate for the two-sided envelope
///   C^{-1} e^{-sqrt(nu) r / sqrt(mu)} / r^{n-2}  <=  G_{mu,nu}(r)
///   G_{mu,nu}(r)  <=  C e^{-sqrt(nu) r / (2 sqrt(mu))} / r^{n-2}
/// checked on log-spaced radii in [r_min, r_max].
struct BoundCertificate {
  double mu = 0, nu = 0;
  int dim = 3;
  double constant = 0;
  double r_min = 0, r_max = 0;
  int samples = 0;
  double max_violation = 0;  // largest signed violation; <= 0 means both hold
  bool passed = false;
};

BoundCertificate certify_two_sided(double mu, double nu, int dim, double constant,
                                   double r_min, double r_max, int samples);

std::string certificate_json(const BoundCertificate& c);

}  // namespace qpat
