#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/specfun.hpp"
#include "core/errors.hpp"

using namespace qpat;

namespace {
constexpr double kPi = 3.14159265358979323846;

double rel_err(double got, double want) {
  return std::fabs(got - want) / std::fabs(want);
}

/// Closed form for order 1/2, independent of the implementation path.
double k_half_closed(double z) { return std::sqrt(kPi / (2.0 * z)) * std::exp(-z); }
}  // namespace

TEST_CASE("order 1/2 matches the closed form to 1e-12") {
  for (double z : {1e-6, 1e-3, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0}) {
    auto e = bessel_k({1}, z);
    CHECK(rel_err(e.value, k_half_closed(z)) < 1e-12);
    CHECK_FALSE(e.underflow);
  }
  // high-precision references
  CHECK(rel_err(bessel_k({1}, 1.0).value, 0.46106850444789456) < 1e-12);
  CHECK(rel_err(bessel_k({1}, 2.0).value, 0.11993777196806145) < 1e-12);
}

TEST_CASE("half-integer ladder matches references") {
  CHECK(rel_err(bessel_k({3}, 0.3).value, 7.34569791080356) < 1e-12);
  CHECK(rel_err(bessel_k({3}, 1.0).value, 0.92213700889578912) < 1e-12);
  CHECK(rel_err(bessel_k({3}, 2.0).value, 0.17990665795209217) < 1e-12);
  CHECK(rel_err(bessel_k({5}, 0.3).value, 75.152140164374883) < 1e-12);
  CHECK(rel_err(bessel_k({5}, 1.0).value, 3.2274795311352619) < 1e-12);
  CHECK(rel_err(bessel_k({5}, 7.0).value, 0.00064354115448130757) < 1e-12);
}

TEST_CASE("integer orders match references across the z=2 crossover") {
  struct Ref {
    int num;
    double z, v;
  };
  const Ref refs[] = {
      {0, 1e-6, 13.931442073626419}, {0, 0.1, 2.4270690247020166},
      {0, 1.0, 0.42102443824070833}, {0, 1.9, 0.12884597927604748},
      {0, 2.0, 0.11389387274953344}, {0, 2.1, 0.10078374088996695},
      {0, 10.0, 1.7780062316167652e-5}, {0, 50.0, 3.4101677497894955e-23},
      {2, 0.5, 1.6564411200033009},  {2, 2.0, 0.13986588181652243},
      {2, 30.0, 2.1677320018915494e-14},
      {4, 1e-6, 1999999999999.5},    {4, 1.0, 1.6248388986351775},
      {4, 2.0, 0.25375975456605586}, {4, 2.1, 0.21768508520759353},
      {4, 50.0, 3.5479318388581977e-23},
      {6, 0.5, 62.057909529930256},  {6, 5.0, 0.0082917684152309322},
  };
  for (const auto& r : refs) CHECK(rel_err(bessel_k({r.num}, r.z).value, r.v) < 1e-10);
  // both branches stay accurate right at the series / continued-fraction switch
  CHECK(rel_err(bessel_k({4}, 1.999999999).value, 0.2537597549596815) < 1e-12);
  CHECK(rel_err(bessel_k({4}, 2.000000001).value, 0.25375975417243023) < 1e-12);
}

TEST_CASE("underflow flag for huge z, domain error for bad z") {
  auto e = bessel_k({2}, 800.0);
  CHECK(e.value == 0.0);
  CHECK(e.underflow);
  CHECK_FALSE(bessel_k({2}, 5.0).underflow);
  CHECK_THROWS_AS(bessel_k({1}, 0.0), InvalidArgument);
  CHECK_THROWS_AS(bessel_k({1}, -1.0), InvalidArgument);
  CHECK_THROWS_AS(bessel_k({-1}, 1.0), InvalidArgument);
}

TEST_CASE("fundamental solution: 3-d closed form exp(-sqrt(nu) r)/(4 pi r)") {
  for (double r : {0.2, 0.5, 1.0, 2.0, 3.7}) {
    for (double nu : {0.5, 1.0, 2.0}) {
      double want = std::exp(-std::sqrt(nu) * r) / (4.0 * kPi * r);
      CHECK(rel_err(fs_eval(1.0, nu, 3, r), want) < 1e-12);
    }
  }
  CHECK(rel_err(fs_eval(1, 1, 3, 1.0), 0.02927491576215958) < 1e-12);
  CHECK(rel_err(fs_eval(1, 1, 3, 2.0), 0.0053848198254621574) < 1e-12);
  CHECK(rel_err(fs_eval(2, 3, 3, 1.3), 0.0062279750893240193) < 1e-12);
}

TEST_CASE("fundamental solution in higher dimensions") {
  CHECK(rel_err(fs_eval(1, 1, 4, 1.0), 0.01524648825161622) < 1e-10);
  CHECK(rel_err(fs_eval(1, 1, 5, 1.0), 0.0093184951042930756) < 1e-12);
  CHECK(rel_err(fs_eval(2, 0.5, 4, 0.7), 0.023151199808430967) < 1e-10);
}

TEST_CASE("diffusion scaling identity") {
  // G_{mu,nu}(r) = mu^{-n/2} G_{1,nu}(r / sqrt(mu))
  for (int dim : {3, 4, 5}) {
    for (double mu : {0.5, 2.0, 7.3}) {
      for (double nu : {0.25, 1.0, 4.0}) {
        for (double r : {0.3, 1.0, 2.5}) {
          double lhs = fs_eval(mu, nu, dim, r);
          double rhs = std::pow(mu, -0.5 * dim) * fs_eval(1.0, nu, dim, r / std::sqrt(mu));
          CHECK(rel_err(lhs, rhs) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("r^{n-2} G tends to the Newtonian constant as r -> 0") {
  // n = 3: r G -> 1/(4 pi), independent of nu
  double v = fs_eval(1.0, 2.0, 3, 1e-7) * 1e-7;
  CHECK(rel_err(v, 1.0 / (4.0 * kPi)) < 1e-5);
  // n = 5: r^3 G -> Gamma(3/2) 2^{3/2} / (2 (2 pi)^{5/2})
  double v5 = fs_eval(1.0, 1.0, 5, 1e-7) * std::pow(1e-7, 3);
  double want5 = 0.5 * std::tgamma(1.5) * std::pow(2.0, 1.5) * std::pow(2.0 * kPi, -2.5);
  CHECK(rel_err(v5, want5) < 1e-4);
}

TEST_CASE("two-sided envelope certificate: smallest integer constant is 13") {
  auto bad = certify_two_sided(1, 1, 3, 12.0, 0.1, 10.0, 64);
  CHECK_FALSE(bad.passed);
  CHECK(bad.max_violation > 0);
  auto good = certify_two_sided(1, 1, 3, 13.0, 0.1, 10.0, 64);
  CHECK(good.passed);
  CHECK(good.max_violation <= 0);
  // tight analytic threshold: the lower envelope forces C >= 4 pi
  auto just_below = certify_two_sided(1, 1, 3, 4.0 * kPi * 0.999, 0.1, 10.0, 64);
  CHECK_FALSE(just_below.passed);
  auto just_above = certify_two_sided(1, 1, 3, 4.0 * kPi * 1.001, 0.1, 10.0, 64);
  CHECK(just_above.passed);
}

TEST_CASE("certificate domain errors") {
  CHECK_THROWS_AS(certify_two_sided(1, 1, 3, 13.0, 1.0, 1.0, 16), InvalidArgument);
  CHECK_THROWS_AS(certify_two_sided(1, 1, 3, 13.0, -1.0, 1.0, 16), InvalidArgument);
  CHECK_THROWS_AS(certify_two_sided(1, 1, 3, 13.0, 0.1, 1.0, 1), InvalidArgument);
  CHECK_THROWS_AS(certify_two_sided(1, 1, 2, 13.0, 0.1, 1.0, 16), InvalidArgument);
}

TEST_CASE("certificate serializes to json") {
  auto c = certify_two_sided(1, 1, 3, 13.0, 0.1, 10.0, 16);
  std::string j = certificate_json(c);
  CHECK(j.find("\"passed\": true") != std::string::npos);
  CHECK(j.find("\"constant\": 13.0") != std::string::npos);
}
