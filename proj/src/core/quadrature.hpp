#pragma once

#include <functional>
#include <vector>

#include "core/field.hpp"

namespace qpat {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes, weights;
};
GaussRule gauss_legendre(int n);

/// Near-uniform unit-sphere directions (spherical Fibonacci lattice).
std::vector<Vec3> fibonacci_sphere(int n);

/// Quadrature parameters for ball and sphere integrals.
struct QuadSpec {
  int sphere_points = 194;
  int radial_points = 16;
};

/// Trilinear interpolation at a point inside the grid box.
double interp(const ScalarField& f, const Vec3& p);

/// Integral of f over the sphere of radius r about c:
/// (4 pi r^2 / N) * sum over Fibonacci directions, trilinear samples.
double sphere_integral(const ScalarField& f, const Vec3& c, double r,
                       const QuadSpec& q = {});

/// Same, for an arbitrary integrand of (position, outward unit normal).
double sphere_integral_fn(const std::function<double(const Vec3&, const Vec3&)>& fn,
                          const Vec3& c, double r, const QuadSpec& q = {});

/// Integral of f over the ball B(c, R): radial Gauss-Legendre times the
/// Fibonacci sphere rule.
double ball_integral(const ScalarField& f, const Ball& b, const QuadSpec& q = {});

double ball_integral_fn(const std::function<double(const Vec3&)>& fn, const Ball& b,
                        const QuadSpec& q = {});

/// Sum of f over grid nodes inside the ball, times the cell volume
/// (exact-inequality-friendly Riemann sum; used by the pointwise
/// interpolation checks).
double ball_node_sum(const ScalarField& f, const Ball& b);

}  // namespace qpat
