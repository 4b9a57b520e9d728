#include "core/quadrature.hpp"

#include <cmath>

namespace qpat {

GaussRule gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("gauss_legendre: n must be positive");
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));  // Chebyshev initial guess
    double pp = 0;
    for (int it = 0; it < 100; ++it) {  // Newton on P_n(x)
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1);
      double dx = p1 / pp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    double w = 2.0 / ((1 - x * x) * pp * pp);
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  return r;
}

std::vector<Vec3> fibonacci_sphere(int n) {
  if (n < 2) throw InvalidArgument("fibonacci_sphere: n must be at least 2");
  std::vector<Vec3> pts(n);
  const double pi = 3.14159265358979323846;
  const double ga = pi * (3.0 - std::sqrt(5.0));  // golden angle
  for (int i = 0; i < n; ++i) {
    double z = 1.0 - (2.0 * i + 1.0) / n;
    double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    double phi = ga * i;
    pts[i] = {rho * std::cos(phi), rho * std::sin(phi), z};
  }
  return pts;
}

double interp(const ScalarField& f, const Vec3& p) {
  const Grid& g = f.grid();
  const auto& d = g.dims();
  double c[3] = {(p.x - g.origin().x) / g.spacing().x,
                 (p.y - g.origin().y) / g.spacing().y,
                 (p.z - g.origin().z) / g.spacing().z};
  std::int64_t i0[3];
  double t[3];
  for (int a = 0; a < 3; ++a) {
    if (c[a] < -1e-9 || c[a] > double(d[a] - 1) + 1e-9)
      throw InvalidArgument("interp: point outside grid box");
    std::int64_t i = static_cast<std::int64_t>(std::floor(c[a]));
    i = std::clamp<std::int64_t>(i, 0, d[a] - 2);
    i0[a] = i;
    t[a] = std::clamp(c[a] - double(i), 0.0, 1.0);
  }
  double acc = 0;
  for (int di = 0; di < 2; ++di)
    for (int dj = 0; dj < 2; ++dj)
      for (int dk = 0; dk < 2; ++dk) {
        double w = (di ? t[0] : 1 - t[0]) * (dj ? t[1] : 1 - t[1]) *
                   (dk ? t[2] : 1 - t[2]);
        acc += w * f.at(i0[0] + di, i0[1] + dj, i0[2] + dk);
      }
  return acc;
}

double sphere_integral_fn(const std::function<double(const Vec3&, const Vec3&)>& fn,
                          const Vec3& c, double r, const QuadSpec& q) {
  if (r <= 0) throw InvalidArgument("sphere_integral: radius must be positive");
  const double pi = 3.14159265358979323846;
  auto dirs = fibonacci_sphere(q.sphere_points);
  double acc = 0;
  for (const auto& th : dirs) acc += fn(c + th * r, th);
  return acc * (4.0 * pi * r * r / q.sphere_points);
}

double sphere_integral(const ScalarField& f, const Vec3& c, double r,
                       const QuadSpec& q) {
  return sphere_integral_fn(
      [&](const Vec3& p, const Vec3&) { return interp(f, p); }, c, r, q);
}

double ball_integral_fn(const std::function<double(const Vec3&)>& fn, const Ball& b,
                        const QuadSpec& q) {
  if (b.radius <= 0) throw InvalidArgument("ball_integral: radius must be positive");
  const double pi = 3.14159265358979323846;
  GaussRule gl = gauss_legendre(q.radial_points);
  auto dirs = fibonacci_sphere(q.sphere_points);
  double acc = 0;
  for (int n = 0; n < q.radial_points; ++n) {
    double r = 0.5 * b.radius * (gl.nodes[n] + 1.0);
    double wr = 0.5 * b.radius * gl.weights[n] * r * r;
    double shell = 0;
    for (const auto& th : dirs) shell += fn(b.center + th * r);
    acc += wr * shell;
  }
  return acc * (4.0 * pi / q.sphere_points);
}

double ball_integral(const ScalarField& f, const Ball& b, const QuadSpec& q) {
  return ball_integral_fn([&](const Vec3& p) { return interp(f, p); }, b, q);
}

double ball_node_sum(const ScalarField& f, const Ball& b) {
  const Grid& g = f.grid();
  const auto& d = g.dims();
  const Vec3 h = g.spacing();
  const double cell = h.x * h.y * h.z;
  // bounding index range of the ball
  Index3 lo = g.nearest_node({b.center.x - b.radius, b.center.y - b.radius,
                              b.center.z - b.radius});
  Index3 hi = g.nearest_node({b.center.x + b.radius, b.center.y + b.radius,
                              b.center.z + b.radius});
  double acc = 0;
  for (std::int64_t i = std::max<std::int64_t>(0, lo[0] - 1);
       i <= std::min(d[0] - 1, hi[0] + 1); ++i)
    for (std::int64_t j = std::max<std::int64_t>(0, lo[1] - 1);
         j <= std::min(d[1] - 1, hi[1] + 1); ++j)
      for (std::int64_t k = std::max<std::int64_t>(0, lo[2] - 1);
           k <= std::min(d[2] - 1, hi[2] + 1); ++k) {
        if (dist(g.node(i, j, k), b.center) <= b.radius) acc += f.at(i, j, k);
      }
  return acc * cell;
}

}  // namespace qpat
