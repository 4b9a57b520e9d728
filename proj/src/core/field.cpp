#include "core/field.hpp"

#include <algorithm>
#include <cmath>

namespace qpat {

double ScalarField::min_value() const {
  return *std::min_element(m_v.begin(), m_v.end());
}

double ScalarField::max_value() const {
  return *std::max_element(m_v.begin(), m_v.end());
}

double ScalarField::max_abs() const {
  double m = 0;
  for (double v : m_v) m = std::max(m, std::fabs(v));
  return m;
}

bool ScalarField::all_finite() const {
  for (double v : m_v)
    if (!std::isfinite(v)) return false;
  return true;
}

double ScalarField::min_in(const IndexBox& region, Index3* argmin) const {
  double best = m_v[m_grid.flat(region.lo)];
  Index3 where = region.lo;
  for (std::int64_t i = region.lo[0]; i <= region.hi[0]; ++i)
    for (std::int64_t j = region.lo[1]; j <= region.hi[1]; ++j)
      for (std::int64_t k = region.lo[2]; k <= region.hi[2]; ++k) {
        double v = at(i, j, k);
        if (v < best) {
          best = v;
          where = {i, j, k};
        }
      }
  if (argmin) *argmin = where;
  return best;
}

double ScalarField::max_abs_in(const IndexBox& region) const {
  double m = 0;
  for (std::int64_t i = region.lo[0]; i <= region.hi[0]; ++i)
    for (std::int64_t j = region.lo[1]; j <= region.hi[1]; ++j)
      for (std::int64_t k = region.lo[2]; k <= region.hi[2]; ++k)
        m = std::max(m, std::fabs(at(i, j, k)));
  return m;
}

ScalarField ScalarField::sample(const Grid& g,
                                const std::function<double(const Vec3&)>& f) {
  ScalarField out(g);
  const auto& d = g.dims();
  for (std::int64_t i = 0; i < d[0]; ++i)
    for (std::int64_t j = 0; j < d[1]; ++j)
      for (std::int64_t k = 0; k < d[2]; ++k)
        out.at(i, j, k) = f(g.node(i, j, k));
  return out;
}

ScalarField ScalarField::restrict_to(const IndexBox& region) const {
  Index3 dims{region.extent(0), region.extent(1), region.extent(2)};
  Grid sub(dims, m_grid.spacing(), m_grid.node(region.lo));
  ScalarField out(sub);
  for (std::int64_t i = 0; i < dims[0]; ++i)
    for (std::int64_t j = 0; j < dims[1]; ++j)
      for (std::int64_t k = 0; k < dims[2]; ++k)
        out.at(i, j, k) = at(region.lo[0] + i, region.lo[1] + j, region.lo[2] + k);
  return out;
}

std::array<ScalarField, 3> gradient(const ScalarField& f) {
  const Grid& g = f.grid();
  const auto& d = g.dims();
  const double h[3] = {g.spacing().x, g.spacing().y, g.spacing().z};
  std::array<ScalarField, 3> out{ScalarField(g), ScalarField(g), ScalarField(g)};
  for (std::int64_t i = 0; i < d[0]; ++i)
    for (std::int64_t j = 0; j < d[1]; ++j)
      for (std::int64_t k = 0; k < d[2]; ++k) {
        Index3 idx{i, j, k};
        for (int a = 0; a < 3; ++a) {
          Index3 p = idx, m = idx;
          double v;
          if (idx[a] == 0) {  // 3-point forward, O(h^2)
            Index3 p2 = idx;
            p[a] += 1;
            p2[a] += 2;
            v = (-3.0 * f.at(idx) + 4.0 * f.at(p) - f.at(p2)) / (2.0 * h[a]);
          } else if (idx[a] == d[a] - 1) {  // 3-point backward
            Index3 m2 = idx;
            m[a] -= 1;
            m2[a] -= 2;
            v = (3.0 * f.at(idx) - 4.0 * f.at(m) + f.at(m2)) / (2.0 * h[a]);
          } else {  // central
            p[a] += 1;
            m[a] -= 1;
            v = (f.at(p) - f.at(m)) / (2.0 * h[a]);
          }
          out[a].at(idx) = v;
        }
      }
  return out;
}

static void check_layout(const ScalarField& a, const ScalarField& b) {
  if (!a.grid().same_layout(b.grid()))
    throw InvalidArgument("fields live on different grids");
}

ScalarField multiply(const ScalarField& a, const ScalarField& b) {
  check_layout(a, b);
  ScalarField out(a.grid());
  for (std::size_t n = 0; n < out.values().size(); ++n)
    out.values()[n] = a.values()[n] * b.values()[n];
  return out;
}

ScalarField subtract(const ScalarField& a, const ScalarField& b) {
  check_layout(a, b);
  ScalarField out(a.grid());
  for (std::size_t n = 0; n < out.values().size(); ++n)
    out.values()[n] = a.values()[n] - b.values()[n];
  return out;
}

}  // namespace qpat
