#pragma once

#include <array>
#include <functional>
#include <vector>

#include "core/grid.hpp"

namespace qpat {

/// Scalar values on the nodes of a Grid (C order, k fastest).
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const Grid& g, double fill = 0.0)
      : m_grid(g), m_v(g.size(), fill) {}
  ScalarField(const Grid& g, std::vector<double> values)
      : m_grid(g), m_v(std::move(values)) {
    if (m_v.size() != g.size())
      throw InvalidArgument("field values do not match grid size");
  }

  const Grid& grid() const { return m_grid; }
  std::vector<double>& values() { return m_v; }
  const std::vector<double>& values() const { return m_v; }

  double& at(std::int64_t i, std::int64_t j, std::int64_t k) {
    return m_v[m_grid.flat(i, j, k)];
  }
  double at(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return m_v[m_grid.flat(i, j, k)];
  }
  double& at(const Index3& idx) { return m_v[m_grid.flat(idx)]; }
  double at(const Index3& idx) const { return m_v[m_grid.flat(idx)]; }

  double min_value() const;
  double max_value() const;
  double max_abs() const;
  bool all_finite() const;

  /// Min over a node-index region, also reporting where it occurs.
  double min_in(const IndexBox& region, Index3* argmin = nullptr) const;
  double max_abs_in(const IndexBox& region) const;

  /// Sample the field with a function of the node position.
  static ScalarField sample(const Grid& g, const std::function<double(const Vec3&)>& f);

  /// Restriction to a node-index box as a field on its own (shifted) grid.
  ScalarField restrict_to(const IndexBox& region) const;

 private:
  Grid m_grid;
  std::vector<double> m_v;
};

/// Second-order gradient: central differences inside, 3-point one-sided at faces.
std::array<ScalarField, 3> gradient(const ScalarField& f);

/// Componentwise helpers (grids must share layout).
ScalarField multiply(const ScalarField& a, const ScalarField& b);
ScalarField subtract(const ScalarField& a, const ScalarField& b);

}  // namespace qpat
