#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstddef>

#include "core/errors.hpp"

namespace qpat {

struct Vec3 {
  double x = 0, y = 0, z = 0;
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
};

inline double dist(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

/// Axis-aligned box in physical coordinates.
struct Box {
  Vec3 lo, hi;
  bool contains(const Vec3& p, double pad = 0.0) const {
    return p.x >= lo.x + pad && p.x <= hi.x - pad && p.y >= lo.y + pad &&
           p.y <= hi.y - pad && p.z >= lo.z + pad && p.z <= hi.z - pad;
  }
  /// Distance from an interior point to the boundary (negative outside).
  double boundary_distance(const Vec3& p) const {
    double d = p.x - lo.x;
    d = std::min(d, hi.x - p.x);
    d = std::min(d, p.y - lo.y);
    d = std::min(d, hi.y - p.y);
    d = std::min(d, p.z - lo.z);
    d = std::min(d, hi.z - p.z);
    return d;
  }
  /// Radius of the largest inscribed ball.
  double inradius() const {
    return 0.5 * std::min({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
  }
};

struct Ball {
  Vec3 center;
  double radius = 0;
};

using Index3 = std::array<std::int64_t, 3>;

/// Inclusive node-index box [lo, hi] on some grid.
struct IndexBox {
  Index3 lo{0, 0, 0}, hi{0, 0, 0};
  std::int64_t extent(int axis) const { return hi[axis] - lo[axis] + 1; }
  std::size_t count() const {
    return static_cast<std::size_t>(extent(0)) * extent(1) * extent(2);
  }
  bool contains(const Index3& idx) const {
    for (int a = 0; a < 3; ++a)
      if (idx[a] < lo[a] || idx[a] > hi[a]) return false;
    return true;
  }
  bool on_face(const Index3& idx) const {
    for (int a = 0; a < 3; ++a)
      if (idx[a] == lo[a] || idx[a] == hi[a]) return true;
    return false;
  }
};

/// Uniform tensor-product node grid: node(i,j,k) = origin + (i hx, j hy, k hz).
/// Flat storage order is C order with k fastest: flat = (i*ny + j)*nz + k.
class Grid {
 public:
  Grid() = default;
  Grid(Index3 dims, Vec3 spacing, Vec3 origin)
      : m_dims(dims), m_h(spacing), m_origin(origin) {
    for (int a = 0; a < 3; ++a) {
      if (m_dims[a] < 9)
        throw InvalidArgument("grid dims must be at least 9 per axis");
    }
    if (!(m_h.x > 0 && m_h.y > 0 && m_h.z > 0))
      throw InvalidArgument("grid spacing must be positive");
  }

  /// Grid covering [lo, hi] with the given node counts.
  static Grid over_box(const Box& box, Index3 dims) {
    Vec3 h{(box.hi.x - box.lo.x) / double(dims[0] - 1),
           (box.hi.y - box.lo.y) / double(dims[1] - 1),
           (box.hi.z - box.lo.z) / double(dims[2] - 1)};
    return Grid(dims, h, box.lo);
  }

  const Index3& dims() const { return m_dims; }
  const Vec3& spacing() const { return m_h; }
  const Vec3& origin() const { return m_origin; }
  std::size_t size() const {
    return static_cast<std::size_t>(m_dims[0]) * m_dims[1] * m_dims[2];
  }
  double h_min() const { return std::min({m_h.x, m_h.y, m_h.z}); }
  double h_max() const { return std::max({m_h.x, m_h.y, m_h.z}); }

  Vec3 node(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return {m_origin.x + i * m_h.x, m_origin.y + j * m_h.y, m_origin.z + k * m_h.z};
  }
  Vec3 node(const Index3& idx) const { return node(idx[0], idx[1], idx[2]); }

  std::size_t flat(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return (static_cast<std::size_t>(i) * m_dims[1] + j) * m_dims[2] + k;
  }
  std::size_t flat(const Index3& idx) const { return flat(idx[0], idx[1], idx[2]); }

  Box box() const {
    return {m_origin, node(m_dims[0] - 1, m_dims[1] - 1, m_dims[2] - 1)};
  }

  IndexBox full_box() const {
    return {{0, 0, 0}, {m_dims[0] - 1, m_dims[1] - 1, m_dims[2] - 1}};
  }

  Index3 nearest_node(const Vec3& p) const {
    Index3 idx;
    const Vec3 h = m_h;
    double c[3] = {(p.x - m_origin.x) / h.x, (p.y - m_origin.y) / h.y,
                   (p.z - m_origin.z) / h.z};
    for (int a = 0; a < 3; ++a) {
      auto r = static_cast<std::int64_t>(std::llround(c[a]));
      idx[a] = std::clamp<std::int64_t>(r, 0, m_dims[a] - 1);
    }
    return idx;
  }

  /// Largest node-index box whose coordinate hull lies inside [lo, hi]
  /// (snapped inward, clipped to the grid).
  IndexBox index_box(const Box& b, double snap_tol = 1e-9) const {
    IndexBox ib;
    double lo[3] = {b.lo.x, b.lo.y, b.lo.z}, hi[3] = {b.hi.x, b.hi.y, b.hi.z};
    double org[3] = {m_origin.x, m_origin.y, m_origin.z};
    double h[3] = {m_h.x, m_h.y, m_h.z};
    for (int a = 0; a < 3; ++a) {
      double clo = (lo[a] - org[a]) / h[a], chi = (hi[a] - org[a]) / h[a];
      ib.lo[a] = std::clamp<std::int64_t>(
          static_cast<std::int64_t>(std::ceil(clo - snap_tol)), 0, m_dims[a] - 1);
      ib.hi[a] = std::clamp<std::int64_t>(
          static_cast<std::int64_t>(std::floor(chi + snap_tol)), 0, m_dims[a] - 1);
      if (ib.hi[a] < ib.lo[a]) throw InvalidArgument("index_box: empty region");
    }
    return ib;
  }

  bool same_layout(const Grid& o) const {
    return m_dims == o.m_dims && m_h.x == o.m_h.x && m_h.y == o.m_h.y &&
           m_h.z == o.m_h.z && m_origin.x == o.m_origin.x &&
           m_origin.y == o.m_origin.y && m_origin.z == o.m_origin.z;
  }

 private:
  Index3 m_dims{9, 9, 9};
  Vec3 m_h{1, 1, 1};
  Vec3 m_origin{0, 0, 0};
};

}  // namespace qpat
