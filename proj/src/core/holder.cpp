#include "core/holder.hpp"

#include <cmath>

#include "core/rng.hpp"

namespace qpat {

namespace {

/// |x-y|^alpha with fast paths for the two exponents used throughout.
inline double dist_pow(double d2, double alpha) {
  if (alpha == 1.0) return std::sqrt(d2);
  if (alpha == 0.5) return std::sqrt(std::sqrt(d2));
  return std::pow(d2, 0.5 * alpha);
}

struct NodeRef {
  Vec3 p;
  double v;
};

}  // namespace

HolderNorm holder_norm(const ScalarField& f, double alpha, const IndexBox& region,
                       std::uint64_t pair_budget, std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw InvalidArgument("holder_norm: alpha must be in (0, 1]");
  const Grid& g = f.grid();

  std::vector<NodeRef> nodes;
  nodes.reserve(region.count());
  for (std::int64_t i = region.lo[0]; i <= region.hi[0]; ++i)
    for (std::int64_t j = region.lo[1]; j <= region.hi[1]; ++j)
      for (std::int64_t k = region.lo[2]; k <= region.hi[2]; ++k)
        nodes.push_back({g.node(i, j, k), f.at(i, j, k)});

  HolderNorm out;
  for (const auto& n : nodes) out.sup = std::max(out.sup, std::fabs(n.v));

  const std::uint64_t n = nodes.size();
  const std::uint64_t all_pairs = n * (n - 1) / 2;
  double semi = 0;

  if (all_pairs <= pair_budget) {
    for (std::uint64_t a = 0; a < n; ++a)
      for (std::uint64_t b = a + 1; b < n; ++b) {
        double d2 = (nodes[a].p - nodes[b].p).dot(nodes[a].p - nodes[b].p);
        double q = std::fabs(nodes[a].v - nodes[b].v) / dist_pow(d2, alpha);
        if (q > semi) semi = q;
      }
    out.pairs_evaluated = all_pairs;
    out.exact = true;
  } else {
    // every axis-neighbor pair (captures the short-range seminorm of smooth
    // fields), then seeded random pairs to fill the budget
    std::uint64_t used = 0;
    auto ext = [&](int a) { return region.extent(a); };
    auto node_at = [&](std::int64_t i, std::int64_t j, std::int64_t k) -> const NodeRef& {
      return nodes[(static_cast<std::size_t>(i) * ext(1) + j) * ext(2) + k];
    };
    for (std::int64_t i = 0; i < ext(0); ++i)
      for (std::int64_t j = 0; j < ext(1); ++j)
        for (std::int64_t k = 0; k < ext(2); ++k) {
          const NodeRef& c = node_at(i, j, k);
          Index3 nb[3] = {{i + 1, j, k}, {i, j + 1, k}, {i, j, k + 1}};
          for (const auto& q3 : nb) {
            if (q3[0] >= ext(0) || q3[1] >= ext(1) || q3[2] >= ext(2)) continue;
            const NodeRef& o = node_at(q3[0], q3[1], q3[2]);
            double d2 = (c.p - o.p).dot(c.p - o.p);
            double q = std::fabs(c.v - o.v) / dist_pow(d2, alpha);
            if (q > semi) semi = q;
            ++used;
          }
        }
    auto rng = make_rng(seed, "holder-pairs");
    std::uniform_int_distribution<std::uint64_t> pick(0, n - 1);
    while (used < pair_budget) {
      std::uint64_t a = pick(rng), b = pick(rng);
      if (a == b) continue;
      double d2 = (nodes[a].p - nodes[b].p).dot(nodes[a].p - nodes[b].p);
      double q = std::fabs(nodes[a].v - nodes[b].v) / dist_pow(d2, alpha);
      if (q > semi) semi = q;
      ++used;
    }
    out.pairs_evaluated = used;
    out.exact = false;
  }

  out.seminorm = semi;
  out.total = out.sup + out.seminorm;
  return out;
}

HolderNorm c1_alpha_norm(const ScalarField& f, double alpha, const IndexBox& region,
                         std::uint64_t pair_budget, std::uint64_t seed) {
  HolderNorm out = holder_norm(f, alpha, region, pair_budget, seed);
  auto grad = gradient(f);
  for (int a = 0; a < 3; ++a) {
    HolderNorm ga = holder_norm(grad[a], alpha, region, pair_budget, seed + 1 + a);
    out.sup += ga.sup;
    out.seminorm += ga.seminorm;
    out.total += ga.total;
    out.exact = out.exact && ga.exact;
    out.pairs_evaluated += ga.pairs_evaluated;
  }
  return out;
}

}  // namespace qpat
