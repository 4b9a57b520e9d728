#include "core/stability.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>
#include <vector>

#include "core/holder.hpp"

namespace qpat {

namespace {

std::string eps_tag(double eps) {
  std::ostringstream os;
  os << "epsilon=" << eps;
  return os.str();
}

void require_ladder(const std::vector<double>& epsilons) {
  if (epsilons.empty()) throw InvalidArgument("epsilon ladder is empty");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] >= 0))
      throw InvalidArgument("epsilon values must be nonnegative");
    if (i > 0 && !(epsilons[i] > epsilons[i - 1]))
      throw InvalidArgument("epsilon values must be strictly increasing");
  }
}

struct LineFit {
  double slope = 0;
  double r2 = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0))
    throw DegenerateData("regression abscissae do not separate; slope is undefined");
  LineFit out;
  out.slope = sxy / sxx;
  double ss_res = syy - out.slope * sxy;
  out.r2 = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  return out;
}

}  // namespace

ScalarField bump_field(const Grid& g, const Vec3& center, double rho) {
  if (!(rho > 0)) throw InvalidArgument("bump radius must be positive");
  const double inv_rho2 = 1.0 / (rho * rho);
  return ScalarField::sample(g, [&](const Vec3& p) {
    double d = dist(p, center);
    double q = 1.0 - d * d * inv_rho2;
    return q > 0 ? q * q * q : 0.0;
  });
}

AdmissiblePair apply_perturbation(const AdmissiblePair& base,
                                  const PerturbationSpec& pert) {
  const Grid& g = base.a.grid();
  if (!g.same_layout(base.b.grid()))
    throw InvalidArgument("a and b live on different grids");
  if (!(pert.bump_radius > 0)) throw InvalidArgument("bump radius must be positive");
  if (!(g.box().boundary_distance(pert.bump_center) > pert.bump_radius))
    throw InvalidArgument(
        "bump support must lie strictly inside the coefficient box");

  ScalarField bump = bump_field(g, pert.bump_center, pert.bump_radius);
  AdmissiblePair out = base;
  if (pert.target == PerturbTarget::A || pert.target == PerturbTarget::Both)
    for (std::size_t m = 0; m < g.size(); ++m)
      out.a.values()[m] += pert.amplitude * bump.values()[m];
  if (pert.target == PerturbTarget::B || pert.target == PerturbTarget::Both)
    for (std::size_t m = 0; m < g.size(); ++m)
      out.b.values()[m] += pert.amplitude * bump.values()[m];
  return out;
}

StabilityLadder run_ladder(const AdmissiblePair& base, const PerturbationSpec& pert,
                           const std::vector<double>& epsilons,
                           const SourceConfig& sources, const Box& omega,
                           const LadderOptions& opts) {
  require_ladder(epsilons);
  if (!(opts.alpha > 0) || opts.alpha > 1)
    throw InvalidArgument("alpha must lie in (0, 1]");
  if (opts.workers < 1) throw InvalidArgument("worker count must be positive");
  if (!(opts.solver_tol > 0)) throw InvalidArgument("solver tolerance must be positive");

  // Build every perturbed pair up front and reject the whole ladder if any
  // leaves the admissible class; the violation strings name the failing
  // certificate and are tagged with the offending epsilon.
  std::vector<AdmissiblePair> pairs;
  pairs.reserve(epsilons.size());
  std::vector<std::string> violations;
  for (double eps : epsilons) {
    PerturbationSpec scaled = pert;
    scaled.amplitude = eps;
    AdmissiblePair p = apply_perturbation(base, scaled);
    for (const auto& v : check_admissible(p, opts.norm_budget))
      violations.push_back(eps_tag(eps) + ": " + v);
    pairs.push_back(std::move(p));
  }
  if (!violations.empty()) throw ValidationError(violations);

  InternalData base_data = generate_data(base, sources, omega, opts.solver_tol);

  const IndexBox full = base.a.grid().full_box();
  const IndexBox region = base.a.grid().index_box(omega);
  const ScalarField a_region = base.a.restrict_to(region);
  const ScalarField b_region = base.b.restrict_to(region);

  std::vector<StabilityEntry> entries(epsilons.size());

  auto run_entry = [&](std::size_t idx) {
    StabilityEntry& e = entries[idx];
    e.epsilon = epsilons[idx];
    if (e.epsilon == 0) return;  // both pairs coincide; distances are exactly zero

    InternalData pd = generate_data(pairs[idx], sources, omega, opts.solver_tol);
    e.data_dist = subtract(pd.v1, base_data.v1).max_abs() +
                  subtract(pd.v2, base_data.v2).max_abs();

    ScalarField da = subtract(pairs[idx].a, base.a);
    ScalarField db = subtract(pairs[idx].b, base.b);
    e.coeff_dist = c1_alpha_norm(da, opts.alpha, full, opts.norm_budget, 0).total +
                   holder_norm(db, opts.alpha, full, opts.norm_budget, 0).total;

    // sup-norm distance of the conductivities sigma = a (v1 / b)^2 over the
    // data box; this is the quantity the recovery stage actually sees
    ScalarField at = pairs[idx].a.restrict_to(region);
    ScalarField bt = pairs[idx].b.restrict_to(region);
    double sd = 0;
    for (std::size_t m = 0; m < at.grid().size(); ++m) {
      double u = base_data.v1.values()[m] / b_region.values()[m];
      double ut = pd.v1.values()[m] / bt.values()[m];
      sd = std::max(sd, std::abs(a_region.values()[m] * u * u -
                                 at.values()[m] * ut * ut));
    }
    e.sigma_dist = sd;
  };

  // Entries are independent; claim indices atomically so the result is
  // identical for any worker count.
  struct Failure {
    int kind = -1;  // 0 solver, 1 degenerate, 2 other
    std::string message;
  };
  std::vector<Failure> failures(epsilons.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t idx = next.fetch_add(1);
      if (idx >= entries.size()) return;
      try {
        run_entry(idx);
      } catch (const SolverError& ex) {
        failures[idx] = {0, ex.what()};
      } catch (const DegenerateData& ex) {
        failures[idx] = {1, ex.what()};
      } catch (const std::exception& ex) {
        failures[idx] = {2, ex.what()};
      }
    }
  };
  const int workers =
      static_cast<int>(std::min<std::size_t>(opts.workers, entries.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < failures.size(); ++i) {
    if (failures[i].kind < 0) continue;
    std::string msg = eps_tag(epsilons[i]) + ": " + failures[i].message;
    if (failures[i].kind == 0) throw SolverError(msg);
    if (failures[i].kind == 1) throw DegenerateData(msg);
    throw Error(msg);
  }

  StabilityLadder lad;
  lad.entries = std::move(entries);
  lad.alpha = opts.alpha;
  lad.fit_floor = 10.0 * opts.solver_tol;

  // Fit log coeff_dist against log data_dist over the resolved entries. Data
  // distances at or below the solver floor are forward-solve noise, not
  // signal, and would corrupt the slope.
  std::vector<double> lx, ly;
  for (const auto& e : lad.entries) {
    if (e.epsilon <= 0) continue;
    if (!(e.data_dist >= lad.fit_floor) || !(e.coeff_dist > 0)) continue;
    lx.push_back(std::log(e.data_dist));
    ly.push_back(std::log(e.coeff_dist));
    lad.K = std::max(lad.K, e.data_dist / e.epsilon);
  }
  if (lx.size() < 2)
    throw DegenerateData(
        "stability fit needs at least two entries with data distance above "
        "the solver floor");
  LineFit fit = fit_line(lx, ly);
  lad.gamma_hat = fit.slope;
  lad.r2 = fit.r2;
  lad.fit_points = static_cast<int>(lx.size());
  return lad;
}

ReconErrorReport reconstruction_error_ladder(const AdmissiblePair& base,
                                             const PerturbationSpec& pert,
                                             const std::vector<double>& epsilons,
                                             const SourceConfig& sources,
                                             const Box& omega, double reg_lambda,
                                             double tol) {
  require_ladder(epsilons);
  int positive = 0;
  for (double eps : epsilons)
    if (eps > 0) ++positive;
  if (positive < 2)
    throw InvalidArgument("ladder needs at least two positive noise levels");

  InternalData clean = generate_data(base, sources, omega, tol);
  const Grid& og = clean.v1.grid();
  const IndexBox region = base.a.grid().index_box(omega);
  const ScalarField a_true = base.a.restrict_to(region);
  const ScalarField b_true = base.b.restrict_to(region);

  // The noise profile is the bump sampled on the data grid: smooth, known
  // support, and nonnegative, so additive positive levels cannot push either
  // data component through zero.
  ScalarField noise = bump_field(og, pert.bump_center, pert.bump_radius);
  if (noise.max_abs() == 0)
    throw InvalidArgument("noise bump does not intersect the observation box");

  auto run_one = [&](double eps) {
    InternalData noisy = clean;
    if (eps > 0) {
      for (std::size_t m = 0; m < og.size(); ++m) {
        noisy.v1.values()[m] += eps * noise.values()[m];
        noisy.v2.values()[m] += eps * noise.values()[m];
      }
      noisy.noise_meta = "additive bump, " + eps_tag(eps);
    }
    ReconstructionResult res;
    try {
      res = reconstruct(noisy, a_true, b_true, reg_lambda, tol);
    } catch (const Error& ex) {
      throw SolverError(eps_tag(eps) + ": " + ex.what());
    }
    ReconErrorEntry e;
    e.epsilon = eps;
    e.err_a = subtract(res.a_hat, a_true).max_abs();
    e.err_b = subtract(res.b_hat, b_true).max_abs();
    return e;
  };

  ReconErrorReport rep;
  rep.entries.push_back(run_one(0.0));
  rep.baseline_a = rep.entries.front().err_a;
  rep.baseline_b = rep.entries.front().err_b;
  for (double eps : epsilons)
    if (eps > 0) rep.entries.push_back(run_one(eps));

  std::vector<double> lx, ly;
  for (std::size_t i = 1; i < rep.entries.size(); ++i) {
    if (rep.entries[i].err_a < rep.entries[i - 1].err_a) ++rep.inversions;
    if (rep.entries[i].err_a > 0) {
      lx.push_back(std::log(rep.entries[i].epsilon));
      ly.push_back(std::log(rep.entries[i].err_a));
    }
  }
  if (lx.size() >= 2) rep.slope_a = fit_line(lx, ly).slope;
  return rep;
}

}  // namespace qpat
