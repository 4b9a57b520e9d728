#include "core/runner.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "core/field_io.hpp"
#include "core/holder.hpp"
#include "core/specfun.hpp"
#include "core/svg.hpp"
#include "core/ucp.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace qpat {

namespace {

std::string iso_utc_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Writes artifacts into the run directory and remembers their (relative)
/// names for the manifest.
class ArtifactSink {
 public:
  explicit ArtifactSink(const fs::path& dir) : m_dir(dir) {}

  void field(const std::string& name, const ScalarField& f) {
    write_field(f, (m_dir / (name + ".json")).string());
    m_list.push_back(name + ".json");
    m_list.push_back(name + ".f64");
  }

  void text(const std::string& name, const std::string& body) {
    write_text_atomic((m_dir / name).string(), body);
    m_list.push_back(name);
  }

  const fs::path& dir() const { return m_dir; }
  const std::vector<std::string>& list() const { return m_list; }

 private:
  fs::path m_dir;
  std::vector<std::string> m_list;
};

ordered_json report_json(const SolveReport& r) {
  return {{"iterations", r.iterations},
          {"residual", r.residual},
          {"tolerance", r.tolerance},
          {"converged", r.converged}};
}

ordered_json vec_json(const Vec3& v) { return {v.x, v.y, v.z}; }

ordered_json box_json(const Box& b) {
  return {{"lo", vec_json(b.lo)}, {"hi", vec_json(b.hi)}};
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}

struct RunCtx {
  const ExperimentConfig& cfg;
  ArtifactSink& sink;
  ordered_json& stages;
  int threads;
};

// ---------------------------------------------------------------- forward

ordered_json cmd_forward(RunCtx& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  require(cfg.has_sources, "forward needs [sources] in the config");
  require(cfg.has_omega, "forward needs [omega] in the config");
  AdmissiblePair pair = build_pair(cfg);
  ForwardSolve fwd = forward_solve(pair, cfg.sources, cfg.omega, cfg.solver.tol);
  ctx.sink.field("u1", fwd.s1.u);
  ctx.sink.field("u2", fwd.s2.u);
  ctx.sink.field("v1", fwd.data.v1);
  ctx.sink.field("v2", fwd.data.v2);
  ctx.stages["u1"] = report_json(fwd.s1.report);
  ctx.stages["u2"] = report_json(fwd.s2.report);

  ordered_json s;
  s["omega"] = box_json(fwd.data.omega);
  s["xi1"] = vec_json(fwd.data.xi1);
  s["xi2"] = vec_json(fwd.data.xi2);
  s["v1_min"] = fwd.data.v1.min_value();
  s["v1_max"] = fwd.data.v1.max_value();
  s["v2_min"] = fwd.data.v2.min_value();
  s["v2_max"] = fwd.data.v2.max_value();
  return s;
}

// ------------------------------------------------------------ reconstruct

ordered_json cmd_reconstruct(RunCtx& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  require(cfg.has_omega, "reconstruct needs [omega] in the config");
  AdmissiblePair pair = build_pair(cfg);
  IndexBox region = pair.a.grid().index_box(cfg.omega);
  ScalarField a_trace = pair.a.restrict_to(region);
  ScalarField b_trace = pair.b.restrict_to(region);

  InternalData data;
  data.v1 = read_field((ctx.sink.dir() / "v1.json").string());
  data.v2 = read_field((ctx.sink.dir() / "v2.json").string());
  if (!data.v1.grid().same_layout(a_trace.grid()) ||
      !data.v2.grid().same_layout(a_trace.grid()))
    throw InvalidArgument(
        "v1/v2 field files do not match the configured grid and omega");
  data.omega = data.v1.grid().box();
  data.xi1 = cfg.sources.xi1;
  data.xi2 = cfg.sources.xi2;

  ReconstructionResult res =
      reconstruct(data, a_trace, b_trace, cfg.solver.reg_lambda, cfg.solver.tol);
  ctx.sink.field("a_hat", res.a_hat);
  ctx.sink.field("b_hat", res.b_hat);
  ctx.sink.field("sigma_hat", res.sigma_hat);
  ctx.sink.field("rho_hat", res.rho_hat);
  ctx.stages["sigma"] = report_json(res.sigma_report);
  ctx.stages["rho"] = report_json(res.rho_report);

  ordered_json s;
  s["residual_conductivity"] = res.residual_conductivity;
  s["residual_elliptic"] = res.residual_elliptic;
  s["constant_quotient"] = res.constant_quotient;
  // Errors against the configured truth restricted to omega; meaningful when
  // the data came from forward on the same config.
  s["err_a_rel"] = subtract(res.a_hat, a_trace).max_abs() / a_trace.max_abs();
  s["err_b_rel"] = subtract(res.b_hat, b_trace).max_abs() / b_trace.max_abs();
  return s;
}

// -------------------------------------------------------------- stability

ordered_json cmd_stability(RunCtx& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  require(cfg.has_sources, "stability needs [sources] in the config");
  require(cfg.has_omega, "stability needs [omega] in the config");
  require(!cfg.ladder.epsilons.empty(), "stability needs ladder.epsilons");
  require(cfg.ladder.bump_radius > 0,
          "stability needs ladder.bump_center and ladder.bump_radius");
  AdmissiblePair pair = build_pair(cfg);
  PerturbationSpec pert;
  pert.bump_center = cfg.ladder.bump_center;
  pert.bump_radius = cfg.ladder.bump_radius;
  pert.target = cfg.ladder.target;
  LadderOptions opts;
  opts.alpha = cfg.norms.alpha;
  opts.solver_tol = cfg.solver.tol;
  opts.workers = ctx.threads;
  StabilityLadder lad =
      run_ladder(pair, pert, cfg.ladder.epsilons, cfg.sources, cfg.omega, opts);

  std::ostringstream csv;
  csv << "epsilon,data_dist,coeff_dist,sigma_dist\n";
  char buf[128];
  for (const auto& e : lad.entries) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", e.epsilon,
                  e.data_dist, e.coeff_dist, e.sigma_dist);
    csv << buf;
  }
  ctx.sink.text("ladder.csv", csv.str());

  PlotSeries series{"coeff vs data", {}, {}};
  for (const auto& e : lad.entries) {
    series.x.push_back(e.data_dist);
    series.y.push_back(e.coeff_dist);
  }
  ctx.sink.text("loglog.svg",
                svg_line_plot("perturbation ladder", "data distance",
                              "coefficient distance", {series}, true, true));

  ordered_json s;
  s["alpha"] = lad.alpha;
  s["gamma_hat"] = lad.gamma_hat;
  s["r2"] = lad.r2;
  s["K"] = lad.K;
  s["fit_points"] = lad.fit_points;
  s["fit_floor"] = lad.fit_floor;
  ordered_json entries = ordered_json::array();
  for (const auto& e : lad.entries)
    entries.push_back({{"epsilon", e.epsilon},
                       {"data_dist", e.data_dist},
                       {"coeff_dist", e.coeff_dist},
                       {"sigma_dist", e.sigma_dist}});
  s["entries"] = entries;
  return s;
}

// ------------------------------------------------------------------- ucp

/// Data quotient plus the effective conductivity sigma = a (v1/b)^2 on the
/// observation region, shared by the frequency and three-ball commands.
struct QuotientSetup {
  ScalarField w;
  ScalarField sigma;
};

QuotientSetup quotient_setup(RunCtx& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  require(cfg.has_sources, "this command needs [sources] in the config");
  require(cfg.has_omega, "this command needs [omega] in the config");
  AdmissiblePair pair = build_pair(cfg);
  InternalData data = generate_data(pair, cfg.sources, cfg.omega, cfg.solver.tol);
  QuotientSetup out;
  out.w = quotient_field(data);
  IndexBox region = pair.a.grid().index_box(cfg.omega);
  ScalarField a_r = pair.a.restrict_to(region);
  ScalarField b_r = pair.b.restrict_to(region);
  out.sigma = ScalarField(out.w.grid());
  for (std::size_t m = 0; m < out.sigma.grid().size(); ++m) {
    double u1 = data.v1.values()[m] / b_r.values()[m];
    out.sigma.values()[m] = a_r.values()[m] * u1 * u1;
  }
  return out;
}

ordered_json cmd_ucp_freq(RunCtx& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  QuotientSetup q = quotient_setup(ctx);
  const HolderNorm lip = holder_norm(q.sigma, 1.0, q.sigma.grid().full_box());
  const double kappa = std::max(lip.total, 1.0 / q.sigma.min_value());
  const double mu = kappa * kappa * (1.0 + q.sigma.grid().box().inradius());

  std::vector<double> radii =
      radius_ladder(cfg.ucp.r0, cfg.ucp.radii, cfg.ucp.ratio);
  FrequencyCurve curve = frequency_curve(q.w, q.sigma, cfg.ucp.center, radii);
  FrequencyIdentityReport ident =
      check_frequency_identities(curve, 0.0, kappa * kappa);
  MonotonicityReport mono = check_frequency_monotonicity(curve, mu);

  PlotSeries series{"N(r)", {}, {}};
  for (std::size_t i = 0; i < curve.radii.size(); ++i)
    if (curve.n_defined[i]) {
      series.x.push_back(curve.radii[i]);
      series.y.push_back(curve.N[i]);
    }
  ctx.sink.text("freq.svg", svg_line_plot("frequency curve", "radius",
                                          "frequency", {series}, true, false));

  ordered_json s;
  s["center"] = vec_json(cfg.ucp.center);
  s["kappa"] = kappa;
  s["mu"] = mu;
  s["radii"] = curve.radii;
  ordered_json nvals = ordered_json::array();
  for (std::size_t i = 0; i < curve.N.size(); ++i)
    nvals.push_back(curve.n_defined[i] ? ordered_json(curve.N[i])
                                       : ordered_json(nullptr));
  s["N"] = nvals;
  s["max_defect_dH"] = ident.max_defect_dH;
  s["max_defect_dD"] = ident.max_defect_dD;
  s["min_cs_slack"] = ident.min_cs_slack;
  s["max_flux_gap"] = ident.max_flux_gap;
  s["k_bound"] = {{"delta", ident.delta},
                  {"kappa_sq", ident.kappa_sq},
                  {"min_slack", ident.min_k_slack},
                  {"pass", ident.k_bound_pass}};
  s["monotonicity"] = {{"mu", mono.mu},
                       {"tol", mono.tol},
                       {"monotone_pass", mono.monotone_pass},
                       {"worst_step", mono.worst_step},
                       {"endpoint_pass", mono.endpoint_pass},
                       {"endpoint_worst", mono.endpoint_worst},
                       {"skipped", mono.skipped}};
  return s;
}

ordered_json cmd_ucp_threeball(RunCtx& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  QuotientSetup q = quotient_setup(ctx);
  ThreeBallReport rep =
      three_ball_check(q.w, cfg.ucp.center, cfg.ucp.r0, 1.0, 2.0, 4.0);
  ordered_json s;
  s["center"] = vec_json(rep.center);
  s["radii"] = {rep.radii[0], rep.radii[1], rep.radii[2]};
  s["norms"] = {rep.norms[0], rep.norms[1], rep.norms[2]};
  s["zero_norm"] = rep.zero_norm;
  s["gamma_valid"] = rep.gamma_valid;
  s["fitted_gamma"] = rep.fitted_gamma;
  s["defect_half"] = rep.defect_half;
  return s;
}

ordered_json cmd_ucp_chain(RunCtx& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const Box domain = cfg.has_omega ? cfg.omega : cfg.grid.box;
  BallChain chain = chain_of_balls(cfg.ucp.x, cfg.ucp.center, cfg.ucp.delta, domain);
  ordered_json s;
  s["x"] = vec_json(chain.x);
  s["x0"] = vec_json(chain.x0);
  s["delta"] = chain.delta;
  s["distance"] = dist(chain.x, chain.x0);
  s["N"] = chain.N;
  s["N0_bound"] = chain.N0_bound;
  ordered_json centers = ordered_json::array();
  for (const auto& c : chain.centers) centers.push_back(vec_json(c));
  s["centers"] = centers;
  return s;
}

ordered_json cmd_ucp_nearsource(RunCtx& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  require(cfg.has_sources, "this command needs [sources] in the config");
  require(cfg.pair.kind == PairKind::Constant,
          "the near-source check needs a constant pair (closed-form quotient)");
  const Vec3 xi1 = cfg.sources.xi1, xi2 = cfg.sources.xi2;
  const double c = std::sqrt(cfg.pair.b0 / cfg.pair.a0);
  Grid g = Grid::over_box(cfg.grid.box, cfg.grid.dims);
  // Quotient of the two whole-space kernels: common factors cancel, leaving
  // (|x-xi1| / |x-xi2|) e^{-c (|x-xi2| - |x-xi1|)}. Radii are clamped away
  // from zero so pole nodes stay finite; the checked annulus excludes them.
  ScalarField w = ScalarField::sample(g, [&](const Vec3& p) {
    double r = std::max(dist(p, xi2), 1e-9);
    double s = std::max(dist(p, xi1), 1e-9);
    return (s / r) * std::exp(-c * (r - s));
  });
  NearSourceReport rep = near_source_gradient_check(w, xi1, xi2, cfg.ucp.r_lo);
  ordered_json s;
  s["annulus"] = {rep.annulus_lo, rep.annulus_hi};
  s["min_rw"] = rep.min_rw;
  s["max_rw"] = rep.max_rw;
  s["c_star"] = rep.c_star;
  s["positive"] = rep.positive;
  s["best_center"] = vec_json(rep.best_center);
  s["rho"] = rep.rho;
  s["best_grad_norm"] = rep.best_grad_norm;
  return s;
}

// --------------------------------------------------------- specfun-check

ordered_json cmd_specfun_check(RunCtx& ctx) {
  constexpr int kPoints = 2000;
  constexpr double kPi = 3.14159265358979323846;

  double bessel_max_rel = 0;
  for (int i = 0; i < kPoints; ++i) {
    double t = static_cast<double>(i) / (kPoints - 1);
    double z = 1e-3 * std::pow(30.0 / 1e-3, t);
    double closed = std::sqrt(kPi / (2.0 * z)) * std::exp(-z);
    double got = bessel_k(BesselOrder{1}, z).value;
    bessel_max_rel = std::max(bessel_max_rel, std::abs(got - closed) / closed);
  }

  double fs_max_rel = 0;
  for (int i = 0; i < kPoints; ++i) {
    double t = static_cast<double>(i) / (kPoints - 1);
    double r = 1e-3 * std::pow(20.0 / 1e-3, t);
    double closed = std::exp(-r) / (4.0 * kPi * r);
    double got = fs_eval(1.0, 1.0, 3, r);
    fs_max_rel = std::max(fs_max_rel, std::abs(got - closed) / closed);
  }

  BoundCertificate cert = certify_two_sided(1.0, 1.0, 3, 13.0, 0.1, 10.0, 64);
  ctx.sink.text("kernel_bound.json", certificate_json(cert) + "\n");

  ordered_json s;
  s["bessel_max_rel"] = bessel_max_rel;
  s["fs_max_rel"] = fs_max_rel;
  s["bound"] = {{"constant", cert.constant},
                {"r_min", cert.r_min},
                {"r_max", cert.r_max},
                {"max_violation", cert.max_violation},
                {"passed", cert.passed}};
  return s;
}

}  // namespace

std::string run_command(const ExperimentConfig& cfg, const std::string& command,
                        const RunOverrides& overrides) {
  const std::string out_dir = overrides.out_dir.value_or(cfg.run.out_dir);
  const std::uint64_t seed = overrides.seed.value_or(cfg.run.seed);
  const int threads = overrides.threads.value_or(cfg.run.threads);
  require(!out_dir.empty(), "output directory must not be empty");
  require(threads >= 1, "threads must be at least 1");

  const std::string started = iso_utc_now();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir + ": " +
                        ec.message());

  ArtifactSink sink(out_dir);
  ordered_json stages = ordered_json::object();
  RunCtx ctx{cfg, sink, stages, threads};

  ordered_json summary;
  if (command == "forward")
    summary = cmd_forward(ctx);
  else if (command == "reconstruct")
    summary = cmd_reconstruct(ctx);
  else if (command == "stability")
    summary = cmd_stability(ctx);
  else if (command == "ucp-freq")
    summary = cmd_ucp_freq(ctx);
  else if (command == "ucp-threeball")
    summary = cmd_ucp_threeball(ctx);
  else if (command == "ucp-chain")
    summary = cmd_ucp_chain(ctx);
  else if (command == "ucp-nearsource")
    summary = cmd_ucp_nearsource(ctx);
  else if (command == "specfun-check")
    summary = cmd_specfun_check(ctx);
  else
    throw InvalidArgument("unknown command '" + command + "'");

  // results.json carries everything deterministic; timestamps live only in
  // the manifest so double runs produce bit-identical artifact payloads.
  ordered_json results;
  results["command"] = command;
  results["version"] = kToolVersion;
  results["config_hash"] = hash_hex(cfg.hash);
  results["seed"] = seed;
  results["threads"] = threads;
  results["summary"] = summary;
  sink.text("results.json", results.dump(2) + "\n");

  ordered_json manifest;
  manifest["command"] = command;
  manifest["version"] = kToolVersion;
  manifest["config_hash"] = hash_hex(cfg.hash);
  manifest["seed"] = seed;
  manifest["threads"] = threads;
  manifest["started"] = started;
  manifest["finished"] = iso_utc_now();
  manifest["artifacts"] = sink.list();
  manifest["stages"] = stages;
  manifest["summary"] = summary;
  std::string text = manifest.dump(2) + "\n";
  write_text_atomic((fs::path(out_dir) / "manifest.json").string(), text);
  return text;
}

}  // namespace qpat
