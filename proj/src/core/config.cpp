#include "core/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "core/field_io.hpp"
#include "core/holder.hpp"

namespace qpat {

namespace {

constexpr std::size_t kNormBudget = 2000000;

std::string fmt_vec(const Vec3& v) {
  std::ostringstream os;
  os << "(" << v.x << ", " << v.y << ", " << v.z << ")";
  return os.str();
}

/// Typed getters over the flattened document; every type mismatch lands in
/// the violation list (with the key name) instead of stopping the parse, so
/// the caller sees all problems at once.
class Reader {
 public:
  Reader(const TomlDoc& doc, std::vector<std::string>& violations)
      : m_doc(doc), m_violations(violations) {}

  bool has(const std::string& key) const { return m_doc.has(key); }

  double number(const std::string& key, double fallback) {
    const TomlValue* v = m_doc.find(key);
    if (!v) return fallback;
    if (v->kind != TomlValue::Kind::Number) {
      complain(key, "must be a number");
      return fallback;
    }
    return v->num;
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    const TomlValue* v = m_doc.find(key);
    if (!v) return fallback;
    if (v->kind != TomlValue::Kind::Number || !v->is_integer) {
      complain(key, "must be an integer");
      return fallback;
    }
    return static_cast<std::int64_t>(v->num);
  }

  std::uint64_t uinteger(const std::string& key, std::uint64_t fallback) {
    const TomlValue* v = m_doc.find(key);
    if (!v) return fallback;
    if (v->kind != TomlValue::Kind::Number || !v->is_integer || v->num < 0) {
      complain(key, "must be a nonnegative integer");
      return fallback;
    }
    return v->uint_val;
  }

  std::string str(const std::string& key, const std::string& fallback) {
    const TomlValue* v = m_doc.find(key);
    if (!v) return fallback;
    if (v->kind != TomlValue::Kind::String) {
      complain(key, "must be a quoted string");
      return fallback;
    }
    return v->str;
  }

  bool vec3(const std::string& key, Vec3& out) {
    const TomlValue* v = m_doc.find(key);
    if (!v) return false;
    std::vector<double> nums;
    if (!flat_numbers(*v, nums) || nums.size() != 3) {
      complain(key, "must be an array of 3 numbers");
      return false;
    }
    out = {nums[0], nums[1], nums[2]};
    return true;
  }

  bool box(const std::string& key, Box& out) {
    const TomlValue* v = m_doc.find(key);
    if (!v) return false;
    bool ok = v->kind == TomlValue::Kind::Array && v->array.size() == 2;
    std::vector<double> lo, hi;
    ok = ok && flat_numbers(v->array[0], lo) && lo.size() == 3;
    ok = ok && flat_numbers(v->array[1], hi) && hi.size() == 3;
    if (!ok) {
      complain(key, "must be a pair of corner arrays [[lx,ly,lz],[hx,hy,hz]]");
      return false;
    }
    out = Box{{lo[0], lo[1], lo[2]}, {hi[0], hi[1], hi[2]}};
    for (int axis = 0; axis < 3; ++axis)
      if (!(out.lo[axis] < out.hi[axis])) {
        complain(key, "must have lo < hi on every axis");
        return false;
      }
    return true;
  }

  bool numbers(const std::string& key, std::vector<double>& out) {
    const TomlValue* v = m_doc.find(key);
    if (!v) return false;
    if (!flat_numbers(*v, out)) {
      complain(key, "must be an array of numbers");
      return false;
    }
    return true;
  }

  /// Bump list [[cx, cy, cz, rho, amp], ...]
  bool bumps(const std::string& key, std::vector<CoefBump>& out) {
    const TomlValue* v = m_doc.find(key);
    if (!v) return false;
    if (v->kind != TomlValue::Kind::Array) {
      complain(key, "must be an array of [cx, cy, cz, rho, amp] entries");
      return false;
    }
    for (const auto& entry : v->array) {
      std::vector<double> nums;
      if (!flat_numbers(entry, nums) || nums.size() != 5) {
        complain(key, "must be an array of [cx, cy, cz, rho, amp] entries");
        return false;
      }
      out.push_back(CoefBump{{nums[0], nums[1], nums[2]}, nums[3], nums[4]});
    }
    return true;
  }

  void complain(const std::string& key, const std::string& what) {
    m_violations.push_back(key + " " + what);
  }

 private:
  static bool flat_numbers(const TomlValue& v, std::vector<double>& out) {
    if (v.kind != TomlValue::Kind::Array) return false;
    out.clear();
    for (const auto& e : v.array) {
      if (e.kind != TomlValue::Kind::Number) return false;
      out.push_back(e.num);
    }
    return true;
  }

  const TomlDoc& m_doc;
  std::vector<std::string>& m_violations;
};

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "grid.dims",          "grid.box",
      "pair.kind",          "pair.a",
      "pair.b",             "pair.lambda",
      "pair.kappa",         "pair.a_bumps",
      "pair.b_bumps",       "pair.a_file",
      "pair.b_file",        "sources.xi1",
      "sources.xi2",        "omega.box",
      "solver.tol",         "solver.max_iter",
      "solver.reg_lambda",  "solver.mode",
      "norms.alpha",        "norms.theta",
      "ladder.epsilons",    "ladder.bump_center",
      "ladder.bump_radius", "ladder.target",
      "ucp.center",         "ucp.r0",
      "ucp.radii",          "ucp.ratio",
      "ucp.x",              "ucp.delta",
      "ucp.r_lo",           "run.seed",
      "run.out_dir",        "run.threads",
  };
  return keys;
}

void check_bump_support(const std::string& key, const CoefBump& bump,
                        const Box& box, std::vector<std::string>& violations) {
  if (!(bump.rho > 0)) {
    violations.push_back(key + ": bump radius must be positive");
    return;
  }
  if (!(box.boundary_distance(bump.center) > bump.rho))
    violations.push_back(key + ": bump at " + fmt_vec(bump.center) +
                         " with radius " + std::to_string(bump.rho) +
                         " must be supported strictly inside grid.box");
}

ScalarField sum_of_bumps(const Grid& g, double level,
                         const std::vector<CoefBump>& bumps) {
  ScalarField f(g, level);
  for (const auto& b : bumps) {
    ScalarField phi = bump_field(g, b.center, b.rho);
    for (std::size_t m = 0; m < g.size(); ++m)
      f.values()[m] += b.amp * phi.values()[m];
  }
  return f;
}

/// Smallest certificates the built coefficients satisfy, measured with the
/// same budget and seed the admissibility check uses, so the derived pair
/// passes it exactly.
void derive_certs(AdmissiblePair& pair) {
  const IndexBox full = pair.a.grid().full_box();
  if (pair.lambda_cert == 0) {
    double norm = c1_alpha_norm(pair.a, 1.0, full, kNormBudget, 0).total;
    pair.lambda_cert = std::max(norm, 1.0 / pair.a.min_value());
  }
  if (pair.kappa_cert == 0) {
    double norm = holder_norm(pair.b, 1.0, full, kNormBudget, 17).total;
    pair.kappa_cert = std::max(norm, 1.0 / pair.b.min_value());
  }
}

}  // namespace

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig parse_config(const std::string& text) {
  TomlDoc doc = parse_toml(text);
  std::vector<std::string> violations;
  for (const auto& [key, value] : doc.values)
    if (!known_keys().count(key)) violations.push_back("unknown key '" + key + "'");

  Reader rd(doc, violations);
  ExperimentConfig cfg;
  cfg.canonical = canonical_toml(doc);
  cfg.hash = toml_hash(doc);

  // ---- grid
  {
    std::vector<double> dims;
    if (rd.numbers("grid.dims", dims)) {
      if (dims.size() != 3 || dims[0] != std::floor(dims[0]) ||
          dims[1] != std::floor(dims[1]) || dims[2] != std::floor(dims[2]))
        rd.complain("grid.dims", "must be an array of 3 integers");
      else
        cfg.grid.dims = {static_cast<std::int64_t>(dims[0]),
                         static_cast<std::int64_t>(dims[1]),
                         static_cast<std::int64_t>(dims[2])};
    }
    for (int axis = 0; axis < 3; ++axis)
      if (cfg.grid.dims[axis] < 9) {
        rd.complain("grid.dims", "must be at least 9 per axis");
        cfg.grid.dims = {9, 9, 9};
        break;
      }
    rd.box("grid.box", cfg.grid.box);
  }

  // ---- pair
  {
    std::string kind = rd.str("pair.kind", "constant");
    if (kind == "constant") {
      cfg.pair.kind = PairKind::Constant;
    } else if (kind == "bump-sum") {
      cfg.pair.kind = PairKind::BumpSum;
    } else if (kind == "field-file") {
      cfg.pair.kind = PairKind::FieldFile;
    } else {
      rd.complain("pair.kind", "must be \"constant\", \"bump-sum\", or \"field-file\"");
    }
    cfg.pair.a0 = rd.number("pair.a", 1.0);
    cfg.pair.b0 = rd.number("pair.b", 1.0);
    cfg.pair.lambda = rd.number("pair.lambda", 0.0);
    cfg.pair.kappa = rd.number("pair.kappa", 0.0);
    rd.bumps("pair.a_bumps", cfg.pair.a_bumps);
    rd.bumps("pair.b_bumps", cfg.pair.b_bumps);
    cfg.pair.a_file = rd.str("pair.a_file", "");
    cfg.pair.b_file = rd.str("pair.b_file", "");

    if (cfg.pair.kind != PairKind::FieldFile) {
      if (!(cfg.pair.a0 > 0)) rd.complain("pair.a", "must be positive");
      if (!(cfg.pair.b0 > 0)) rd.complain("pair.b", "must be positive");
      for (const auto& b : cfg.pair.a_bumps)
        check_bump_support("pair.a_bumps", b, cfg.grid.box, violations);
      for (const auto& b : cfg.pair.b_bumps)
        check_bump_support("pair.b_bumps", b, cfg.grid.box, violations);
    } else {
      if (cfg.pair.a_file.empty() || cfg.pair.b_file.empty())
        rd.complain("pair.a_file", "and pair.b_file are required for field-file pairs");
      if (!(cfg.pair.lambda > 0) || !(cfg.pair.kappa > 0))
        rd.complain("pair.lambda", "and pair.kappa are required for field-file pairs");
    }
    if (rd.has("pair.lambda") && !(cfg.pair.lambda > 0))
      rd.complain("pair.lambda", "must be positive");
    if (rd.has("pair.kappa") && !(cfg.pair.kappa > 0))
      rd.complain("pair.kappa", "must be positive");
  }

  // ---- sources / omega
  {
    bool x1 = rd.vec3("sources.xi1", cfg.sources.xi1);
    bool x2 = rd.vec3("sources.xi2", cfg.sources.xi2);
    if (x1 != x2) rd.complain("sources.xi1", "and sources.xi2 must both be given");
    cfg.has_sources = x1 && x2;
    cfg.has_omega = rd.box("omega.box", cfg.omega);
    if (cfg.has_omega) {
      if (!(cfg.grid.box.contains(cfg.omega.lo) && cfg.grid.box.contains(cfg.omega.hi)))
        violations.push_back("omega.box must lie inside grid.box");
      if (cfg.has_sources) {
        if (cfg.omega.contains(cfg.sources.xi1))
          violations.push_back(
              "sources.xi1 = " + fmt_vec(cfg.sources.xi1) +
              " lies inside the measurement region omega; point sources must "
              "be outside it");
        if (cfg.omega.contains(cfg.sources.xi2))
          violations.push_back(
              "sources.xi2 = " + fmt_vec(cfg.sources.xi2) +
              " lies inside the measurement region omega; point sources must "
              "be outside it");
      }
    }
  }

  // ---- solver
  {
    cfg.solver.tol = rd.number("solver.tol", 1e-10);
    if (!(cfg.solver.tol > 0)) rd.complain("solver.tol", "must be positive");
    cfg.solver.max_iter =
        static_cast<int>(rd.integer("solver.max_iter", 20000));
    if (cfg.solver.max_iter < 1) rd.complain("solver.max_iter", "must be at least 1");
    cfg.solver.reg_lambda = rd.number("solver.reg_lambda", 1e-6);
    if (cfg.solver.reg_lambda < 0)
      rd.complain("solver.reg_lambda", "must be nonnegative");
    std::string mode = rd.str("solver.mode", "split");
    if (mode == "split")
      cfg.solver.mode = GreensMode::SingularitySplit;
    else if (mode == "delta")
      cfg.solver.mode = GreensMode::DiscreteDelta;
    else
      rd.complain("solver.mode", "must be \"split\" or \"delta\"");
    cfg.sources.mode = cfg.solver.mode;
  }

  // ---- norms
  {
    cfg.norms.alpha = rd.number("norms.alpha", 0.5);
    if (!(cfg.norms.alpha > 0) || cfg.norms.alpha > 1)
      rd.complain("norms.alpha", "must lie in (0, 1]");
    cfg.norms.theta = rd.number("norms.theta", 0.5 * cfg.norms.alpha);
    if (!(cfg.norms.theta > 0) || !(cfg.norms.theta < cfg.norms.alpha))
      rd.complain("norms.theta", "must lie in (0, alpha)");
  }

  // ---- ladder
  if (rd.numbers("ladder.epsilons", cfg.ladder.epsilons)) {
    if (cfg.ladder.epsilons.empty())
      rd.complain("ladder.epsilons", "must not be empty");
    for (std::size_t i = 0; i < cfg.ladder.epsilons.size(); ++i) {
      if (cfg.ladder.epsilons[i] < 0) {
        rd.complain("ladder.epsilons", "must be nonnegative");
        break;
      }
      if (i > 0 && cfg.ladder.epsilons[i] <= cfg.ladder.epsilons[i - 1]) {
        rd.complain("ladder.epsilons", "must be strictly increasing");
        break;
      }
    }
  }
  if (rd.vec3("ladder.bump_center", cfg.ladder.bump_center) ||
      rd.has("ladder.bump_radius")) {
    cfg.ladder.bump_radius = rd.number("ladder.bump_radius", 0.0);
    CoefBump probe{cfg.ladder.bump_center, cfg.ladder.bump_radius, 0.0};
    check_bump_support("ladder", probe, cfg.grid.box, violations);
  }
  {
    std::string target = rd.str("ladder.target", "a");
    if (target == "a")
      cfg.ladder.target = PerturbTarget::A;
    else if (target == "b")
      cfg.ladder.target = PerturbTarget::B;
    else if (target == "both")
      cfg.ladder.target = PerturbTarget::Both;
    else
      rd.complain("ladder.target", "must be \"a\", \"b\", or \"both\"");
  }

  // ---- ucp
  {
    rd.vec3("ucp.center", cfg.ucp.center);
    cfg.ucp.r0 = rd.number("ucp.r0", 0.05);
    if (!(cfg.ucp.r0 > 0)) rd.complain("ucp.r0", "must be positive");
    cfg.ucp.radii = static_cast<int>(rd.integer("ucp.radii", 32));
    if (cfg.ucp.radii < 5) rd.complain("ucp.radii", "must be at least 5");
    cfg.ucp.ratio = rd.number("ucp.ratio", 1.08);
    if (!(cfg.ucp.ratio > 1)) rd.complain("ucp.ratio", "must exceed 1");
    rd.vec3("ucp.x", cfg.ucp.x);
    cfg.ucp.delta = rd.number("ucp.delta", 0.0);
    if (cfg.ucp.delta < 0) rd.complain("ucp.delta", "must be nonnegative");
    cfg.ucp.r_lo = rd.number("ucp.r_lo", 0.1);
    if (!(cfg.ucp.r_lo > 0)) rd.complain("ucp.r_lo", "must be positive");
  }

  // ---- run
  {
    cfg.run.seed = rd.uinteger("run.seed", 0);
    cfg.run.out_dir = rd.str("run.out_dir", "out");
    if (cfg.run.out_dir.empty()) rd.complain("run.out_dir", "must not be empty");
    cfg.run.threads = static_cast<int>(rd.integer("run.threads", 1));
    if (cfg.run.threads < 1) rd.complain("run.threads", "must be at least 1");
  }

  // ---- built-pair admissibility (needs a valid grid and a buildable pair)
  if (violations.empty() && cfg.pair.kind != PairKind::FieldFile) {
    try {
      build_pair(cfg);
    } catch (const ValidationError& e) {
      violations.insert(violations.end(), e.violations.begin(),
                        e.violations.end());
    }
  }

  if (!violations.empty()) throw ValidationError(violations);
  return cfg;
}

AdmissiblePair build_pair(const ExperimentConfig& cfg) {
  Grid g = Grid::over_box(cfg.grid.box, cfg.grid.dims);
  AdmissiblePair pair;
  pair.lambda_cert = cfg.pair.lambda;
  pair.kappa_cert = cfg.pair.kappa;
  switch (cfg.pair.kind) {
    case PairKind::Constant:
      pair.a = ScalarField(g, cfg.pair.a0);
      pair.b = ScalarField(g, cfg.pair.b0);
      break;
    case PairKind::BumpSum:
      pair.a = sum_of_bumps(g, cfg.pair.a0, cfg.pair.a_bumps);
      pair.b = sum_of_bumps(g, cfg.pair.b0, cfg.pair.b_bumps);
      break;
    case PairKind::FieldFile:
      pair.a = read_field(cfg.pair.a_file);
      pair.b = read_field(cfg.pair.b_file);
      if (!pair.a.grid().same_layout(g) || !pair.b.grid().same_layout(g))
        throw ValidationError({"pair.a_file/pair.b_file grids do not match the "
                               "configured grid"});
      break;
  }
  if (!(pair.a.min_value() > 0) || !(pair.b.min_value() > 0))
    throw ValidationError({"pair: coefficients must be strictly positive"});
  derive_certs(pair);

  auto raw = check_admissible(pair, kNormBudget, 0);
  if (!raw.empty()) {
    std::ostringstream tag;
    tag << "pair (admissible class lambda = " << pair.lambda_cert
        << ", kappa = " << pair.kappa_cert << "): ";
    std::vector<std::string> v;
    for (const auto& msg : raw) v.push_back(tag.str() + msg);
    throw ValidationError(v);
  }
  return pair;
}

}  // namespace qpat
