#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/qpat_chain.hpp"
#include "core/stability.hpp"
#include "core/toml.hpp"

namespace qpat {

struct GridSpec {
  Index3 dims{33, 33, 33};
  Box box{{-1, -1, -1}, {1, 1, 1}};
};

enum class PairKind { Constant, BumpSum, FieldFile };

/// One additive bump (1 - |x-c|^2/rho^2)^3 on top of the constant level.
struct CoefBump {
  Vec3 center;
  double rho = 0;
  double amp = 0;
};

struct PairSpec {
  PairKind kind = PairKind::Constant;
  double a0 = 1.0, b0 = 1.0;
  /// Class certificates. Zero means "derive from the built coefficients";
  /// field-file pairs must state them explicitly.
  double lambda = 0, kappa = 0;
  std::vector<CoefBump> a_bumps, b_bumps;
  std::string a_file, b_file;
};

struct SolverSpec {
  double tol = 1e-10;
  int max_iter = 20000;
  double reg_lambda = 1e-6;
  GreensMode mode = GreensMode::SingularitySplit;
};

/// Holder exponents of the coefficient norms. theta is carried for report
/// metadata only; it parametrizes interpolation constants that no computed
/// quantity depends on.
struct NormsSpec {
  double alpha = 0.5;
  double theta = 0.25;
};

struct LadderSpec {
  std::vector<double> epsilons;
  Vec3 bump_center;
  double bump_radius = 0;
  PerturbTarget target = PerturbTarget::A;
};

/// Inputs of the unique-continuation diagnostics; which fields matter
/// depends on the selected mode (frequency ladder, three balls, chain of
/// balls, near-source band).
struct UcpSpec {
  Vec3 center{0, 0, 0};
  double r0 = 0.05;
  int radii = 32;
  double ratio = 1.08;
  Vec3 x{0, 0, 0};   ///< chain far endpoint
  double delta = 0;  ///< chain ball radius
  double r_lo = 0.1; ///< near-source annulus inner radius
};

struct RunSpec {
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  int threads = 1;
};

struct ExperimentConfig {
  GridSpec grid;
  PairSpec pair;
  SourceConfig sources;
  bool has_sources = false;
  Box omega{{0, 0, 0}, {0, 0, 0}};
  bool has_omega = false;
  SolverSpec solver;
  NormsSpec norms;
  LadderSpec ladder;
  UcpSpec ucp;
  RunSpec run;
  std::uint64_t hash = 0;     ///< FNV-1a64 of the canonical key rendering
  std::string canonical;      ///< the rendering the hash covers
};

/// Parse and validate a configuration. Unknown keys, type mismatches, and
/// semantic violations (inadmissible pair, sources inside the measurement
/// region, malformed ladders) are all collected and thrown together as a
/// ValidationError; syntax errors throw InvalidArgument with line/column.
/// Sections that are absent stay at their defaults; sources and omega
/// record their presence, and commands that need them reject their absence
/// at run time.
ExperimentConfig parse_config(const std::string& text);

/// Build the coefficient pair on the configured grid: constant level plus
/// bumps, or fields loaded from files (validated admissible here, since
/// parse_config cannot touch the filesystem). Derived certificates are
/// filled in where the spec left them at zero.
AdmissiblePair build_pair(const ExperimentConfig& cfg);

/// 16-digit lowercase hex of a 64-bit hash.
std::string hash_hex(std::uint64_t h);

}  // namespace qpat
