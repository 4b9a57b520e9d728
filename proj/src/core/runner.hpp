#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "core/config.hpp"

namespace qpat {

inline constexpr const char* kToolVersion = "0.1.0";

/// Command-line overrides of the corresponding config fields.
struct RunOverrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

/// Execute one pipeline command against a validated configuration:
///   forward         solve both point-source problems, write u1, u2, v1, v2
///   reconstruct     read v1, v2 from the output directory, run the chain,
///                   write a_hat, b_hat, sigma_hat, rho_hat and residuals
///   stability       perturbation ladder; writes ladder.csv and loglog.svg
///   ucp-freq        frequency curve of the data quotient with identity and
///                   monotonicity checks; writes freq.svg
///   ucp-threeball   three-ball exponent of the data quotient
///   ucp-chain       ball chain between the configured endpoints (no solves)
///   ucp-nearsource  compensated near-source band of the closed-form
///                   quotient (constant pairs only, no solves)
///   specfun-check   kernel oracles and the two-sided kernel bound
///
/// Artifacts are written atomically into the output directory; results.json
/// holds the command summary and manifest.json the run manifest (artifact
/// list, config hash, per-stage solver reports, timestamps). Everything
/// except the manifest's timestamps is a deterministic function of config,
/// command, and overrides. Returns the manifest JSON text. Throws on
/// invalid commands, missing config sections, and stage failures.
std::string run_command(const ExperimentConfig& cfg, const std::string& command,
                        const RunOverrides& overrides = {});

}  // namespace qpat
