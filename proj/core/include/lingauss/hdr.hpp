#pragma once

#include "lingauss/constraints.hpp"
#include "lingauss/liness.hpp"
#include "lingauss/nestings.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lingauss {

struct LevelCount {
  std::int64_t inside;
  std::int64_t total;
  bool operator==(const LevelCount&) const = default;
};

struct LogZEstimate {
  std::vector<double> log_rho_hats;  // natural log, one per level
  double log_z = 0.0;                // sum of log_rho_hats
  double log2_z = 0.0;
  std::vector<LevelCount> counts;
  // Echo of the run configuration.
  std::int64_t samples_per_level = 0;
  std::uint64_t seed = 0;
  std::uint32_t thinning = 0;
  std::string sequence_fingerprint;

  bool operator==(const LogZEstimate&) const = default;
};

// Hex FNV-1a hash over the bit patterns of the shifts.
std::string fingerprint_gammas(const std::vector<double>& gammas);

// Holmes-Diaconis-Ross estimate of log P(x in L), x ~ N(0, I).
//
// Level 1 counts iid draws inside L_1; level t > 1 runs a chain on L_{t-1}
// started from a previous-level sample inside L_{t-1} (see Handoff) and counts the
// n kept states inside L_t. The seed itself is never among the counted states.
// Throws ZeroCountError when a level has no samples inside.
LogZEstimate estimate_log_z(const LinearConstraints& c, const std::vector<double>& gammas,
                            std::int64_t n, const ChainConfig& cfg);

struct RepeatedLogZ {
  double mean_log2_z = 0.0;
  std::optional<double> stddev_log2_z;  // needs two successful runs
  std::vector<std::optional<LogZEstimate>> per_run;  // nullopt for failed runs
  std::vector<std::string> failures;      // one message per failed run
  std::size_t excluded = 0;
};

// Repeats with independent streams: run r uses seed derive_seed(cfg.seed, "hdr-run", r).
// Runs may execute on `threads` worker threads; results do not depend on scheduling.
// Throws NumericalError if every run failed.
RepeatedLogZ estimate_log_z_repeated(const LinearConstraints& c, const std::vector<double>& gammas,
                                     std::int64_t n, const ChainConfig& cfg, std::size_t repeats,
                                     std::size_t threads = 1);

}  // namespace lingauss
