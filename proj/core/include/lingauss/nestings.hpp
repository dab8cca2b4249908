#pragma once

#include "lingauss/constraints.hpp"
#include "lingauss/liness.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace lingauss {

// Nested domains L_t = { x : min_m(a_m^T x + b_m) + gammas[t] > 0 }.
struct ShiftSequence {
  std::vector<double> gammas;      // strictly decreasing, last is exactly 0
  std::vector<double> rho_hats;    // realized fraction per level
  std::vector<Eigen::VectorXd> seeds;  // one strictly feasible point per level
  // Subset-simulation estimate sum_t log(rho_hats[t]). Biased; HDR is the
  // unbiased route. Natural log.
  double biased_log_z = 0.0;

  std::size_t size() const noexcept { return gammas.size(); }
  double biased_log2_z() const noexcept;
};

struct ShiftChoice {
  double gamma;
  double rho_hat;
};

// Order-statistic shift such that floor(rho N) of the samples (columns) lie in
// the shifted domain. gamma <= 0 means the target domain is already reached.
// Throws InvalidArgument for N < 2 or floor(rho N) < 1, StallError if the
// realized fraction is zero.
ShiftChoice find_shift(double rho, const Eigen::Ref<const Eigen::MatrixXd>& samples,
                       const LinearConstraints& c);

// Same, from precomputed per-sample min slacks.
ShiftChoice find_shift_from_slacks(double rho, const Eigen::Ref<const Eigen::VectorXd>& min_slacks);

struct SubsetSimulationOptions {
  Eigen::Index n_per_level = 16;
  double rho = 0.5;
  std::size_t max_levels = 10000;
};

// Subset simulation: builds the shift sequence ending at gamma = 0.
// The chain at each level starts from one previous-level sample inside the
// new domain, chosen by cfg.handoff; other samples are discarded.
ShiftSequence build_sequence(const LinearConstraints& c, const SubsetSimulationOptions& opts,
                             const ChainConfig& cfg);

// Strictly decreasing, finite, positive except for a final exact 0.
void validate_gammas(const std::vector<double>& gammas);

}  // namespace lingauss
