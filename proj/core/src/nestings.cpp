#include "lingauss/nestings.hpp"

#include "lingauss/errors.hpp"
#include "lingauss/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace lingauss {

namespace {

void check_rho(double rho, Eigen::Index n) {
  if (!(rho > 0.0 && rho < 1.0)) throw InvalidArgument("find_shift: rho must lie in (0, 1)");
  if (n < 2) throw InvalidArgument("find_shift: need at least two samples");
  if (static_cast<Eigen::Index>(std::floor(rho * static_cast<double>(n))) < 1) {
    throw InvalidArgument("find_shift: floor(rho * N) must be at least 1");
  }
}

// Shift choice without the stall check.
ShiftChoice choose_shift(double rho, const Eigen::VectorXd& min_slacks) {
  const Eigen::Index n = min_slacks.size();
  const auto k = static_cast<Eigen::Index>(std::floor(rho * static_cast<double>(n)));
  std::vector<double> needed(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) needed[static_cast<std::size_t>(i)] = -min_slacks[i];
  std::sort(needed.begin(), needed.end());
  // k-th and (k+1)-th order statistics, 1-indexed.
  const double gamma = 0.5 * (needed[static_cast<std::size_t>(k - 1)] + needed[static_cast<std::size_t>(k)]);
  const auto inside = (min_slacks.array() + gamma > 0.0).count();
  return {gamma, static_cast<double>(inside) / static_cast<double>(n)};
}

}  // namespace

double ShiftSequence::biased_log2_z() const noexcept { return biased_log_z / std::numbers::ln2; }

ShiftChoice find_shift_from_slacks(double rho, const Eigen::Ref<const Eigen::VectorXd>& min_slacks) {
  check_rho(rho, min_slacks.size());
  const ShiftChoice choice = choose_shift(rho, min_slacks);
  if (choice.rho_hat == 0.0) {
    throw StallError(0, "find_shift: all needed shifts are tied; no sample lies inside the new domain");
  }
  return choice;
}

ShiftChoice find_shift(double rho, const Eigen::Ref<const Eigen::MatrixXd>& samples,
                       const LinearConstraints& c) {
  return find_shift_from_slacks(rho, c.min_slacks(samples));
}

void validate_gammas(const std::vector<double>& gammas) {
  if (gammas.empty()) throw InvalidArgument("shift sequence is empty");
  if (gammas.back() != 0.0) throw InvalidArgument("shift sequence must end with exactly 0");
  for (std::size_t t = 0; t < gammas.size(); ++t) {
    if (!std::isfinite(gammas[t])) throw InvalidArgument("shift sequence has a non-finite entry");
    if (t + 1 < gammas.size() && !(gammas[t] > gammas[t + 1])) {
      throw InvalidArgument("shift sequence is not strictly decreasing at index " + std::to_string(t));
    }
  }
}

ShiftSequence build_sequence(const LinearConstraints& c, const SubsetSimulationOptions& opts,
                             const ChainConfig& cfg) {
  cfg.validate();
  check_rho(opts.rho, opts.n_per_level);
  const Eigen::Index n = opts.n_per_level;
  const Rng base(cfg.seed);

  ShiftSequence seq;
  Eigen::MatrixXd samples = base.split("level", 0).normal_matrix(c.dim(), n);
  Eigen::VectorXd slacks = c.min_slacks(samples);
  double previous = std::numeric_limits<double>::infinity();

  for (std::size_t level = 0;; ++level) {
    const ShiftChoice choice = choose_shift(opts.rho, slacks);
    if (choice.rho_hat == 0.0) {
      throw StallError(level, "subset simulation stalled at level " + std::to_string(level) +
                                  ": no sample lies inside the next domain");
    }
    if (choice.gamma <= 0.0) {
      const auto inside = (slacks.array() > 0.0).count();
      if (inside == 0) {
        throw StallError(level, "subset simulation stalled at level " + std::to_string(level) +
                                    ": no sample lies inside the target domain");
      }
      seq.gammas.push_back(0.0);
      seq.rho_hats.push_back(static_cast<double>(inside) / static_cast<double>(n));
      seq.seeds.push_back(
          samples.col(choose_handoff(slacks, 0.0, cfg.handoff, derive_seed(cfg.seed, "handoff", level + 1))));
      break;
    }
    if (!(choice.gamma < previous)) {
      throw StallError(level, "subset simulation made no progress in the shift at level " +
                                  std::to_string(level));
    }
    if (seq.gammas.size() + 1 >= opts.max_levels) {
      throw StallError(level, "subset simulation exceeded the cap of " +
                                  std::to_string(opts.max_levels) + " levels");
    }
    seq.gammas.push_back(choice.gamma);
    seq.rho_hats.push_back(choice.rho_hat);
    const Eigen::VectorXd seed = samples.col(
        choose_handoff(slacks, choice.gamma, cfg.handoff, derive_seed(cfg.seed, "handoff", level + 1)));
    seq.seeds.push_back(seed);

    ChainConfig level_cfg = cfg;
    level_cfg.seed = derive_seed(cfg.seed, "chain", level + 1);
    LinessChain chain(c, choice.gamma, seed, level_cfg);
    samples = chain.sample(n);
    slacks = c.min_slacks(samples);
    previous = choice.gamma;
  }

  for (double r : seq.rho_hats) seq.biased_log_z += std::log(r);
  return seq;
}

}  // namespace lingauss
