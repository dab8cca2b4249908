#include "lingauss/hdr.hpp"

#include "lingauss/errors.hpp"
#include "lingauss/rng.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numbers>
#include <thread>

namespace lingauss {

std::string fingerprint_gammas(const std::vector<double>& gammas) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double g : gammas) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &g, sizeof bits);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

LogZEstimate estimate_log_z(const LinearConstraints& c, const std::vector<double>& gammas,
                            std::int64_t n, const ChainConfig& cfg) {
  validate_gammas(gammas);
  cfg.validate();
  if (n < 2) throw InvalidArgument("hdr: need at least two samples per level");

  LogZEstimate est;
  est.samples_per_level = n;
  est.seed = cfg.seed;
  est.thinning = cfg.thinning;
  est.sequence_fingerprint = fingerprint_gammas(gammas);

  const Rng base(cfg.seed);
  Eigen::MatrixXd samples = base.split("iid").normal_matrix(c.dim(), n);
  const double log_n = std::log(static_cast<double>(n));

  for (std::size_t t = 0; t < gammas.size(); ++t) {
    const Eigen::VectorXd slacks = c.min_slacks(samples);
    const auto inside = static_cast<std::int64_t>((slacks.array() + gammas[t] > 0.0).count());
    if (inside == 0) {
      throw ZeroCountError(t + 1, "hdr: no samples fell inside nesting " + std::to_string(t + 1) +
                                      " of " + std::to_string(gammas.size()) +
                                      "; rebuild the nestings with more samples per level");
    }
    est.counts.push_back({inside, n});
    est.log_rho_hats.push_back(std::log(static_cast<double>(inside)) - log_n);
    est.log_z += est.log_rho_hats.back();

    if (t + 1 < gammas.size()) {
      const Eigen::Index start =
          choose_handoff(slacks, gammas[t], cfg.handoff, derive_seed(cfg.seed, "handoff", t + 1));
      ChainConfig level_cfg = cfg;
      level_cfg.seed = derive_seed(cfg.seed, "chain", t + 1);
      LinessChain chain(c, gammas[t], samples.col(start), level_cfg);
      samples = chain.sample(n);
    }
  }
  est.log2_z = est.log_z / std::numbers::ln2;
  return est;
}

RepeatedLogZ estimate_log_z_repeated(const LinearConstraints& c, const std::vector<double>& gammas,
                                     std::int64_t n, const ChainConfig& cfg, std::size_t repeats,
                                     std::size_t threads) {
  if (repeats < 1) throw InvalidArgument("hdr: repeats must be at least 1");
  validate_gammas(gammas);

  RepeatedLogZ out;
  out.per_run.resize(repeats);
  std::vector<std::string> errors(repeats);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < repeats; r = next++) {
      ChainConfig run_cfg = cfg;
      run_cfg.seed = derive_seed(cfg.seed, "hdr-run", r);
      try {
        out.per_run[r] = estimate_log_z(c, gammas, n, run_cfg);
      } catch (const Error& e) {
        errors[r] = e.what();
      }
    }
  };
  const std::size_t pool = std::max<std::size_t>(1, std::min(threads, repeats));
  if (pool == 1) {
    worker();
  } else {
    std::vector<std::jthread> workers;
    for (std::size_t i = 0; i < pool; ++i) workers.emplace_back(worker);
  }

  std::vector<double> values;
  for (std::size_t r = 0; r < repeats; ++r) {
    if (out.per_run[r]) {
      values.push_back(out.per_run[r]->log2_z);
    } else {
      out.failures.push_back("run " + std::to_string(r) + ": " + errors[r]);
    }
  }
  out.excluded = repeats - values.size();
  if (values.empty()) throw NumericalError("hdr: every repeated run failed; first error: " + errors[0]);

  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean_log2_z = sum / static_cast<double>(values.size());
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean_log2_z) * (v - out.mean_log2_z);
    out.stddev_log2_z = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

}  // namespace lingauss
