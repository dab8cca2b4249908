#pragma once

#include "lingauss/constraints.hpp"
#include "lingauss/liness.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>

namespace lingauss {

// (n_r - 1) x n_r matrix with (M f)_j = f_j - f_i for j != i (rows in ascending j).
// `i` is 0-based. M f > 0 iff f_i is the strict minimum.
Eigen::MatrixXd pmin_constraint_matrix(Eigen::Index i, Eigen::Index n_r);

// Probability-of-minimum domain for representer i as a standard-normal problem:
// rows of M L and offsets M mu, with L = chol(sigma); f = L u + mu.
WhitenedProblem pmin_to_standard(Eigen::Index i, const Eigen::VectorXd& mu,
                                 const Eigen::MatrixXd& sigma);

// Moments of f - mu under the normalized truncated density.
struct MomentEstimates {
  std::optional<double> log_p_hat;   // supplied by the caller (HDR), natural log
  Eigen::VectorXd first_moment;      // E[f - mu]
  Eigen::MatrixXd second_moment;     // E[(f - mu)(f - mu)^T], symmetrized
  Eigen::MatrixXd batch_first_moments;  // D x B, per-batch E[f - mu], for error bars
  std::int64_t n_samples = 0;
};

inline constexpr Eigen::Index kMomentBatches = 25;

// Runs a chain in u-space from seed_point and accumulates moments of
// f - mu = L u. The samples follow the normalized truncated law, so these are
// expectations under that law directly.
MomentEstimates estimate_moments(const LinearConstraints& c, const AffineMap& transform,
                                 std::int64_t n, const ChainConfig& cfg,
                                 const Eigen::VectorXd& seed_point);

struct LogPminGradient {
  Eigen::VectorXd d_mu;        // d log Z / d mu
  Eigen::MatrixXd d_sigma;     // d log Z / d Sigma_ij
  Eigen::MatrixXd hessian_mu;  // d^2 log Z / d mu_i d mu_j
  Eigen::VectorXd stderr_d_mu; // batch-means standard error; empty without batches
  std::optional<std::string> warning;
};

// d_mu = Sigma^-1 E[f-mu]
// d_sigma = 1/2 (Sigma^-1 E[(f-mu)(f-mu)^T] Sigma^-1 - Sigma^-1)
// hessian_mu = 2 d_sigma - d_mu d_mu^T
// The 1/p_min prefactor of the unnormalized form cancels because the moments
// are taken under the normalized density. Sigma^-1 is applied through
// Cholesky solves. A condition estimate above 1e12 sets `warning`.
LogPminGradient grad_log_pmin(const MomentEstimates& m, const Eigen::VectorXd& mu,
                              const Eigen::MatrixXd& sigma);

struct PminGradient {
  Eigen::VectorXd d_mu;     // dZ/dmu
  Eigen::MatrixXd d_sigma;  // dZ/dSigma_ij
};

// Unnormalized derivatives Z * d log Z. Requires m.log_p_hat.
PminGradient grad_pmin(const MomentEstimates& m, const LogPminGradient& g);

}  // namespace lingauss
