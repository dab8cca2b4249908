#include "lingauss/derivatives.hpp"

#include "lingauss/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lingauss {

namespace {

constexpr double kConditionWarning = 1e12;

Eigen::LLT<Eigen::MatrixXd> factorize(const Eigen::MatrixXd& sigma) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    cholesky_lower(sigma);  // throws with the failing minor
    throw CholeskyError(0, "cholesky: factorization failed");
  }
  return llt;
}

}  // namespace

Eigen::MatrixXd pmin_constraint_matrix(Eigen::Index i, Eigen::Index n_r) {
  if (n_r < 2) throw InvalidArgument("pmin: need at least two representer points");
  if (i < 0 || i >= n_r) {
    throw InvalidArgument("pmin: representer index " + std::to_string(i) + " out of range [0, " +
                          std::to_string(n_r) + ")");
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_r - 1, n_r);
  Eigen::Index row = 0;
  for (Eigen::Index j = 0; j < n_r; ++j) {
    if (j == i) continue;
    m(row, j) = 1.0;
    m(row, i) = -1.0;
    ++row;
  }
  return m;
}

WhitenedProblem pmin_to_standard(Eigen::Index i, const Eigen::VectorXd& mu,
                                 const Eigen::MatrixXd& sigma) {
  const Eigen::Index n_r = mu.size();
  if (sigma.rows() != n_r || sigma.cols() != n_r) {
    throw InvalidArgument("pmin: covariance must be " + std::to_string(n_r) + "x" + std::to_string(n_r));
  }
  const Eigen::MatrixXd m = pmin_constraint_matrix(i, n_r);
  Eigen::MatrixXd lower = cholesky_lower(sigma);
  Eigen::MatrixXd a = m * lower.triangularView<Eigen::Lower>();
  Eigen::VectorXd b = m * mu;
  return {LinearConstraints(std::move(a), std::move(b)), AffineMap(std::move(lower), mu)};
}

MomentEstimates estimate_moments(const LinearConstraints& c, const AffineMap& transform,
                                 std::int64_t n, const ChainConfig& cfg,
                                 const Eigen::VectorXd& seed_point) {
  if (n < 1) throw InvalidArgument("moments: need at least one sample");
  if (transform.dim() != c.dim()) throw InvalidArgument("moments: transform dimension mismatch");
  const Eigen::Index d = c.dim();
  const Eigen::Index batches = std::min<Eigen::Index>(kMomentBatches, n);

  LinessChain chain(c, 0.0, seed_point, cfg);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd batch_sum = Eigen::MatrixXd::Zero(d, batches);
  Eigen::VectorXi batch_count = Eigen::VectorXi::Zero(batches);

  // Accumulate in u-space; f - mu = L u is applied once at the end.
  for (std::int64_t j = 0; j < n; ++j) {
    for (std::uint32_t k = 0; k < cfg.thinning; ++k) chain.step();
    const Eigen::VectorXd& u = chain.state();
    sum += u;
    outer.selfadjointView<Eigen::Lower>().rankUpdate(u);
    const auto b = static_cast<Eigen::Index>(j * batches / n);
    batch_sum.col(b) += u;
    ++batch_count[b];
  }
  outer = outer.selfadjointView<Eigen::Lower>();

  const auto lower = transform.lower().triangularView<Eigen::Lower>();
  const double inv_n = 1.0 / static_cast<double>(n);
  MomentEstimates m;
  m.n_samples = n;
  m.first_moment = lower * (sum * inv_n);
  Eigen::MatrixXd second = lower * (outer * inv_n) * transform.lower().transpose();
  m.second_moment = 0.5 * (second + second.transpose());
  for (Eigen::Index b = 0; b < batches; ++b) batch_sum.col(b) /= static_cast<double>(batch_count[b]);
  m.batch_first_moments = lower * batch_sum;
  return m;
}

LogPminGradient grad_log_pmin(const MomentEstimates& m, const Eigen::VectorXd& mu,
                              const Eigen::MatrixXd& sigma) {
  const Eigen::Index d = mu.size();
  if (sigma.rows() != d || sigma.cols() != d || m.first_moment.size() != d ||
      m.second_moment.rows() != d) {
    throw InvalidArgument("gradient: moment and parameter dimensions disagree");
  }
  const auto llt = factorize(sigma);
  LogPminGradient g;

  const Eigen::MatrixXd sigma_inv = llt.solve(Eigen::MatrixXd::Identity(d, d));
  g.d_mu = llt.solve(m.first_moment);
  // Sigma^-1 S Sigma^-1 = (Sigma^-1 (Sigma^-1 S)^T)^T
  const Eigen::MatrixXd left = llt.solve(m.second_moment);
  const Eigen::MatrixXd both = llt.solve(left.transpose()).transpose();
  Eigen::MatrixXd d_sigma = 0.5 * (both - sigma_inv);
  g.d_sigma = 0.5 * (d_sigma + d_sigma.transpose());

  g.hessian_mu.resize(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) g.hessian_mu(i, j) = 2.0 * g.d_sigma(i, j) - g.d_mu[i] * g.d_mu[j];

  const Eigen::Index batches = m.batch_first_moments.cols();
  if (batches >= 2 && m.batch_first_moments.rows() == d) {
    const Eigen::MatrixXd per_batch = llt.solve(m.batch_first_moments);
    const Eigen::VectorXd mean = per_batch.rowwise().mean();
    const Eigen::MatrixXd centered = per_batch.colwise() - mean;
    const Eigen::VectorXd var = centered.rowwise().squaredNorm() / static_cast<double>(batches - 1);
    g.stderr_d_mu = (var / static_cast<double>(batches)).cwiseSqrt();
  }

  const double rcond = llt.rcond();
  if (!(rcond > 0.0) || 1.0 / rcond > kConditionWarning) {
    g.warning = "covariance is badly conditioned (condition estimate " +
                std::to_string(rcond > 0.0 ? 1.0 / rcond : INFINITY) +
                "); moment-based derivatives may be inaccurate";
  }
  return g;
}

PminGradient grad_pmin(const MomentEstimates& m, const LogPminGradient& g) {
  if (!m.log_p_hat) throw InvalidArgument("gradient: unnormalized derivatives need an estimate of p");
  const double p = std::exp(*m.log_p_hat);
  return {p * g.d_mu, p * g.d_sigma};
}

}  // namespace lingauss
