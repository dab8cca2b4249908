#include "lingauss/constraints.hpp"

#include "lingauss/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lingauss {

namespace {

constexpr double kSymmetryTolerance = 1e-10;

}  // namespace

LinearConstraints::LinearConstraints(Eigen::MatrixXd a_matrix, Eigen::VectorXd b_vector)
    : a_(std::move(a_matrix)), b_(std::move(b_vector)) {
  if (a_.rows() < 1 || a_.cols() < 1) {
    throw InvalidArgument("constraints: need at least one constraint and one dimension");
  }
  if (b_.size() != a_.rows()) {
    throw InvalidArgument("constraints: b has " + std::to_string(b_.size()) + " entries, A has " +
                          std::to_string(a_.rows()) + " rows");
  }
  if (!a_.allFinite() || !b_.allFinite()) {
    throw InvalidArgument("constraints: non-finite entry in A or b");
  }
  for (Eigen::Index m = 0; m < a_.rows(); ++m) {
    if ((a_.row(m).array() == 0.0).all()) {
      throw InvalidArgument("constraints: row " + std::to_string(m) + " of A is zero (" +
                            (b_[m] > 0 ? "vacuous" : "infeasible") + " constraint)");
    }
  }
}

Eigen::VectorXd LinearConstraints::slacks(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dim()) {
    throw InvalidArgument("constraints: point has dimension " + std::to_string(x.size()) +
                          ", expected " + std::to_string(dim()));
  }
  return a_ * x + b_;
}

double LinearConstraints::min_slack(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return slacks(x).minCoeff();
}

Eigen::VectorXd LinearConstraints::min_slacks(const Eigen::Ref<const Eigen::MatrixXd>& samples) const {
  if (samples.rows() != dim()) {
    throw InvalidArgument("constraints: samples have dimension " + std::to_string(samples.rows()) +
                          ", expected " + std::to_string(dim()));
  }
  Eigen::MatrixXd s = a_ * samples;
  s.colwise() += b_;
  return s.colwise().minCoeff().transpose();
}

ShiftedEvaluation evaluate_shifted(const LinearConstraints& c,
                                   const Eigen::Ref<const Eigen::VectorXd>& x, double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InvalidArgument("evaluate_shifted: gamma must be finite and >= 0");
  if (!x.allFinite()) throw InvalidArgument("evaluate_shifted: point has non-finite entries");
  const double s = c.min_slack(x);
  return {s, s + gamma > 0.0};
}

AffineMap::AffineMap(Eigen::MatrixXd lower, Eigen::VectorXd shift)
    : lower_(std::move(lower)), shift_(std::move(shift)) {
  if (lower_.rows() != lower_.cols() || lower_.rows() != shift_.size()) {
    throw InvalidArgument("affine map: factor and shift shapes disagree");
  }
}

AffineMap AffineMap::identity(Eigen::Index dim) {
  return AffineMap(Eigen::MatrixXd::Identity(dim, dim), Eigen::VectorXd::Zero(dim));
}

Eigen::VectorXd AffineMap::forward(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  return lower_.triangularView<Eigen::Lower>() * u + shift_;
}

Eigen::VectorXd AffineMap::inverse(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return lower_.triangularView<Eigen::Lower>().solve(x - shift_);
}

Eigen::MatrixXd AffineMap::forward_columns(const Eigen::Ref<const Eigen::MatrixXd>& u) const {
  Eigen::MatrixXd x = lower_.triangularView<Eigen::Lower>() * u;
  x.colwise() += shift_;
  return x;
}

Eigen::MatrixXd cholesky_lower(const Eigen::Ref<const Eigen::MatrixXd>& sigma) {
  const Eigen::Index n = sigma.rows();
  if (sigma.cols() != n) {
    throw InvalidArgument("cholesky: matrix is not square");
  }
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double d = sigma(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > 0.0)) {
      throw CholeskyError(static_cast<std::size_t>(j + 1),
                          "cholesky: covariance is not positive definite (leading minor " +
                              std::to_string(j + 1) + " is not positive)");
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    if (j + 1 < n) {
      const Eigen::Index rest = n - j - 1;
      l.col(j).tail(rest) =
          (sigma.col(j).tail(rest) - l.bottomLeftCorner(rest, j) * l.row(j).head(j).transpose()) / ljj;
    }
  }
  return l;
}

GaussianProblem::GaussianProblem(LinearConstraints c, std::optional<Eigen::VectorXd> mu,
                                 std::optional<Eigen::MatrixXd> cov)
    : constraints(std::move(c)), mean(std::move(mu)), covariance(std::move(cov)) {
  const Eigen::Index d = constraints.dim();
  if (mean) {
    if (mean->size() != d) {
      throw InvalidArgument("problem: mean has length " + std::to_string(mean->size()) +
                            ", expected " + std::to_string(d));
    }
    if (!mean->allFinite()) throw InvalidArgument("problem: non-finite entry in mean");
  }
  if (covariance) {
    if (covariance->rows() != d || covariance->cols() != d) {
      throw InvalidArgument("problem: covariance must be " + std::to_string(d) + "x" +
                            std::to_string(d));
    }
    if (!covariance->allFinite()) throw InvalidArgument("problem: non-finite entry in covariance");
    const double scale = std::max(covariance->cwiseAbs().maxCoeff(), 1e-300);
    const double asym = (*covariance - covariance->transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTolerance * scale) {
      throw InvalidArgument("problem: covariance is not symmetric (max asymmetry " +
                            std::to_string(asym) + ")");
    }
  }
}

WhitenedProblem whiten(const GaussianProblem& p) {
  const Eigen::Index d = p.dim();
  Eigen::MatrixXd lower = p.covariance ? cholesky_lower(*p.covariance)
                                       : Eigen::MatrixXd(Eigen::MatrixXd::Identity(d, d));
  Eigen::VectorXd mu = p.mean ? *p.mean : Eigen::VectorXd(Eigen::VectorXd::Zero(d));

  const auto& a = p.constraints.a();
  Eigen::MatrixXd a_white = p.covariance ? Eigen::MatrixXd(a * lower.triangularView<Eigen::Lower>())
                                         : a;
  Eigen::VectorXd b_white = a * mu + p.constraints.b();
  return {LinearConstraints(std::move(a_white), std::move(b_white)),
          AffineMap(std::move(lower), std::move(mu))};
}

}  // namespace lingauss
