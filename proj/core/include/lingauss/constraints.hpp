#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>

namespace lingauss {

// Domain { x : a_m^T x + b_m > 0 for all m }.
//
// The matrix is stored with one constraint per row (M x D), i.e. it holds the
// transpose of the D x M column-per-constraint layout. Every hot loop computes
// a_m^T x, so rows are the natural unit.
class LinearConstraints {
 public:
  // Throws InvalidArgument on empty/ragged shapes, non-finite entries, or a
  // zero row (vacuous if b_m > 0, infeasible otherwise; both are modeling errors).
  LinearConstraints(Eigen::MatrixXd a_matrix, Eigen::VectorXd b_vector);

  const Eigen::MatrixXd& a() const noexcept { return a_; }
  const Eigen::VectorXd& b() const noexcept { return b_; }
  Eigen::Index num_constraints() const noexcept { return a_.rows(); }
  Eigen::Index dim() const noexcept { return a_.cols(); }

  // a_m^T x + b_m for every m.
  Eigen::VectorXd slacks(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  // min_m (a_m^T x + b_m).
  double min_slack(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  // Column-wise min slack of a D x N sample matrix.
  Eigen::VectorXd min_slacks(const Eigen::Ref<const Eigen::MatrixXd>& samples) const;

 private:
  Eigen::MatrixXd a_;
  Eigen::VectorXd b_;
};

struct ShiftedEvaluation {
  double min_slack;
  bool inside;  // min_slack + gamma > 0
};

// Membership in the shifted domain L(gamma) = { x : min_m(a_m^T x + b_m) + gamma > 0 }.
ShiftedEvaluation evaluate_shifted(const LinearConstraints& c,
                                   const Eigen::Ref<const Eigen::VectorXd>& x,
                                   double gamma);

// x = L u + mu, with L lower-triangular.
class AffineMap {
 public:
  AffineMap(Eigen::MatrixXd lower, Eigen::VectorXd shift);
  static AffineMap identity(Eigen::Index dim);

  const Eigen::MatrixXd& lower() const noexcept { return lower_; }
  const Eigen::VectorXd& shift() const noexcept { return shift_; }
  Eigen::Index dim() const noexcept { return shift_.size(); }

  Eigen::VectorXd forward(const Eigen::Ref<const Eigen::VectorXd>& u) const;
  Eigen::VectorXd inverse(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  // Applies forward() to each column.
  Eigen::MatrixXd forward_columns(const Eigen::Ref<const Eigen::MatrixXd>& u) const;

 private:
  Eigen::MatrixXd lower_;
  Eigen::VectorXd shift_;
};

// Lower Cholesky factor of a symmetric positive-definite matrix.
// Throws CholeskyError naming the first non-positive leading minor.
Eigen::MatrixXd cholesky_lower(const Eigen::Ref<const Eigen::MatrixXd>& sigma);

// A linearly constrained N(mean, covariance) problem in the original variable.
struct GaussianProblem {
  // Validates shapes, finiteness and symmetry (relative tolerance 1e-10).
  GaussianProblem(LinearConstraints constraints,
                  std::optional<Eigen::VectorXd> mean = std::nullopt,
                  std::optional<Eigen::MatrixXd> covariance = std::nullopt);

  Eigen::Index dim() const noexcept { return constraints.dim(); }

  LinearConstraints constraints;
  std::optional<Eigen::VectorXd> mean;        // absent => zero
  std::optional<Eigen::MatrixXd> covariance;  // absent => identity
};

struct WhitenedProblem {
  LinearConstraints constraints;  // over u ~ N(0, I)
  AffineMap transform;            // u -> x
};

// Rewrites the problem over u ~ N(0, I) via x = L u + mu, L = chol(Sigma).
// Rows become a_m^T L and offsets a_m^T mu + b_m. Any square root of Sigma
// gives the same probability; the lower Cholesky factor is the one used.
WhitenedProblem whiten(const GaussianProblem& problem);

}  // namespace lingauss
