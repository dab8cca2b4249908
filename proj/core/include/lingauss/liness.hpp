#pragma once

#include "lingauss/constraints.hpp"
#include "lingauss/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

namespace lingauss {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// How a chain step finds the feasible arcs.
//   sweep: every constraint is infeasible on one arc between its two roots and
//          theta = 0 is feasible, so cutting the circle at 0 turns the bracket
//          set into the complement of a union of intervals. O(M log M).
//   probe: evaluate the indicator at each root +- delta_theta and keep roots
//          where it jumps. O(M^2); kept as a cross-check.
enum class BracketMethod { sweep, probe };

// Which previous-level sample inside the next domain starts the next chain.
//   deepest: the one with the largest min slack; keeps the first steps away
//            from the boundary but starts the chain off equilibrium.
//   uniform: a uniformly chosen one.
// With slowly mixing chains deepest tends to overshoot the shift and uniform
// to undershoot it.
enum class Handoff { deepest, uniform };

struct ChainConfig {
  std::uint32_t thinning = 1;   // keep every k-th state
  double delta_theta = 1e-7;    // jump-detection offset (radians), probe method
  std::uint64_t seed = 0;
  BracketMethod method = BracketMethod::sweep;
  Handoff handoff = Handoff::deepest;

  // Thinning 10 while building nestings, 2 inside HDR.
  static ChainConfig for_nestings(std::uint64_t seed) { return {10, 1e-7, seed, BracketMethod::sweep}; }
  static ChainConfig for_hdr(std::uint64_t seed) { return {2, 1e-7, seed, BracketMethod::sweep}; }

  // Throws InvalidArgument unless thinning >= 1 and 0 < delta_theta < 1e-3.
  void validate() const;
};

// Both roots of g0 cos(t) + g1 sin(t) + b_m + gamma = 0 for one constraint.
struct ConstraintCrossing {
  Eigen::Index constraint;
  double theta1;  // phase + arccos(.), in [0, 2pi)
  double theta2;  // phase - arccos(.), in [0, 2pi)
};

struct TaggedAngle {
  double theta;
  Eigen::Index constraint;
};

// Angular interval on which every shifted constraint holds along the ellipse.
// All angles live in [0, 2pi); start > end marks an interval that wraps
// through 2pi. The full circle is {0, 2pi}.
struct AngularBracket {
  double start;
  double end;

  double length() const noexcept { return end >= start ? end - start : end + kTwoPi - start; }
  bool contains(double theta) const noexcept;
  // Point at arc distance `offset` from start, wrapped into [0, 2pi).
  double at(double offset) const noexcept;
  double midpoint() const noexcept { return at(0.5 * length()); }
};

// Projections of the ellipse x(t) = x0 cos t + nu sin t onto every constraint.
// With these, the slack of constraint m along the ellipse is
// g0[m] cos t + g1[m] sin t + b[m] + gamma, so no further D-length work is needed.
struct EllipseProjections {
  Eigen::VectorXd g0;  // A x0
  Eigen::VectorXd g1;  // A nu
};

EllipseProjections project_ellipse(const LinearConstraints& c,
                                   const Eigen::Ref<const Eigen::VectorXd>& x0,
                                   const Eigen::Ref<const Eigen::VectorXd>& nu);

// Closed-form ellipse/hyperplane crossings. Constraints that keep one sign on
// the ellipse (|b~| >= r, tangency within 1e-12 r, or r = 0) are omitted.
std::vector<ConstraintCrossing> intersection_angles(const LinearConstraints& c,
                                                    const Eigen::Ref<const Eigen::VectorXd>& x0,
                                                    const Eigen::Ref<const Eigen::VectorXd>& nu,
                                                    double gamma);

std::vector<ConstraintCrossing> intersection_angles(const EllipseProjections& proj,
                                                    const Eigen::VectorXd& b, double gamma);

// One slice-sampling step's full geometry.
struct EllipseSlice {
  Eigen::VectorXd x0;
  Eigen::VectorXd nu;
  std::vector<TaggedAngle> intersections;  // sorted by angle
  std::vector<AngularBracket> brackets;    // disjoint, sorted by start (wrapping one last)

  double total_length() const noexcept;
  Eigen::VectorXd point(double theta) const { return x0 * std::cos(theta) + nu * std::sin(theta); }
};

// Maximal arcs of the ellipse inside the shifted domain, found by probing the
// indicator at every root +- delta_theta. Roots closer than 2 delta_theta fall
// back to classifying each arc between consecutive roots by its midpoint.
// Requires x0 strictly feasible at gamma (throws ContractViolation otherwise);
// the returned set then always contains theta = 0.
std::vector<AngularBracket> active_brackets(const LinearConstraints& c,
                                            const Eigen::Ref<const Eigen::VectorXd>& x0,
                                            const Eigen::Ref<const Eigen::VectorXd>& nu,
                                            double gamma, double delta_theta = 1e-7);

EllipseSlice make_slice(const LinearConstraints& c, const Eigen::VectorXd& x0,
                        const Eigen::VectorXd& nu, double gamma, double delta_theta = 1e-7);

// Same arcs by the interval sweep (see BracketMethod::sweep).
std::vector<AngularBracket> feasible_arcs(const LinearConstraints& c,
                                          const Eigen::Ref<const Eigen::VectorXd>& x0,
                                          const Eigen::Ref<const Eigen::VectorXd>& nu, double gamma);

// Brackets from precomputed projections; used by the chain. Exposed for tests.
std::vector<AngularBracket> brackets_from_projections(const EllipseProjections& proj,
                                                      const Eigen::VectorXd& b, double gamma,
                                                      double delta_theta,
                                                      BracketMethod method = BracketMethod::probe,
                                                      std::vector<TaggedAngle>* sorted_angles = nullptr);

// Index of the sample (by min slack) that starts the next chain, among those
// with min_slack + gamma > 0. Uniform picks draw from Rng(seed).
// Throws InvalidArgument if no sample qualifies.
Eigen::Index choose_handoff(const Eigen::VectorXd& min_slacks, double gamma, Handoff rule,
                            std::uint64_t seed);

// Maps u in [0, total length) onto the bracket set, length-proportionally.
double angle_from_arc_offset(const std::vector<AngularBracket>& brackets, double u);

// Rejection-free elliptical slice sampler on the shifted domain.
//
// Each step draws nu ~ N(0, I), builds the ellipse through the current state,
// intersects it analytically with the constraints and moves to a uniform point
// on the feasible arcs. The constraint slacks of the current state are carried
// forward through the same cos/sin combination as the state itself, so a step
// costs M dot products (A nu) plus sorting. They are recomputed from scratch
// every kRefreshInterval steps to bound drift.
//
// The chain keeps a reference to `c`; the constraints must outlive it.
class LinessChain {
 public:
  static constexpr std::uint64_t kRefreshInterval = 256;

  LinessChain(const LinearConstraints& c, double gamma, Eigen::VectorXd x0, const ChainConfig& cfg);

  void step();
  // n kept states (every cfg.thinning-th step) as columns of a D x n matrix.
  Eigen::MatrixXd sample(Eigen::Index n);

  const Eigen::VectorXd& state() const noexcept { return x_; }
  double gamma() const noexcept { return gamma_; }
  std::uint64_t steps() const noexcept { return steps_; }
  // Count of length-D constraint dot products performed so far.
  std::uint64_t dot_products() const noexcept { return dot_products_; }

 private:
  void refresh_projection();

  const LinearConstraints* c_;
  double gamma_;
  ChainConfig cfg_;
  Rng rng_;
  Eigen::VectorXd x_;
  Eigen::VectorXd ax_;  // A x, carried between steps
  std::uint64_t steps_ = 0;
  std::uint64_t dot_products_ = 0;
};

// Convenience wrapper: a fresh chain seeded from cfg.seed.
Eigen::MatrixXd sample_chain(const LinearConstraints& c, double gamma, Eigen::Index n,
                             const Eigen::VectorXd& x0, const ChainConfig& cfg);

}  // namespace lingauss
