#include "lingauss/liness.hpp"

#include "lingauss/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lingauss {

namespace {

constexpr double kTangentTolerance = 1e-12;

double wrap_angle(double t) {
  t = std::fmod(t, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi) t = 0.0;
  return t;
}

// Indicator of the shifted domain at angle theta on the ellipse.
bool inside_at(const EllipseProjections& p, const Eigen::VectorXd& b, double gamma, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  for (Eigen::Index m = 0; m < b.size(); ++m) {
    if (!(p.g0[m] * c + p.g1[m] * s + b[m] + gamma > 0.0)) return false;
  }
  return true;
}

AngularBracket make_bracket(double start, double end) {
  return {wrap_angle(start), wrap_angle(end)};
}

std::vector<AngularBracket> full_circle() { return {{0.0, kTwoPi}}; }

bool brackets_contain_zero(const std::vector<AngularBracket>& brackets) {
  return std::any_of(brackets.begin(), brackets.end(),
                     [](const AngularBracket& b) { return b.contains(0.0); });
}

// Classifies every arc between consecutive sorted roots by its midpoint and
// merges inside arcs. Exact whenever roots are distinct.
std::vector<AngularBracket> brackets_by_midpoints(const EllipseProjections& p,
                                                  const Eigen::VectorXd& b, double gamma,
                                                  const std::vector<TaggedAngle>& angles) {
  const std::size_t k = angles.size();
  std::vector<double> seg_start(k), seg_len(k);
  std::vector<char> seg_in(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double lo = angles[i].theta;
    const double hi = i + 1 < k ? angles[i + 1].theta : angles[0].theta + kTwoPi;
    seg_start[i] = lo;
    seg_len[i] = hi - lo;
    seg_in[i] = seg_len[i] > 0.0 && inside_at(p, b, gamma, wrap_angle(lo + 0.5 * seg_len[i]));
  }

  // Start the sweep just after an outside arc so no run is split at the seam.
  std::size_t first_out = k;
  for (std::size_t i = 0; i < k; ++i) {
    if (seg_len[i] > 0.0 && !seg_in[i]) {
      first_out = i;
      break;
    }
  }
  if (first_out == k) return full_circle();

  std::vector<AngularBracket> out;
  bool in_run = false;
  double run_start = 0.0;
  double run_end = 0.0;
  for (std::size_t step = 1; step <= k; ++step) {
    const std::size_t i = (first_out + step) % k;
    if (seg_len[i] == 0.0) continue;  // coincident roots do not end a run
    if (seg_in[i]) {
      if (!in_run) {
        in_run = true;
        run_start = seg_start[i];
      }
      run_end = seg_start[i] + seg_len[i];
    } else if (in_run) {
      out.push_back(make_bracket(run_start, run_end));
      in_run = false;
    }
  }
  if (in_run) out.push_back(make_bracket(run_start, run_end));
  return out;
}

// Keeps only angles where the indicator jumps between theta - delta and
// theta + delta, then pairs each switch-on with the following switch-off.
// Returns nothing if the jump pattern is inconsistent.
std::optional<std::vector<AngularBracket>> brackets_by_jumps(const EllipseProjections& p,
                                                             const Eigen::VectorXd& b,
                                                             double gamma, double delta,
                                                             const std::vector<TaggedAngle>& angles) {
  struct Switch {
    double theta;
    bool on;
  };
  std::vector<Switch> active;
  for (const auto& a : angles) {
    const bool before = inside_at(p, b, gamma, wrap_angle(a.theta - delta));
    const bool after = inside_at(p, b, gamma, wrap_angle(a.theta + delta));
    if (before != after) active.push_back({a.theta, after});
  }
  if (active.empty()) return full_circle();
  if (active.size() % 2 != 0) return std::nullopt;
  for (std::size_t i = 0; i < active.size(); ++i) {
    if (active[i].on == active[(i + 1) % active.size()].on) return std::nullopt;
  }
  std::vector<AngularBracket> out;
  for (std::size_t i = 0; i < active.size(); ++i) {
    if (active[i].on) out.push_back(make_bracket(active[i].theta, active[(i + 1) % active.size()].theta));
  }
  return out;
}

// Each crossing constraint is negative on the open arc (phase + h, phase - h + 2pi).
// With theta = 0 feasible none of these arcs wraps, so the bracket set is the
// complement in [0, 2pi) of their union. Returns nothing if some arc wraps,
// i.e. the base point sits on a boundary to rounding.
std::optional<std::vector<AngularBracket>> brackets_by_sweep(const std::vector<ConstraintCrossing>& xs) {
  if (xs.empty()) return full_circle();
  std::vector<std::pair<double, double>> blocked;
  blocked.reserve(xs.size());
  for (const auto& x : xs) {
    if (!(x.theta1 < x.theta2)) return std::nullopt;
    blocked.emplace_back(x.theta1, x.theta2);
  }
  std::sort(blocked.begin(), blocked.end());

  std::vector<AngularBracket> out;
  double first_start = blocked.front().first;
  double cur_end = blocked.front().second;
  for (std::size_t i = 1; i < blocked.size(); ++i) {
    if (blocked[i].first > cur_end) {
      out.push_back({cur_end, blocked[i].first});
      cur_end = blocked[i].second;
    } else {
      cur_end = std::max(cur_end, blocked[i].second);
    }
  }
  out.push_back({cur_end, first_start});  // wraps through 2pi, contains 0
  return out;
}

}  // namespace

void ChainConfig::validate() const {
  if (thinning < 1) throw InvalidArgument("chain config: thinning must be >= 1");
  if (!(delta_theta > 0.0 && delta_theta < 1e-3)) {
    throw InvalidArgument("chain config: delta_theta must lie in (0, 1e-3)");
  }
}

Eigen::Index choose_handoff(const Eigen::VectorXd& min_slacks, double gamma, Handoff rule,
                            std::uint64_t seed) {
  std::vector<Eigen::Index> inside;
  for (Eigen::Index i = 0; i < min_slacks.size(); ++i) {
    if (min_slacks[i] + gamma > 0.0) inside.push_back(i);
  }
  if (inside.empty()) throw InvalidArgument("handoff: no sample lies inside the domain");
  if (rule == Handoff::deepest) {
    Eigen::Index best = inside.front();
    for (Eigen::Index i : inside) {
      if (min_slacks[i] > min_slacks[best]) best = i;
    }
    return best;
  }
  Rng rng(seed);
  const auto k = static_cast<std::size_t>(rng.uniform() * static_cast<double>(inside.size()));
  return inside[std::min(k, inside.size() - 1)];
}

bool AngularBracket::contains(double theta) const noexcept {
  if (end >= start) return theta >= start && theta < end;
  return theta >= start || theta < end;
}

double AngularBracket::at(double offset) const noexcept { return wrap_angle(start + offset); }

double EllipseSlice::total_length() const noexcept {
  double total = 0.0;
  for (const auto& b : brackets) total += b.length();
  return total;
}

EllipseProjections project_ellipse(const LinearConstraints& c,
                                   const Eigen::Ref<const Eigen::VectorXd>& x0,
                                   const Eigen::Ref<const Eigen::VectorXd>& nu) {
  if (x0.size() != c.dim() || nu.size() != c.dim()) {
    throw InvalidArgument("liness: ellipse vectors must have dimension " + std::to_string(c.dim()));
  }
  return {c.a() * x0, c.a() * nu};
}

std::vector<ConstraintCrossing> intersection_angles(const EllipseProjections& proj,
                                                    const Eigen::VectorXd& b, double gamma) {
  std::vector<ConstraintCrossing> out;
  for (Eigen::Index m = 0; m < b.size(); ++m) {
    const double g0 = proj.g0[m];
    const double g1 = proj.g1[m];
    const double offset = b[m] + gamma;
    const double r = std::hypot(g0, g1);
    if (r == 0.0) continue;
    if (std::abs(offset) >= r * (1.0 - kTangentTolerance)) continue;
    // g0 cos t + g1 sin t = r cos(t - phase)
    const double phase = std::atan2(g1, g0);
    const double half_width = std::acos(-offset / r);
    out.push_back({m, wrap_angle(phase + half_width), wrap_angle(phase - half_width)});
  }
  return out;
}

std::vector<ConstraintCrossing> intersection_angles(const LinearConstraints& c,
                                                    const Eigen::Ref<const Eigen::VectorXd>& x0,
                                                    const Eigen::Ref<const Eigen::VectorXd>& nu,
                                                    double gamma) {
  return intersection_angles(project_ellipse(c, x0, nu), c.b(), gamma);
}

std::vector<AngularBracket> brackets_from_projections(const EllipseProjections& proj,
                                                      const Eigen::VectorXd& b, double gamma,
                                                      double delta_theta, BracketMethod method,
                                                      std::vector<TaggedAngle>* sorted_angles) {
  const auto crossings = intersection_angles(proj, b, gamma);
  if (method == BracketMethod::sweep && !sorted_angles) {
    if (auto swept = brackets_by_sweep(crossings)) return std::move(*swept);
  }

  std::vector<TaggedAngle> angles;
  angles.reserve(2 * crossings.size());
  for (const auto& x : crossings) {
    angles.push_back({x.theta1, x.constraint});
    angles.push_back({x.theta2, x.constraint});
  }
  std::sort(angles.begin(), angles.end(),
            [](const TaggedAngle& l, const TaggedAngle& r) { return l.theta < r.theta; });
  if (sorted_angles) *sorted_angles = angles;
  if (angles.empty()) return full_circle();

  if (method == BracketMethod::sweep) {
    if (auto swept = brackets_by_sweep(crossings)) return std::move(*swept);
    return brackets_by_midpoints(proj, b, gamma, angles);
  }

  bool crowded = false;
  for (std::size_t i = 0; i < angles.size() && !crowded; ++i) {
    const double next = i + 1 < angles.size() ? angles[i + 1].theta : angles[0].theta + kTwoPi;
    crowded = next - angles[i].theta < 2.0 * delta_theta;
  }

  std::vector<AngularBracket> out;
  if (!crowded) {
    if (auto jumps = brackets_by_jumps(proj, b, gamma, delta_theta, angles)) out = std::move(*jumps);
  }
  if (out.empty() || !brackets_contain_zero(out)) {
    out = brackets_by_midpoints(proj, b, gamma, angles);
  }
  std::sort(out.begin(), out.end(),
            [](const AngularBracket& l, const AngularBracket& r) { return l.start < r.start; });
  return out;
}

std::vector<AngularBracket> active_brackets(const LinearConstraints& c,
                                            const Eigen::Ref<const Eigen::VectorXd>& x0,
                                            const Eigen::Ref<const Eigen::VectorXd>& nu,
                                            double gamma, double delta_theta) {
  const auto proj = project_ellipse(c, x0, nu);
  if (!((proj.g0 + c.b()).minCoeff() + gamma > 0.0)) {
    throw ContractViolation("liness: ellipse base point lies outside the shifted domain");
  }
  return brackets_from_projections(proj, c.b(), gamma, delta_theta, BracketMethod::probe);
}

std::vector<AngularBracket> feasible_arcs(const LinearConstraints& c,
                                          const Eigen::Ref<const Eigen::VectorXd>& x0,
                                          const Eigen::Ref<const Eigen::VectorXd>& nu, double gamma) {
  const auto proj = project_ellipse(c, x0, nu);
  if (!((proj.g0 + c.b()).minCoeff() + gamma > 0.0)) {
    throw ContractViolation("liness: ellipse base point lies outside the shifted domain");
  }
  return brackets_from_projections(proj, c.b(), gamma, 1e-7, BracketMethod::sweep);
}

EllipseSlice make_slice(const LinearConstraints& c, const Eigen::VectorXd& x0,
                        const Eigen::VectorXd& nu, double gamma, double delta_theta) {
  const auto proj = project_ellipse(c, x0, nu);
  if (!((proj.g0 + c.b()).minCoeff() + gamma > 0.0)) {
    throw ContractViolation("liness: ellipse base point lies outside the shifted domain");
  }
  EllipseSlice slice{x0, nu, {}, {}};
  slice.brackets =
      brackets_from_projections(proj, c.b(), gamma, delta_theta, BracketMethod::probe, &slice.intersections);
  return slice;
}

double angle_from_arc_offset(const std::vector<AngularBracket>& brackets, double u) {
  for (const auto& b : brackets) {
    const double len = b.length();
    if (u < len) return b.at(u);
    u -= len;
  }
  // Only reachable through rounding at the very end of the last arc.
  return brackets.empty() ? 0.0 : brackets.back().midpoint();
}

LinessChain::LinessChain(const LinearConstraints& c, double gamma, Eigen::VectorXd x0,
                         const ChainConfig& cfg)
    : c_(&c), gamma_(gamma), cfg_(cfg), rng_(cfg.seed), x_(std::move(x0)) {
  cfg_.validate();
  if (!(gamma_ >= 0.0) || !std::isfinite(gamma_)) {
    throw InvalidArgument("liness: shift must be finite and non-negative");
  }
  if (x_.size() != c.dim()) {
    throw InvalidArgument("liness: initial state has dimension " + std::to_string(x_.size()) +
                          ", expected " + std::to_string(c.dim()));
  }
  if (!x_.allFinite()) throw InvalidArgument("liness: initial state is not finite");
  refresh_projection();
  if (!((ax_ + c.b()).minCoeff() + gamma_ > 0.0)) {
    throw ContractViolation("liness: initial state lies outside the shifted domain");
  }
}

void LinessChain::refresh_projection() {
  ax_ = c_->a() * x_;
  dot_products_ += static_cast<std::uint64_t>(c_->num_constraints());
}

void LinessChain::step() {
  const Eigen::VectorXd nu = rng_.normal_vector(x_.size());
  EllipseProjections proj{ax_, c_->a() * nu};
  dot_products_ += static_cast<std::uint64_t>(c_->num_constraints());

  const auto brackets = brackets_from_projections(proj, c_->b(), gamma_, cfg_.delta_theta, cfg_.method);
  double total = 0.0;
  for (const auto& b : brackets) total += b.length();
  if (!(total > 0.0)) {
    // The feasible arc around the current state is below rounding; stay put.
    ++steps_;
    if (steps_ % kRefreshInterval == 0) refresh_projection();
    return;
  }

  // The arc is exact; a redraw only guards against a point rounding onto the boundary.
  for (int attempt = 0; attempt < 16; ++attempt) {
    const double theta = angle_from_arc_offset(brackets, rng_.uniform() * total);
    const double cs = std::cos(theta);
    const double sn = std::sin(theta);
    Eigen::VectorXd ax = proj.g0 * cs + proj.g1 * sn;
    if ((ax + c_->b()).minCoeff() + gamma_ > 0.0) {
      x_ = x_ * cs + nu * sn;
      ax_ = std::move(ax);
      break;
    }
  }
  ++steps_;
  if (steps_ % kRefreshInterval == 0) refresh_projection();
}

Eigen::MatrixXd LinessChain::sample(Eigen::Index n) {
  Eigen::MatrixXd out(x_.size(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (std::uint32_t k = 0; k < cfg_.thinning; ++k) step();
    out.col(j) = x_;
  }
  return out;
}

Eigen::MatrixXd sample_chain(const LinearConstraints& c, double gamma, Eigen::Index n,
                             const Eigen::VectorXd& x0, const ChainConfig& cfg) {
  LinessChain chain(c, gamma, x0, cfg);
  return chain.sample(n);
}

}  // namespace lingauss
