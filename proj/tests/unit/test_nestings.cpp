#include <doctest.h>

#include "oracles.hpp"

#include <lingauss/errors.hpp>
#include <lingauss/nestings.hpp>

#include <cmath>
#include <numbers>

using namespace lingauss;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

LinearConstraints orthant(Eigen::Index d, double b) {
  return LinearConstraints(Eigen::MatrixXd::Identity(d, d), Eigen::VectorXd::Constant(d, b));
}

void check_sequence(const LinearConstraints& c, const ShiftSequence& seq) {
  REQUIRE(seq.size() >= 1);
  CHECK(seq.gammas.back() == 0.0);
  CHECK(seq.rho_hats.size() == seq.size());
  CHECK(seq.seeds.size() == seq.size());
  double log_z = 0.0;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    if (t + 1 < seq.size()) CHECK(seq.gammas[t] > seq.gammas[t + 1]);
    CHECK(seq.rho_hats[t] > 0.0);
    CHECK(seq.rho_hats[t] <= 1.0);
    CHECK(c.min_slack(seq.seeds[t]) + seq.gammas[t] > 0.0);
    log_z += std::log(seq.rho_hats[t]);
  }
  CHECK(seq.biased_log_z == doctest::Approx(log_z));
  CHECK(seq.biased_log2_z() == doctest::Approx(seq.biased_log_z / std::numbers::ln2));
  CHECK_NOTHROW(validate_gammas(seq.gammas));
}

}  // namespace

TEST_CASE("find_shift hand example") {
  const auto s = find_shift_from_slacks(0.5, vec({-0.5, -1.5, 0.2, -2.0}));
  CHECK(s.gamma == doctest::Approx(1.0));
  CHECK(s.rho_hat == 0.5);
}

TEST_CASE("find_shift reports a negative shift when the domain is reached") {
  const auto s = find_shift_from_slacks(0.5, vec({0.5, -0.3, -1.2, 0.8}));
  CHECK(s.gamma == doctest::Approx(-0.1));
  CHECK(s.gamma <= 0.0);
}

TEST_CASE("find_shift with all samples deep inside") {
  Rng rng(1);
  for (int k = 0; k < 50; ++k) {
    Eigen::VectorXd slacks(10);
    for (Eigen::Index i = 0; i < 10; ++i) slacks(i) = 0.01 + rng.uniform();
    CHECK(find_shift_from_slacks(0.5, slacks).gamma < 0.0);
  }
}

TEST_CASE("find_shift on samples matches the slack version") {
  Rng rng(2);
  auto prob = oracle::random_feasible_problem(rng, 3, 4);
  const Eigen::MatrixXd x = rng.normal_matrix(3, 21) * 3.0;
  const auto a = find_shift(0.3, x, prob.constraints);
  const auto b = find_shift_from_slacks(0.3, prob.constraints.min_slacks(x));
  CHECK(a.gamma == b.gamma);
  CHECK(a.rho_hat == b.rho_hat);
  // floor(0.3 * 21) = 6 samples inside.
  CHECK(a.rho_hat == doctest::Approx(6.0 / 21.0));
}

TEST_CASE("exactly floor(rho N) samples fall inside without ties") {
  Rng rng(3);
  for (double rho : {0.1, 0.25, 0.5, 0.7}) {
    for (Eigen::Index n : {4, 7, 16, 33}) {
      if (static_cast<Eigen::Index>(std::floor(rho * n)) < 1) continue;
      Eigen::VectorXd slacks(n);
      for (Eigen::Index i = 0; i < n; ++i) slacks(i) = rng.normal();
      const auto s = find_shift_from_slacks(rho, slacks);
      Eigen::Index inside = 0;
      for (Eigen::Index i = 0; i < n; ++i) inside += slacks(i) + s.gamma > 0.0;
      CHECK(inside == static_cast<Eigen::Index>(std::floor(rho * n)));
      CHECK(s.rho_hat == doctest::Approx(double(inside) / double(n)));
    }
  }
}

TEST_CASE("find_shift errors") {
  CHECK_THROWS_AS(find_shift_from_slacks(0.5, vec({1.0})), InvalidArgument);
  CHECK_THROWS_AS(find_shift_from_slacks(0.0, vec({1.0, 2.0})), InvalidArgument);
  CHECK_THROWS_AS(find_shift_from_slacks(1.0, vec({1.0, 2.0})), InvalidArgument);
  CHECK_THROWS_AS(find_shift_from_slacks(0.2, vec({1.0, 2.0, 3.0})), InvalidArgument);  // floor(0.6) = 0
  CHECK_THROWS_AS(find_shift_from_slacks(0.5, vec({-1.0, -1.0, -1.0, -1.0})), StallError);
}

TEST_CASE("ties give the realized fraction") {
  // Needed shifts {0.5, 1, 1, 1}: the order statistics tie at 1 and only the
  // sample strictly below the tie is inside.
  const auto s = find_shift_from_slacks(0.5, vec({-1.0, -1.0, -1.0, -0.5}));
  CHECK(s.gamma == 1.0);
  CHECK(s.rho_hat == 0.25);
}

TEST_CASE("half-mass domain needs few nestings") {
  // The first shift is the sample median of -x, so it is <= 0 about half the time.
  const auto c = orthant(1, 0.0);
  int single = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto seq = build_sequence(c, {}, ChainConfig::for_nestings(seed));
    check_sequence(c, seq);
    CHECK(seq.size() <= 5);
    single += seq.size() == 1;
  }
  CHECK(single >= 10);
  CHECK(single <= 30);
}

TEST_CASE("a domain holding most of the mass needs no nesting") {
  const auto c = orthant(1, 1.0);  // x > -1, mass 0.84
  int single = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) single += build_sequence(c, {}, ChainConfig::for_nestings(seed)).size() == 1;
  CHECK(single >= 38);
}

TEST_CASE("rare half-space builds a valid sequence") {
  const auto c = orthant(1, -4.0);  // x > 4
  const auto seq = build_sequence(c, {}, ChainConfig::for_nestings(7));
  check_sequence(c, seq);
  const double truth = std::log2(oracle::normal_cdf(-4.0));
  CHECK(std::abs(double(seq.size()) + seq.biased_log2_z()) <= 2.0);
  CHECK(std::abs(seq.biased_log2_z() - truth) < 6.0);
}

TEST_CASE("T tracks -log2 Z_ss on moderate orthants") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto c = orthant(40, 1.0);
    const auto seq = build_sequence(c, {}, ChainConfig::for_nestings(seed));
    check_sequence(c, seq);
    CHECK(std::abs(double(seq.size()) + seq.biased_log2_z()) <= 2.0);
    const double truth = 40.0 * std::log2(oracle::normal_cdf(1.0));
    CHECK(std::abs(seq.biased_log2_z() - truth) < 4.0);
  }
}

TEST_CASE("non-default rho and sample count") {
  const auto c = orthant(10, 0.5);
  SubsetSimulationOptions opts;
  opts.n_per_level = 30;
  opts.rho = 0.2;
  const auto seq = build_sequence(c, opts, ChainConfig::for_nestings(3));
  check_sequence(c, seq);
  for (std::size_t t = 0; t + 1 < seq.size(); ++t) CHECK(seq.rho_hats[t] == doctest::Approx(0.2));
}

TEST_CASE("build_sequence is deterministic") {
  const auto c = orthant(15, 0.3);
  const auto a = build_sequence(c, {}, ChainConfig::for_nestings(11));
  const auto b = build_sequence(c, {}, ChainConfig::for_nestings(11));
  CHECK(a.gammas == b.gammas);
  CHECK(a.rho_hats == b.rho_hats);
  CHECK(a.biased_log_z == b.biased_log_z);
}

TEST_CASE("build_sequence errors") {
  const auto c = orthant(2, 0.0);
  SubsetSimulationOptions opts;
  opts.n_per_level = 1;
  CHECK_THROWS_AS(build_sequence(c, opts, ChainConfig::for_nestings(0)), InvalidArgument);

  // An empty domain stalls: x > 1 and x < -1.
  Eigen::MatrixXd a(2, 1);
  a << 1, -1;
  const LinearConstraints empty(a, Eigen::VectorXd::Constant(2, -1.0));
  CHECK_THROWS_AS(build_sequence(empty, {}, ChainConfig::for_nestings(0)), StallError);

  opts.n_per_level = 16;
  opts.max_levels = 3;
  CHECK_THROWS_AS(build_sequence(orthant(30, 1.0), opts, ChainConfig::for_nestings(0)), StallError);
}

TEST_CASE("validate_gammas") {
  CHECK_NOTHROW(validate_gammas({0.0}));
  CHECK_NOTHROW(validate_gammas({3.0, 1.0, 0.0}));
  CHECK_THROWS_AS(validate_gammas({}), InvalidArgument);
  CHECK_THROWS_AS(validate_gammas({1.0, 2.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(validate_gammas({1.0, 1.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(validate_gammas({1.0, 0.5}), InvalidArgument);
  CHECK_THROWS_AS(validate_gammas({INFINITY, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(validate_gammas({1.0, -0.5, 0.0}), InvalidArgument);
}
