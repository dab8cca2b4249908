#include <doctest.h>

#include "oracles.hpp"

#include <lingauss/errors.hpp>
#include <lingauss/hdr.hpp>
#include <lingauss/nestings.hpp>

#include <cmath>
#include <numbers>

using namespace lingauss;

namespace {

LinearConstraints orthant(Eigen::Index d, double b) {
  return LinearConstraints(Eigen::MatrixXd::Identity(d, d), Eigen::VectorXd::Constant(d, b));
}

std::vector<double> gammas_for(const LinearConstraints& c, std::uint64_t seed) {
  return build_sequence(c, {}, ChainConfig::for_nestings(seed)).gammas;
}

}  // namespace

TEST_CASE("vacuous domain has unit mass") {
  const auto c = orthant(2, 1e6);
  const auto e = estimate_log_z(c, {0.0}, 256, ChainConfig::for_hdr(1));
  CHECK(e.log_z == 0.0);
  CHECK(e.log2_z == 0.0);
  REQUIRE(e.counts.size() == 1);
  CHECK(e.counts[0] == LevelCount{256, 256});
}

TEST_CASE("estimate internals are consistent") {
  const auto c = orthant(6, 0.2);
  const auto g = gammas_for(c, 2);
  const auto e = estimate_log_z(c, g, 300, ChainConfig::for_hdr(3));
  REQUIRE(e.log_rho_hats.size() == g.size());
  REQUIRE(e.counts.size() == g.size());
  double sum = 0.0;
  for (std::size_t t = 0; t < g.size(); ++t) {
    CHECK(e.counts[t].total == 300);
    CHECK(e.counts[t].inside >= 1);
    CHECK(e.counts[t].inside <= 300);
    CHECK(e.log_rho_hats[t] <= 0.0);
    CHECK(e.log_rho_hats[t] == std::log(double(e.counts[t].inside)) - std::log(300.0));
    sum += e.log_rho_hats[t];
  }
  CHECK(e.log_z == sum);
  CHECK(e.log2_z == doctest::Approx(sum / std::numbers::ln2));
  CHECK(e.samples_per_level == 300);
  CHECK(e.seed == 3);
  CHECK(e.thinning == 2);
  CHECK(e.sequence_fingerprint == fingerprint_gammas(g));
}

TEST_CASE("fingerprint distinguishes sequences") {
  CHECK(fingerprint_gammas({1.0, 0.0}) == fingerprint_gammas({1.0, 0.0}));
  CHECK(fingerprint_gammas({1.0, 0.0}) != fingerprint_gammas({1.0 + 1e-15, 0.0}));
  CHECK(fingerprint_gammas({1.0, 0.0}).size() == 16);
}

TEST_CASE("half-space x > 3 within 20% of log Phi(-3)") {
  const LinearConstraints c(Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Constant(1, -3.0));
  const auto g = gammas_for(c, 4);
  const auto e = estimate_log_z(c, g, 1024, ChainConfig::for_hdr(5));
  const double truth = std::log(oracle::normal_cdf(-3.0));
  CHECK(truth == doctest::Approx(-6.60772622151035));
  CHECK(std::abs(e.log_z - truth) <= 0.2 * std::abs(truth));
}

TEST_CASE("repeated runs on x > 1") {
  const LinearConstraints c(Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Constant(1, -1.0));
  const auto g = gammas_for(c, 6);
  const auto r = estimate_log_z_repeated(c, g, 1024, ChainConfig::for_hdr(7), 10, 2);
  REQUIRE(r.per_run.size() == 10);
  CHECK(r.excluded == 0);
  CHECK(r.failures.empty());
  REQUIRE(r.stddev_log2_z.has_value());
  const double truth = std::log2(oracle::normal_cdf(-1.0));
  CHECK(truth == doctest::Approx(-2.656).epsilon(1e-3));
  CHECK(std::abs(r.mean_log2_z - truth) <= 0.2);

  std::vector<double> l2;
  for (const auto& run : r.per_run) l2.push_back(run->log2_z);
  CHECK(r.mean_log2_z == doctest::Approx(oracle::mean(l2)));
  CHECK(*r.stddev_log2_z == doctest::Approx(oracle::sample_stddev(l2)));
}

TEST_CASE("single repeat has no standard deviation") {
  const auto c = orthant(2, 0.0);
  const auto r = estimate_log_z_repeated(c, {0.0}, 64, ChainConfig::for_hdr(1), 1);
  CHECK_FALSE(r.stddev_log2_z.has_value());
  CHECK(r.per_run.size() == 1);
}

TEST_CASE("repeats are independent of thread count and of the repeat count") {
  const auto c = orthant(8, 0.3);
  const auto g = gammas_for(c, 8);
  const auto one = estimate_log_z_repeated(c, g, 128, ChainConfig::for_hdr(9), 5, 1);
  const auto three = estimate_log_z_repeated(c, g, 128, ChainConfig::for_hdr(9), 5, 3);
  const auto more = estimate_log_z_repeated(c, g, 128, ChainConfig::for_hdr(9), 7, 4);
  for (std::size_t r = 0; r < 5; ++r) {
    CHECK(*one.per_run[r] == *three.per_run[r]);
    CHECK(*one.per_run[r] == *more.per_run[r]);
  }
  CHECK(one.mean_log2_z == three.mean_log2_z);
  CHECK(one.per_run[0]->seed == derive_seed(9, "hdr-run", 0));
  CHECK_THROWS_AS(estimate_log_z_repeated(c, g, 128, ChainConfig::for_hdr(9), 0), InvalidArgument);
}

TEST_CASE("a bad sequence raises ZeroCountError naming the level") {
  // Jumping from gamma = 6 straight to 0 in 40 dimensions leaves nothing inside.
  const auto c = orthant(40, 0.0);
  try {
    estimate_log_z(c, {6.0, 0.0}, 64, ChainConfig::for_hdr(1));
    FAIL("expected ZeroCountError");
  } catch (const ZeroCountError& e) {
    CHECK(e.level() == 2);
    CHECK(std::string(e.what()).find("level") != std::string::npos);
  }
  // With every run failing the repeated estimate has nothing to report.
  CHECK_THROWS_AS(estimate_log_z_repeated(c, {6.0, 0.0}, 64, ChainConfig::for_hdr(1), 3), NumericalError);
}

TEST_CASE("failed repeats are excluded and counted") {
  // The last level's conditional mass is about 1e-3, so most runs of 256 find nothing.
  const auto c = orthant(10, 0.0);
  const auto r = estimate_log_z_repeated(c, {2.5, 0.0}, 256, ChainConfig::for_hdr(3), 20, 2);
  std::size_t ok = 0;
  for (const auto& run : r.per_run) ok += run.has_value();
  CHECK(r.excluded == 20 - ok);
  CHECK(r.failures.size() == r.excluded);
  CHECK(r.excluded >= 1);
  CHECK(ok >= 1);
}

TEST_CASE("bad arguments") {
  const auto c = orthant(2, 0.0);
  CHECK_THROWS_AS(estimate_log_z(c, {0.0}, 1, ChainConfig::for_hdr(1)), InvalidArgument);
  CHECK_THROWS_AS(estimate_log_z(c, {1.0, 2.0, 0.0}, 16, ChainConfig::for_hdr(1)), InvalidArgument);
  CHECK_THROWS_AS(estimate_log_z(c, {1.0}, 16, ChainConfig::for_hdr(1)), InvalidArgument);
}

TEST_CASE("deterministic given the seed") {
  const auto c = orthant(12, 0.4);
  const auto g = gammas_for(c, 10);
  CHECK(estimate_log_z(c, g, 200, ChainConfig::for_hdr(11)) == estimate_log_z(c, g, 200, ChainConfig::for_hdr(11)));
  CHECK_FALSE(estimate_log_z(c, g, 200, ChainConfig::for_hdr(11)) == estimate_log_z(c, g, 200, ChainConfig::for_hdr(12)));
}

TEST_CASE("error shrinks as the sample count grows") {
  const auto c = orthant(20, 0.5);
  const double truth = 20.0 * std::log2(oracle::normal_cdf(0.5));
  std::vector<double> err_small, err_large;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = gammas_for(c, 100 + seed);
    err_small.push_back(std::abs(estimate_log_z(c, g, 32, ChainConfig::for_hdr(seed)).log2_z - truth));
    err_large.push_back(std::abs(estimate_log_z(c, g, 2048, ChainConfig::for_hdr(seed)).log2_z - truth));
  }
  CHECK(oracle::mean(err_large) < oracle::mean(err_small));
  CHECK(oracle::mean(err_large) < 0.5);
}

TEST_CASE("log-space accumulation survives Z far below the double range of products" * doctest::timeout(600)) {
  // 1000-d orthant with b = 1: log2 Z = 1000 log2 Phi(1), about -249.
  const auto c = orthant(1000, 1.0);
  const auto g = gammas_for(c, 1);
  const auto e = estimate_log_z(c, g, 128, ChainConfig::for_hdr(2));
  const double truth = 1000.0 * std::log2(oracle::normal_cdf(1.0));
  CHECK(std::isfinite(e.log2_z));
  CHECK(e.log2_z < -200.0);
  CHECK(std::exp2(e.log2_z) > 0.0);
  CHECK(std::abs(e.log2_z - truth) < 0.2 * std::abs(truth));
  for (double l : e.log_rho_hats) CHECK(std::isfinite(l));
}
