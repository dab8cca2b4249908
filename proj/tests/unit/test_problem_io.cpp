#include <doctest.h>

#include "oracles.hpp"

#include <lingauss/errors.hpp>
#include <lingauss/hdr.hpp>
#include <lingauss/nestings.hpp>
#include <lingauss/problem_io.hpp>

#include <cstring>
#include <string>

using namespace lingauss;

namespace {

std::string parse_error_of(const std::string& text) {
  try {
    parse_problem(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("parse a full problem") {
  const auto p = parse_problem(R"({"dim": 2, "A": [[1, 0], [0.5, -1]], "b": [0, 1.5],
                                   "mean": [1, 2], "cov": [[2, 0.3], [0.3, 1]]})");
  CHECK(p.dim() == 2);
  CHECK(p.constraints.num_constraints() == 2);
  CHECK(p.constraints.a()(1, 0) == 0.5);
  CHECK(p.constraints.b()(1) == 1.5);
  REQUIRE(p.mean);
  CHECK((*p.mean)(1) == 2.0);
  REQUIRE(p.covariance);
  CHECK((*p.covariance)(0, 1) == 0.3);
}

TEST_CASE("mean and covariance are optional") {
  const auto p = parse_problem(R"({"dim": 1, "A": [[1]], "b": [0]})");
  CHECK_FALSE(p.mean.has_value());
  CHECK_FALSE(p.covariance.has_value());
}

TEST_CASE("errors locate the offending field") {
  CHECK(parse_error_of(R"({"dim": 2, "A": [[1, 0], [1]], "b": [0, 0]})").find("A[1]") != std::string::npos);
  CHECK(parse_error_of(R"({"dim": 2, "A": [[1, 0], [1, "x"]], "b": [0, 0]})").find("A[1][1]") != std::string::npos);
  CHECK(parse_error_of(R"({"dim": 2, "A": [[1, 0]], "b": [0, 0]})").find("b") != std::string::npos);
  CHECK(parse_error_of(R"({"dim": 1, "A": [[1e999]], "b": [0]})").find("1e999") != std::string::npos);
  CHECK(parse_error_of(R"({"A": [[1]], "b": [0]})").find("dim") != std::string::npos);
  CHECK(parse_error_of(R"({"dim": 0, "A": [[1]], "b": [0]})").find("dim") != std::string::npos);
  CHECK(parse_error_of(R"({"dim": 2, "A": [[1, 0]], "b": [0], "mean": [1]})").find("mean") != std::string::npos);
  CHECK(parse_error_of(R"({"dim": 2, "A": [[1, 0]], "b": [0], "cov": [[1, 0], [0]]})").find("cov[1]") != std::string::npos);
  CHECK(parse_error_of(R"({"dim": 2, "A": [[0, 0]], "b": [1]})").find("zero") != std::string::npos);
  CHECK(parse_error_of(R"({"dim": 2, "A": [[1, 0]], "b": [0], "cov": [[1, 0.5], [0, 1]]})").find("symmetric") !=
        std::string::npos);
  CHECK_FALSE(parse_error_of("[1, 2]").empty());
}

TEST_CASE("malformed JSON reports the byte offset") {
  const std::string msg = parse_error_of(R"({"dim": 1, "A": [[1]], "b": [0,]})");
  CHECK(msg.find("byte 32") != std::string::npos);
  CHECK(parse_error_of(R"({"dim": 1, "A": [[NaN]], "b": [0]})").find("byte") != std::string::npos);
}

TEST_CASE("problems round-trip") {
  Rng rng(1);
  auto prob = oracle::random_feasible_problem(rng, 4, 6);
  const GaussianProblem p(prob.constraints, rng.normal_vector(4), oracle::random_spd(rng, 4, 0.1, 3.0));
  const auto q = parse_problem(problem_to_json(p));
  CHECK(q.constraints.a() == p.constraints.a());
  CHECK(q.constraints.b() == p.constraints.b());
  CHECK(*q.mean == *p.mean);
  CHECK(*q.covariance == *p.covariance);
  CHECK(problem_to_json(q) == problem_to_json(p));
}

TEST_CASE("shift sequences round-trip") {
  const LinearConstraints c(Eigen::MatrixXd::Identity(5, 5), Eigen::VectorXd::Constant(5, 0.2));
  const auto seq = build_sequence(c, {}, ChainConfig::for_nestings(2));
  const auto back = parse_shift_sequence(shift_sequence_to_json(seq));
  CHECK(back.gammas == seq.gammas);
  CHECK(back.rho_hats == seq.rho_hats);
  CHECK(bit_equal(back.biased_log_z, seq.biased_log_z));
  REQUIRE(back.seeds.size() == seq.seeds.size());
  for (std::size_t i = 0; i < seq.seeds.size(); ++i) CHECK(back.seeds[i] == seq.seeds[i]);
  CHECK(shift_sequence_to_json(back) == shift_sequence_to_json(seq));

  const auto minimal = parse_shift_sequence(R"({"gammas": [2.5, 0.5, 0]})");
  CHECK(minimal.gammas.size() == 3);
  CHECK(minimal.seeds.empty());
  CHECK_THROWS_AS(parse_shift_sequence(R"({"gammas": [0.5, 2.5, 0]})"), ParseError);
  CHECK_THROWS_AS(parse_shift_sequence(R"({"gammas": [0.5, 0.1]})"), ParseError);
  CHECK_THROWS_AS(parse_shift_sequence(R"({"rho_hats": []})"), ParseError);
}

TEST_CASE("estimates round-trip bit-exactly") {
  const LinearConstraints c(Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Constant(3, 0.1));
  const auto e = estimate_log_z(c, {0.7, 0.0}, 100, ChainConfig::for_hdr(derive_seed(5, "x")));
  const auto back = parse_log_z_estimate(log_z_estimate_to_json(e));
  CHECK(back == e);
  CHECK_THROWS_AS(parse_log_z_estimate(R"({"log_z": 1})"), ParseError);
}

TEST_CASE("doubles survive serialization exactly") {
  Rng rng(3);
  std::vector<double> values{0.1, 1.0 / 3.0, 5e-324, 1.7976931348623157e308, -2.2250738585072014e-308};
  for (int i = 0; i < 500; ++i) values.push_back(rng.normal() * std::exp(40.0 * rng.normal()));
  ShiftSequence seq;
  for (double v : values) seq.rho_hats.push_back(v);
  seq.gammas = {0.0};
  const auto back = parse_shift_sequence(shift_sequence_to_json(seq));
  REQUIRE(back.rho_hats.size() == values.size());
  for (std::size_t i = 0; i < values.size(); ++i) CHECK(bit_equal(back.rho_hats[i], values[i]));
}

TEST_CASE("content fingerprint") {
  CHECK(content_fingerprint("") == "cbf29ce484222325");
  CHECK(content_fingerprint("a") == "af63dc4c8601ec8c");
  CHECK(content_fingerprint("abc") != content_fingerprint("abd"));
  CHECK_THROWS_AS(read_text_file("/nonexistent/problem.json"), ParseError);
}
