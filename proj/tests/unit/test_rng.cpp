#include <doctest.h>

#include <lingauss/rng.hpp>

#include <cmath>
#include <set>

using lingauss::Rng;

TEST_CASE("same seed gives the same stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
  Rng c(43);
  CHECK(Rng(42).uniform() != c.uniform());
}

TEST_CASE("split streams depend only on seed, label and index") {
  Rng parent(7);
  const double before = parent.split("level", 3).uniform();
  parent.normal();
  parent.uniform();
  CHECK(parent.split("level", 3).uniform() == before);
  CHECK(parent.split("level", 4).uniform() != before);
  CHECK(parent.split("chain", 3).uniform() != before);
  CHECK(lingauss::derive_seed(7, "level", 3) == Rng(7).split("level", 3).seed());
}

TEST_CASE("derived seeds do not collide over a small grid") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 20; ++s)
    for (std::uint64_t i = 0; i < 50; ++i) seen.insert(lingauss::derive_seed(s, "hdr-run", i));
  CHECK(seen.size() == 1000);
}

TEST_CASE("uniform draws lie in [0, 1) and normals have unit moments") {
  Rng rng(1);
  double s1 = 0, s2 = 0, s4 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const double z = rng.normal();
    s1 += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  CHECK(std::abs(s1 / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(s2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(s4 / n - 3.0) < 4.0 * std::sqrt(96.0 / n));
}

TEST_CASE("normal_matrix fills column by column") {
  Rng a(5), b(5);
  const Eigen::MatrixXd m = a.normal_matrix(3, 4);
  for (Eigen::Index j = 0; j < 4; ++j)
    for (Eigen::Index i = 0; i < 3; ++i) CHECK(m(i, j) == b.normal());
}
