#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string_view>

namespace lingauss {

// 64-bit seeded generator with labelled stream splitting.
//
// Streams derived with split(label, index) depend only on (seed, label,
// index), so adding a consumer never perturbs another stream. Normals come
// from Box-Muller on 53-bit uniforms rather than std::normal_distribution, so
// draws are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  Rng split(std::string_view label, std::uint64_t index = 0) const;

  // Uniform on [0, 1).
  double uniform();
  double normal();
  Eigen::VectorXd normal_vector(Eigen::Index dim);
  // D x n matrix of iid standard normals, filled column by column.
  Eigen::MatrixXd normal_matrix(Eigen::Index dim, Eigen::Index n);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Seed for the stream (seed, label, index); Rng::split uses this.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label,
                          std::uint64_t index = 0) noexcept;

}  // namespace lingauss
