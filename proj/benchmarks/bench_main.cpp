#include <lingauss/lingauss.hpp>

#include <benchmark/benchmark.h>

using namespace lingauss;

namespace {

LinearConstraints orthant(Eigen::Index d, double b) {
  return LinearConstraints(Eigen::MatrixXd::Identity(d, d), Eigen::VectorXd::Constant(d, b));
}

// Dense random constraints with the origin strictly inside.
LinearConstraints dense(Eigen::Index d, Eigen::Index m) {
  Rng rng(1);
  return LinearConstraints(rng.normal_matrix(m, d), Eigen::VectorXd::Constant(m, 2.0));
}

void BM_LinessStep(benchmark::State& state, BracketMethod method) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  const auto c = dense(d, d);
  LinessChain chain(c, 0.0, Eigen::VectorXd::Zero(d), ChainConfig{1, 1e-7, 3, method});
  for (auto _ : state) {
    chain.step();
    benchmark::DoNotOptimize(chain.state().data());
  }
  state.counters["dots/step"] = benchmark::Counter(static_cast<double>(chain.dot_products()) / static_cast<double>(chain.steps() + 1));
}

void BM_LinessStepSweep(benchmark::State& state) { BM_LinessStep(state, BracketMethod::sweep); }
void BM_LinessStepProbe(benchmark::State& state) { BM_LinessStep(state, BracketMethod::probe); }

void BM_FindShift(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const auto c = orthant(100, 1.0);
  const Eigen::MatrixXd x = Rng(2).normal_matrix(100, n);
  for (auto _ : state) benchmark::DoNotOptimize(find_shift(0.5, x, c));
}

void BM_BuildSequence(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  const auto c = orthant(d, 1.0);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(build_sequence(c, {}, ChainConfig::for_nestings(++seed)));
}

void BM_Hdr(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  const auto c = orthant(d, 1.0);
  const auto seq = build_sequence(c, {}, ChainConfig::for_nestings(1));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_log_z(c, seq.gammas, 512, ChainConfig::for_hdr(++seed)));
  state.counters["levels"] = static_cast<double>(seq.size());
}

}  // namespace

BENCHMARK(BM_LinessStepSweep)->Arg(10)->Arg(100)->Arg(500);
BENCHMARK(BM_LinessStepProbe)->Arg(10)->Arg(100)->Arg(500);
BENCHMARK(BM_FindShift)->Arg(16)->Arg(512);
BENCHMARK(BM_BuildSequence)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Hdr)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
