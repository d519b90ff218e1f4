// Per-target cost of the increment-covariance factor: twisted extension of a
// fixed shifted factor against a dense Cholesky of the assembled matrix.

#include <random>

#include <benchmark/benchmark.h>
#include <Eigen/Cholesky>

#include <igpk/kriging.hpp>
#include <igpk/structmat.hpp>

namespace {

struct Problem {
  Eigen::MatrixXd gamma;
  Eigen::VectorXd gt;
  igpk::ShiftedCholesky sc;
};

Problem make_problem(int n) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(n));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd p(n, 2);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = u(rng);
  const auto model = igpk::VariogramModel::stationary_exp(1.0, 3.0);
  const igpk::LocationSet locs(p);
  Problem pr;
  pr.gamma = igpk::build_gamma(model, locs).gamma;
  pr.gt = igpk::gamma_vector(model, locs, igpk::Location{u(rng), u(rng)});
  pr.sc = igpk::factor_shifted_augmented(pr.gamma, pr.gt);
  return pr;
}

void BM_Twisted(benchmark::State& state) {
  const auto pr = make_problem(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    const auto tf = igpk::twisted_factor(pr.sc, pr.gt);
    auto g = igpk::increment_factor(pr.sc, tf);
    benchmark::DoNotOptimize(g.G.data());
  }
  state.SetComplexityN(state.range(0));
}

void BM_Direct(benchmark::State& state) {
  const auto pr = make_problem(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    Eigen::LLT<Eigen::MatrixXd> llt(igpk::increment_covariance(pr.gamma, pr.gt));
    benchmark::DoNotOptimize(llt.matrixLLT().data());
  }
  state.SetComplexityN(state.range(0));
}

// One-time setup paid per observation set.
void BM_ShiftedSetup(benchmark::State& state) {
  const auto pr = make_problem(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto sc = igpk::factor_shifted(pr.gamma);
    benchmark::DoNotOptimize(sc.L0.data());
  }
  state.SetComplexityN(state.range(0));
}

}  // namespace

BENCHMARK(BM_Twisted)->RangeMultiplier(2)->Range(128, 1024)->Complexity(benchmark::oNSquared);
BENCHMARK(BM_Direct)->RangeMultiplier(2)->Range(128, 1024)->Complexity(benchmark::oNCubed);
BENCHMARK(BM_ShiftedSetup)->RangeMultiplier(2)->Range(128, 1024)->Complexity(benchmark::oNCubed);

BENCHMARK_MAIN();
