#include <benchmark/benchmark.h>

#include <random>

#include "hinfpath/analysis.hpp"
#include "hinfpath/lift.hpp"
#include "hinfpath/lmi.hpp"
#include "hinfpath/model.hpp"

namespace {

using namespace hinfpath;

Eigen::MatrixXd randn(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> d(0.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = d(rng);
  return m;
}

ClosedLoop random_stable_system(std::mt19937_64& rng, Eigen::Index n) {
  Eigen::MatrixXd a = randn(rng, n, n);
  a -= (spectral_abscissa(a) + 0.5) * Eigen::MatrixXd::Identity(n, n);
  return ClosedLoop(a, randn(rng, n, 2), randn(rng, 2, n),
                    Eigen::MatrixXd::Zero(2, 2));
}

Plant example1_plant() {
  const Eigen::MatrixXd one = Eigen::MatrixXd::Constant(1, 1, 1.0);
  return Plant(one, one, one, one, one, Eigen::MatrixXd::Zero(1, 1), one, one);
}

void BM_HinfNorm(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const ClosedLoop sys = random_stable_system(rng, state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(hinf_norm(sys).hi);
  }
}
BENCHMARK(BM_HinfNorm)->Arg(4)->Arg(8)->Arg(16);

void BM_SolveCare(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const Eigen::Index n = state.range(0);
  const Eigen::MatrixXd a = randn(rng, n, n);
  const Eigen::MatrixXd b = randn(rng, n, 2);
  const Eigen::MatrixXd g = randn(rng, n, n);
  const SymMatrix q(g * g.transpose() +
                    Eigen::MatrixXd::Identity(n, n));
  const SymMatrix r(Eigen::MatrixXd::Identity(2, 2));
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_care(a, b, q, r).mat()(0, 0));
  }
}
BENCHMARK(BM_SolveCare)->Arg(4)->Arg(8)->Arg(16);

void BM_H2Norm(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const ClosedLoop sys = random_stable_system(rng, state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(h2_norm_squared(sys));
  }
}
BENCHMARK(BM_H2Norm)->Arg(4)->Arg(16);

void BM_LiftRoundTrip(benchmark::State& state) {
  const Plant plant = example1_plant();
  Controller k;
  k.A_K = Eigen::MatrixXd::Constant(1, 1, -2.0);
  k.B_K = Eigen::MatrixXd::Constant(1, 1, -2.0);
  k.C_K = Eigen::MatrixXd::Constant(1, 1, 2.0);
  k.D_K = Eigen::MatrixXd::Zero(1, 1);
  for (auto _ : state) {
    const LiftedPoint z = lift(plant, k, 3.33);
    benchmark::DoNotOptimize(reconstruct(plant, z).A_K(0, 0));
  }
}
BENCHMARK(BM_LiftRoundTrip);

void BM_SynthesizeExample1(benchmark::State& state) {
  const Plant plant = example1_plant();
  for (auto _ : state) {
    benchmark::DoNotOptimize(synthesize(plant, 3.33).A_K(0, 0));
  }
}
BENCHMARK(BM_SynthesizeExample1);

void BM_MembershipCell(benchmark::State& state) {
  const Plant plant = example1_plant();
  Controller k;
  k.A_K = Eigen::MatrixXd::Constant(1, 1, -2.0);
  k.B_K = Eigen::MatrixXd::Constant(1, 1, 1.0);
  k.C_K = Eigen::MatrixXd::Constant(1, 1, -1.0);
  k.D_K = Eigen::MatrixXd::Zero(1, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(in_kgamma(plant, k, 2.0, true));
  }
}
BENCHMARK(BM_MembershipCell);

}  // namespace

BENCHMARK_MAIN();
