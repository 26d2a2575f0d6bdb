// Serial reference vs OpenMP kernels, plus end-to-end terminal construction.

#include <random>

#include <benchmark/benchmark.h>

#include "ahmpc/albrekht.hpp"
#include "ahmpc/kernels.hpp"
#include "ahmpc/plant.hpp"
#include "ahmpc/terminal.hpp"

namespace {

using ahmpc::DenseMatrix;

DenseMatrix<double> random_square(int n) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  return DenseMatrix<double>::NullaryExpr(n, n, [&] { return nd(rng); });
}

// Degree-10 completed cost of the pendulum and a cloud of sample points.
const ahmpc::PolyBundle& degree_ten_cost() {
  static const ahmpc::PolyBundle W = ahmpc::build_terminal(5).pair.V_f;
  return W;
}

Eigen::MatrixXd sample_points(int count) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  return Eigen::MatrixXd::NullaryExpr(4, count, [&] { return nd(rng); });
}

void BM_SubstitutionSerial(benchmark::State& state) {
  const auto A = random_square(static_cast<int>(state.range(0)));
  const int k = static_cast<int>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ahmpc::substitution_matrix_serial<double>(A, k));
  }
}

void BM_SubstitutionParallel(benchmark::State& state) {
  const auto A = random_square(static_cast<int>(state.range(0)));
  const int k = static_cast<int>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ahmpc::substitution_matrix<double>(A, k));
  }
  state.counters["threads"] = ahmpc::max_threads();
}

void BM_EvalBatchSerial(benchmark::State& state) {
  const auto& W = degree_ten_cost();
  const auto X = sample_points(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ahmpc::eval_batch_serial(W, X));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EvalBatchParallel(benchmark::State& state) {
  const auto& W = degree_ten_cost();
  const auto X = sample_points(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ahmpc::eval_batch(W, X));
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = ahmpc::max_threads();
}

void BM_SeriesDegreeFive(benchmark::State& state) {
  const ahmpc::PendulumParams params;
  const auto lag = ahmpc::pendulum_lagrangian().as_polynomial();
  for (auto _ : state) {
    benchmark::DoNotOptimize(ahmpc::albrekht(ahmpc::taylor_dynamics(params, 5), lag, 5));
  }
}

void BM_TerminalBuild(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ahmpc::build_terminal(d));
}

BENCHMARK(BM_SubstitutionSerial)->Args({4, 6})->Args({6, 6})->Args({6, 10})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SubstitutionParallel)->Args({4, 6})->Args({6, 6})->Args({6, 10})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_EvalBatchSerial)->Arg(1000)->Arg(100000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_EvalBatchParallel)->Arg(1000)->Arg(100000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SeriesDegreeFive)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TerminalBuild)->Arg(1)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
