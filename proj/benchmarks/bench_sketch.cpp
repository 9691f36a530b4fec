#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "otp/backend.hpp"
#include "otp/rng.hpp"
#include "otp/sketch_backend.hpp"
#include "otp/tensor.hpp"

namespace {

otp::DenseTensor random_tensor(int p, int n, std::uint64_t seed) {
  otp::DenseTensor A(p, n);
  otp::Rng rng(seed);
  for (std::int64_t f = 0; f < A.size(); ++f)
    A.data()[static_cast<std::size_t>(f)] = rng.next_gaussian();
  return A;
}

otp::BackendConfig sketch_config(int b, int B) {
  otp::BackendConfig cfg;
  cfg.epsilon = 0.2;
  cfg.delta = 0.1;
  cfg.b = b;
  cfg.B = B;
  cfg.seed = 42;
  return cfg;
}

/// One-off preprocessing: hashing every tensor entry into B sketch tables.
void BM_SketchBuild(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const otp::DenseTensor A = random_tensor(3, n, 1);
  const otp::BackendConfig cfg = sketch_config(256, 9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(otp::SketchBackend(A, cfg));
  }
  state.SetItemsProcessed(state.iterations() * A.size());
}
BENCHMARK(BM_SketchBuild)->ArgName("n")->Arg(16)->Arg(32)->Arg(64)->Arg(128);

/// Steady-state query cost; FFT convolution dominates, so the sweep is over b.
void BM_SketchQuery(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int b = static_cast<int>(state.range(1));
  const otp::SketchBackend backend(random_tensor(3, n, 2), sketch_config(b, 9));
  const Eigen::VectorXd u = otp::Rng(3).unit_vector(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(backend.query(u));
  }
}
BENCHMARK(BM_SketchQuery)
    ->ArgNames({"n", "b"})
    ->Args({32, 64})
    ->Args({32, 256})
    ->Args({32, 1024})
    ->Args({32, 4096})
    ->Args({64, 256})
    ->Args({128, 256});

void BM_SketchValueQuery(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const otp::SketchBackend backend(random_tensor(3, n, 4), sketch_config(256, 9));
  const Eigen::VectorXd u = otp::Rng(5).unit_vector(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(backend.query_value(u));
  }
}
BENCHMARK(BM_SketchValueQuery)->ArgName("n")->Arg(32)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
