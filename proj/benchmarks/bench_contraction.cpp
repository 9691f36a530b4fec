#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "otp/backend.hpp"
#include "otp/rng.hpp"
#include "otp/spectrum.hpp"
#include "otp/tensor.hpp"
#include "otp/tpm.hpp"

namespace {

otp::DenseTensor random_tensor(int p, int n, std::uint64_t seed) {
  otp::DenseTensor A(p, n);
  otp::Rng rng(seed);
  for (std::int64_t f = 0; f < A.size(); ++f)
    A.data()[static_cast<std::size_t>(f)] = rng.next_gaussian();
  return A;
}

void BM_ContractAllButOne(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const int n = static_cast<int>(state.range(1));
  const otp::DenseTensor A = random_tensor(p, n, 1);
  const Eigen::VectorXd u = otp::Rng(2).unit_vector(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(otp::contract_all_but_one(A, u));
  }
  state.SetItemsProcessed(state.iterations() * A.size());
}
BENCHMARK(BM_ContractAllButOne)
    ->ArgNames({"p", "n"})
    ->Args({3, 16})
    ->Args({3, 32})
    ->Args({3, 64})
    ->Args({3, 128})
    ->Args({4, 16})
    ->Args({4, 32});

void BM_ExactQuery(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const int n = static_cast<int>(state.range(1));
  const otp::ExactBackend backend(random_tensor(p, n, 3));
  const Eigen::VectorXd u = otp::Rng(4).unit_vector(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(backend.query(u));
  }
}
BENCHMARK(BM_ExactQuery)
    ->ArgNames({"p", "n"})
    ->Args({3, 16})
    ->Args({3, 32})
    ->Args({3, 64})
    ->Args({4, 16})
    ->Args({4, 32});

/// Residual correction cost on top of a plain query, as deflated terms pile up.
void BM_ExactQueryResidual(benchmark::State& state) {
  const int n = 48;
  const int terms = static_cast<int>(state.range(0));
  const otp::ExactBackend backend(random_tensor(3, n, 5));
  otp::DeflationSet ds = otp::DeflationSet::empty(n);
  otp::Rng rng(6);
  for (int j = 0; j < terms; ++j) {
    const Eigen::VectorXd x = rng.unit_vector(n);
    ds.push(x, x);
  }
  const Eigen::VectorXd u = otp::Rng(7).unit_vector(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(backend.query_res(ds, u));
  }
}
BENCHMARK(BM_ExactQueryResidual)->ArgName("terms")->Arg(0)->Arg(4)->Arg(16);

void BM_ExtractTopExact(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  otp::Spectrum spec;
  spec.vectors = otp::random_orthonormal_basis(n, 3, 8);
  spec.lambdas = Eigen::Vector3d(1.0, 0.5, 0.25);
  const otp::ExactBackend backend(otp::synth_orthogonal(spec, 3));
  const otp::DeflationSet none = otp::DeflationSet::empty(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(otp::extract_top(backend, none, 20, 8, 9));
  }
}
BENCHMARK(BM_ExtractTopExact)->ArgName("n")->Arg(16)->Arg(32)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
