// Sparse OpenMP kernels against the dense serial references they are tested
// with. Arguments are the truncation depth at n = 2.

#include "fockbound/boundary.hpp"

#include <benchmark/benchmark.h>

using namespace fockbound;

namespace {

const Weights kUniform = Weights::uniform(2);

ComplexElement sample_element() {
  return multiply(ComplexElement::peripheral(Phase::root(8, 1)), f_element(kUniform, Word{1, 2}, Word{2}));
}

void BM_ComposeSparse(benchmark::State& state) {
  const TruncationParams p(2, static_cast<int>(state.range(0)));
  const auto x = realize(p, sample_element()).matrix();
  const auto y = realize(p, sample_element().adjoint()).matrix();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::compose(x, y));
}

void BM_ComposeDense(benchmark::State& state) {
  const TruncationParams p(2, static_cast<int>(state.range(0)));
  const DenseMatrix x = realize(p, sample_element()).dense();
  const DenseMatrix y = realize(p, sample_element().adjoint()).dense();
  for (auto _ : state) benchmark::DoNotOptimize(reference::compose(x, y));
}

void BM_UcpSparse(benchmark::State& state) {
  const TruncationParams p(2, static_cast<int>(state.range(0)));
  const UcpMap m(kUniform, p);
  const auto x = realize(p, sample_element());
  for (auto _ : state) benchmark::DoNotOptimize(m.apply(x));
}

void BM_UcpDense(benchmark::State& state) {
  const TruncationParams p(2, static_cast<int>(state.range(0)));
  const UcpMap m(kUniform, p);
  const DenseMatrix x = realize(p, sample_element()).dense();
  for (auto _ : state) benchmark::DoNotOptimize(m.apply_reference(x));
}

void BM_RealizeSparse(benchmark::State& state) {
  const TruncationParams p(2, static_cast<int>(state.range(0)));
  const auto x = sample_element();
  for (auto _ : state) benchmark::DoNotOptimize(realize(p, x));
}

void BM_RealizeDense(benchmark::State& state) {
  const TruncationParams p(2, static_cast<int>(state.range(0)));
  const auto x = sample_element();
  for (auto _ : state) benchmark::DoNotOptimize(reference::realize(p, x));
}

}  // namespace

BENCHMARK(BM_ComposeSparse)->Arg(5)->Arg(6)->Arg(7)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ComposeDense)->Arg(5)->Arg(6)->Arg(7)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_UcpSparse)->Arg(5)->Arg(6)->Arg(7)->Arg(8)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_UcpDense)->Arg(5)->Arg(6)->Arg(7)->Arg(8)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_RealizeSparse)->Arg(5)->Arg(6)->Arg(7)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_RealizeDense)->Arg(5)->Arg(6)->Arg(7)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
