#include <random>

#include <benchmark/benchmark.h>

#include "gmvshrink/estimators.hpp"
#include "gmvshrink/linalg.hpp"
#include "gmvshrink/random.hpp"
#include "gmvshrink/simulation.hpp"

namespace {

using namespace gmvshrink;

ReturnsMatrix random_returns(Index p, Index n) {
  Rng rng = make_stream(7, static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(n));
  std::normal_distribution<double> z;
  Matrix y(p, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < p; ++i) y(i, j) = z(rng);
  }
  return ReturnsMatrix(std::move(y));
}

void bm_sample_covariance(benchmark::State& state) {
  const Index p = state.range(0);
  const ReturnsMatrix y = random_returns(p, 2 * p);
  for (auto _ : state) benchmark::DoNotOptimize(sample_covariance(y));
}

void bm_pseudo_inverse(benchmark::State& state) {
  const Index p = state.range(0);
  const Index n = state.range(1);
  const SymmetricMatrix s = sample_covariance(random_returns(p, n));
  for (auto _ : state) benchmark::DoNotOptimize(pseudo_inverse(s, std::nullopt, std::min(p, n - 1)));
}

void bm_bona_fide(benchmark::State& state) {
  const Index p = state.range(0);
  const Index n = state.range(1);
  const ReturnsMatrix y = random_returns(p, n);
  const TargetPortfolio b = TargetPortfolio::naive(p);
  for (auto _ : state) benchmark::DoNotOptimize(bona_fide_shrinkage(y, b));
}

void bm_generate_returns(benchmark::State& state) {
  const Index p = state.range(0);
  Rng srng = make_stream(11, static_cast<std::uint64_t>(p));
  const CovarianceModel sigma =
      simulation::build_scenario(simulation::Scenario::kBoundedSpectrum, p, srng);
  const Vector mu = Vector::Zero(p);
  Rng rng = make_stream(13, static_cast<std::uint64_t>(p));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        simulation::generate_returns(sigma, mu, 2 * p, simulation::Distribution::gaussian(), rng));
  }
}

}  // namespace

BENCHMARK(bm_sample_covariance)->Arg(36)->Arg(144)->Arg(360)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_pseudo_inverse)
    ->Args({36, 72})
    ->Args({144, 288})
    ->Args({144, 80})
    ->Args({360, 200})
    ->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_bona_fide)
    ->Args({36, 72})
    ->Args({144, 288})
    ->Args({144, 80})
    ->Args({360, 200})
    ->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_generate_returns)->Arg(36)->Arg(144)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
