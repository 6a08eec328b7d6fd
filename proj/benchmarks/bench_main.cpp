// Microbenchmarks for the per-bin estimators, EM fitting and the STFT.
#include <benchmark/benchmark.h>

#include <random>

#include "nsf/filters.hpp"
#include "nsf/noise_model.hpp"
#include "nsf/numerics.hpp"
#include "nsf/stft.hpp"

namespace {

Eigen::MatrixXcd random_pd(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXcd a(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      a(i, j) = std::complex<double>(normal(rng), normal(rng));
    }
  }
  Eigen::MatrixXcd h = a * a.adjoint() / dim;
  h.diagonal().array() += 0.1;
  return h;
}

nsf::GaussianMixture make_mixture(int dim, int components,
                                  std::mt19937_64& rng) {
  nsf::ScaledMixtureSpec spec;
  spec.components = components;
  spec.scale = 2.0;
  spec.base_covariance = random_pd(dim, rng);
  return nsf::build_scaled_mixture(spec);
}

void BM_NonlinearMmse(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const int components = static_cast<int>(state.range(1));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0.0, 1.0);
  nsf::BinFilter filter(Eigen::VectorXcd::Ones(dim),
                        make_mixture(dim, components, rng), 0.25);
  Eigen::VectorXcd y(dim);
  for (int i = 0; i < dim; ++i) {
    y(i) = std::complex<double>(normal(rng), normal(rng));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(filter.nonlinear_mmse(0.8, y));
  }
}
BENCHMARK(BM_NonlinearMmse)->Args({2, 5})->Args({5, 6})->Args({6, 4});

void BM_MvdrPostfilter(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const int components = static_cast<int>(state.range(1));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal(0.0, 1.0);
  nsf::BinFilter filter(Eigen::VectorXcd::Ones(dim),
                        make_mixture(dim, components, rng), 0.25);
  Eigen::VectorXcd y(dim);
  for (int i = 0; i < dim; ++i) {
    y(i) = std::complex<double>(normal(rng), normal(rng));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(filter.mvdr_postfilter(0.8, y));
  }
}
BENCHMARK(BM_MvdrPostfilter)->Args({2, 5})->Args({5, 6});

void BM_KummerSeries(benchmark::State& state) {
  const double x = static_cast<double>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(nsf::kummer_m(0.25, 1.0, x));
  }
}
BENCHMARK(BM_KummerSeries)->Arg(1)->Arg(10)->Arg(29)->Arg(50);

void BM_EmFit(benchmark::State& state) {
  const int components = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  const nsf::GaussianMixture mix = make_mixture(2, components, rng);
  const auto frames = nsf::sample(mix, 16, 4);
  nsf::EmOptions opts;
  opts.restarts = 5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(nsf::em_fit(frames, components, opts));
  }
}
BENCHMARK(BM_EmFit)->Arg(2)->Arg(5);

void BM_StftRoundTrip(benchmark::State& state) {
  nsf::StftConfig cfg;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd x(16000, 2);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x(i % x.rows(), i / x.rows()) = normal(rng);
  }
  for (auto _ : state) {
    const nsf::Spectrogram spec = nsf::analyze(x, cfg);
    benchmark::DoNotOptimize(nsf::synthesize(spec, cfg, x.rows()));
  }
}
BENCHMARK(BM_StftRoundTrip);

}  // namespace

BENCHMARK_MAIN();
