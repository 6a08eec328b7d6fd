#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "nsf/experiments.hpp"
#include "nsf/filters.hpp"
#include "nsf/spatial.hpp"
#include "oracles.hpp"

using nsf::BinFilter;
using nsf::GaussianMixture;
using nsf::Method;

namespace {

constexpr double kPi = std::numbers::pi;

struct RandomCase {
  Eigen::VectorXcd steering;
  GaussianMixture mixture;
  Eigen::VectorXcd y;
  double sigma_s2 = 1.0;
  double nu = 0.25;
};

RandomCase random_case(std::mt19937_64& rng, int dim, int components,
                       double nu_min = 0.1, double nu_max = 1.5) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  RandomCase c;
  c.steering = oracle::random_complex_vector(dim, rng);
  // Keep the steering well away from zero.
  c.steering += Eigen::VectorXcd::Ones(dim);
  c.mixture.weights.assign(components, 1.0 / components);
  for (int m = 0; m < components; ++m) {
    c.mixture.covariances.push_back(
        oracle::random_hermitian_pd(dim, rng, 0.2) * (0.5 + unif(rng)));
  }
  if (components > 1) {
    // Random positive weights summing to one.
    double sum = 0.0;
    for (int m = 0; m < components; ++m) {
      c.mixture.weights[m] = 0.2 + unif(rng);
      sum += c.mixture.weights[m];
    }
    for (int m = 0; m < components; ++m) c.mixture.weights[m] /= sum;
  }
  c.y = oracle::random_complex_vector(dim, rng);
  c.sigma_s2 = 0.1 + 2.0 * unif(rng);
  c.nu = nu_min + (nu_max - nu_min) * unif(rng);
  return c;
}

// Eq-as-printed evaluation of the joint MMSE estimator in the linear
// domain with naive inverses and the long-double Kummer series.
std::complex<double> nl_mmse_oracle(const RandomCase& c) {
  const int m = c.mixture.components();
  std::complex<double> num = 0.0;
  double den = 0.0;
  for (int i = 0; i < m; ++i) {
    const Eigen::MatrixXcd inv = oracle::naive_inverse(c.mixture.covariances[i]);
    const double g = (c.steering.adjoint() * inv * c.steering)(0).real();
    const std::complex<double> t =
        (c.steering.adjoint() * inv * c.y)(0) / g;
    const double quad = (c.y.adjoint() * inv * c.y)(0).real();
    // det via elimination pivots
    Eigen::MatrixXcd lu = c.mixture.covariances[i];
    std::complex<double> det = 1.0;
    for (int col = 0; col < lu.rows(); ++col) {
      int pivot = col;
      for (int row = col + 1; row < lu.rows(); ++row) {
        if (std::abs(lu(row, col)) > std::abs(lu(pivot, col))) pivot = row;
      }
      if (pivot != col) {
        lu.row(col).swap(lu.row(pivot));
        det = -det;
      }
      det *= lu(col, col);
      for (int row = col + 1; row < lu.rows(); ++row) {
        lu.row(row) -= (lu(row, col) / lu(col, col)) * lu.row(col);
      }
    }
    const double q_m = std::pow(c.nu + g * c.sigma_s2, -c.nu);
    const double p_m = c.sigma_s2 * g * std::norm(t) /
                       (c.nu / g + c.sigma_s2);
    const double common = c.mixture.weights[i] * q_m / det.real() *
                          std::exp(-quad);
    num += common * c.sigma_s2 * t *
           static_cast<double>(oracle::kummer_series_ld(c.nu + 1, 2.0, p_m)) /
           (c.nu / g + c.sigma_s2);
    den += common *
           static_cast<double>(oracle::kummer_series_ld(c.nu, 1.0, p_m));
  }
  return c.nu * num / den;
}

}  // namespace

TEST_SUITE_BEGIN("filters");

TEST_CASE("mvdr is distortionless for steered input") {
  std::mt19937_64 rng(6001);
  for (int trial = 0; trial < 20; ++trial) {
    RandomCase c = random_case(rng, 4, 2);
    const std::complex<double> s(2.0, 3.0);
    BinFilter filter(c.steering, c.mixture, c.nu);
    const std::complex<double> out = filter.mvdr(c.steering * s);
    CHECK(std::abs(out - s) < 1e-10);
  }
}

TEST_CASE("mvdr reduces to delay-and-sum for white noise") {
  GaussianMixture mix;
  mix.weights = {1.0};
  mix.covariances = {Eigen::MatrixXcd::Identity(3, 3)};
  BinFilter filter(Eigen::VectorXcd::Ones(3), mix);
  Eigen::VectorXcd y(3);
  y << std::complex<double>(1.0, 1.0), std::complex<double>(2.0, -1.0),
      std::complex<double>(0.5, 0.0);
  const std::complex<double> out = filter.mvdr(y);
  CHECK(std::abs(out - y.mean()) < 1e-12);
}

TEST_CASE("mvdr matches the naive-inverse evaluation") {
  std::mt19937_64 rng(6002);
  for (int trial = 0; trial < 50; ++trial) {
    RandomCase c = random_case(rng, 5, 1);
    BinFilter filter(c.steering, c.mixture, c.nu);
    const Eigen::MatrixXcd inv =
        oracle::naive_inverse(c.mixture.covariances[0]);
    const double g = (c.steering.adjoint() * inv * c.steering)(0).real();
    const std::complex<double> expected =
        (c.steering.adjoint() * inv * c.y)(0) / g;
    const double tol = 1e-9 * (1.0 + std::abs(expected));
    CHECK(std::abs(filter.mvdr(c.y) - expected) < tol);
    // Component route with the same single covariance agrees.
    CHECK(std::abs(filter.mvdr_component(0, c.y) - expected) < tol);
  }
}

TEST_CASE("separation identity: M=1 joint MMSE equals MVDR+postfilter") {
  std::mt19937_64 rng(6003);
  for (int trial = 0; trial < 500; ++trial) {
    RandomCase c = random_case(rng, 1 + trial % 5, 1);
    BinFilter filter(c.steering, c.mixture, c.nu);
    const std::complex<double> joint =
        filter.nonlinear_mmse(c.sigma_s2, c.y);
    const std::complex<double> two_step =
        filter.mvdr_postfilter(c.sigma_s2, c.y);
    CHECK(std::abs(joint - two_step) <= 1e-9 * std::abs(two_step));
  }
}

TEST_CASE("Wiener reduction: postfilter with nu=1, M=1 equals the MWF") {
  std::mt19937_64 rng(6004);
  for (int trial = 0; trial < 500; ++trial) {
    RandomCase c = random_case(rng, 1 + trial % 5, 1);
    BinFilter filter(c.steering, c.mixture, 1.0);
    const std::complex<double> post = filter.mvdr_postfilter(c.sigma_s2, c.y);
    const std::complex<double> wiener = filter.mwf(c.sigma_s2, c.y);
    CHECK(std::abs(post - wiener) <= 1e-10 * std::abs(wiener));
    // And the joint estimator collapses the same way.
    const std::complex<double> joint = filter.nonlinear_mmse(c.sigma_s2, c.y);
    CHECK(std::abs(joint - wiener) <= 1e-9 * std::abs(wiener));
  }
}

TEST_CASE("nonlinear MMSE matches the linear-domain oracle") {
  std::mt19937_64 rng(6005);
  for (int trial = 0; trial < 100; ++trial) {
    RandomCase c = random_case(rng, 3, 3);
    BinFilter filter(c.steering, c.mixture, c.nu);
    const std::complex<double> got = filter.nonlinear_mmse(c.sigma_s2, c.y);
    const std::complex<double> expected = nl_mmse_oracle(c);
    CHECK(std::abs(got - expected) <= 1e-8 * std::abs(expected));
  }
}

TEST_CASE("zero speech power shuts every nonlinear estimator off") {
  std::mt19937_64 rng(6006);
  RandomCase c = random_case(rng, 4, 3);
  BinFilter filter(c.steering, c.mixture, c.nu);
  CHECK(filter.nonlinear_mmse(0.0, c.y) == std::complex<double>(0.0));
  CHECK(filter.mvdr_postfilter(0.0, c.y) == std::complex<double>(0.0));
  CHECK(filter.mwf(0.0, c.y) == std::complex<double>(0.0));
}

TEST_CASE("postfilter gain approaches one for dominant speech power") {
  std::mt19937_64 rng(6007);
  RandomCase c = random_case(rng, 3, 1);
  BinFilter filter(c.steering, c.mixture, c.nu);
  const double sigma1 = filter.component_output_variance(0);
  const double sigma_s2 = 1e6 * sigma1;
  // Observation consistent with that speech power.
  const Eigen::VectorXcd y =
      c.steering * std::sqrt(sigma_s2) + c.y;
  const std::complex<double> z = filter.mvdr(y);
  const std::complex<double> out = filter.mvdr_postfilter(sigma_s2, y);
  CHECK(std::abs(out - z) / std::abs(z) < 1e-2);
}

TEST_CASE("postfilter output keeps the MVDR phase exactly") {
  std::mt19937_64 rng(6008);
  for (int trial = 0; trial < 50; ++trial) {
    RandomCase c = random_case(rng, 4, 3);
    BinFilter filter(c.steering, c.mixture, c.nu);
    const std::complex<double> z = filter.mvdr(c.y);
    const std::complex<double> out = filter.mvdr_postfilter(c.sigma_s2, c.y);
    // out = gain * z with a real nonnegative gain: the cross product of the
    // two phasors vanishes (up to one rounding of the scale).
    const double cross = out.real() * z.imag() - out.imag() * z.real();
    const double dot = out.real() * z.real() + out.imag() * z.imag();
    CHECK(std::abs(cross) <= 1e-14 * std::abs(out) * std::abs(z));
    CHECK(dot >= 0.0);
  }
}

TEST_CASE("mwf equal-power case halves the MVDR output") {
  GaussianMixture mix;
  mix.weights = {1.0};
  mix.covariances = {Eigen::MatrixXcd::Identity(2, 2) * 2.0};
  BinFilter filter(Eigen::VectorXcd::Ones(2), mix);
  // (d^H S^-1 d)^{-1} = (2 * 1/2)^{-1} = 1.
  CHECK(filter.residual_noise_power() == doctest::Approx(1.0));
  Eigen::VectorXcd y(2);
  y << std::complex<double>(1.0, -2.0), std::complex<double>(3.0, 0.5);
  const std::complex<double> expected = filter.mvdr(y) * 0.5;
  CHECK(std::abs(filter.mwf(1.0, y) - expected) < 1e-12);
}

TEST_CASE("scaling equivariance of all four estimators") {
  std::mt19937_64 rng(6009);
  for (int trial = 0; trial < 100; ++trial) {
    RandomCase c = random_case(rng, 3, 2);
    const std::complex<double> scale(1.7, -2.3);
    const double p = std::norm(scale);

    GaussianMixture scaled = c.mixture;
    for (auto& cov : scaled.covariances) cov *= p;

    BinFilter filter(c.steering, c.mixture, c.nu);
    BinFilter filter_scaled(c.steering, scaled, c.nu);
    const Eigen::VectorXcd y_scaled = scale * c.y;
    const double s2_scaled = p * c.sigma_s2;

    for (Method method : {Method::kMvdr, Method::kMwf, Method::kMvdrMmse,
                          Method::kNlMmse}) {
      const std::complex<double> base =
          scale * filter.apply(method, c.sigma_s2, c.y);
      const std::complex<double> rescaled =
          filter_scaled.apply(method, s2_scaled, y_scaled);
      CHECK(std::abs(rescaled - base) <=
            1e-10 * std::max(1.0, std::abs(base)));
    }
  }
}

TEST_CASE("log-domain evaluation stays finite for huge observations") {
  std::mt19937_64 rng(6010);
  RandomCase c = random_case(rng, 5, 4);
  BinFilter filter(c.steering, c.mixture, c.nu);
  for (double magnitude : {1e2, 1e4, 1e6}) {
    const Eigen::VectorXcd y = c.y * magnitude;
    const std::complex<double> joint = filter.nonlinear_mmse(c.sigma_s2, y);
    const std::complex<double> post = filter.mvdr_postfilter(c.sigma_s2, y);
    CHECK(std::isfinite(joint.real()));
    CHECK(std::isfinite(joint.imag()));
    CHECK(std::isfinite(post.real()));
    CHECK(std::isfinite(post.imag()));
  }
}

TEST_CASE("ML estimate coincides with the MVDR output") {
  std::mt19937_64 rng(6011);
  for (int trial = 0; trial < 50; ++trial) {
    RandomCase c = random_case(rng, 4, 1);
    BinFilter filter(c.steering, c.mixture, c.nu);
    const std::complex<double> z = filter.mvdr(c.y);
    const Eigen::MatrixXcd inv =
        oracle::naive_inverse(c.mixture.covariances[0]);
    auto loglik = [&](std::complex<double> s) {
      const Eigen::VectorXcd r = c.y - c.steering * s;
      return -(r.adjoint() * inv * r)(0).real();
    };
    const double at_z = loglik(z);
    const double scale = std::max(std::abs(z), 1e-3);
    for (double h : {1e-3, 1e-2, 1e-1}) {
      for (int a = -2; a <= 2; ++a) {
        for (int b = -2; b <= 2; ++b) {
          const std::complex<double> delta(a * h * scale, b * h * scale);
          CHECK(loglik(z + delta) <= at_z + 1e-9);
        }
      }
    }
  }
}

TEST_CASE("oracle speech PSD follows the smoothing recursion") {
  nsf::StftConfig cfg;
  std::mt19937_64 rng(6012);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd x(8192);
  for (int i = 0; i < x.size(); ++i) x[i] = normal(rng);
  const nsf::Spectrogram spec = nsf::analyze_mono(x, cfg);
  const Eigen::ArrayXXd psd = nsf::oracle_speech_psd(spec, 0, 0.72);
  const Eigen::ArrayXXd power = spec.power(0);
  const int k = 40;
  double state = power(k, 0);
  for (int i = 1; i < spec.frames(); ++i) {
    state = 0.72 * state + 0.28 * power(k, i);
    CHECK(psd(k, i) == doctest::Approx(std::max(state, psd.minCoeff()))
                           .epsilon(1e-9));
  }
}

TEST_CASE("cepstral PSD: stationary noise stays at the floor") {
  const int bins = 257;
  const int frames = 40;
  Eigen::ArrayXd noise_psd = Eigen::ArrayXd::Constant(bins, 0.3);
  Eigen::ArrayXXd periodogram(bins, frames);
  for (int i = 0; i < frames; ++i) periodogram.col(i) = noise_psd;
  const Eigen::ArrayXXd psd =
      nsf::estimate_speech_psd(periodogram, noise_psd, 16000.0);
  const double floor = 1e-6 * 0.3;
  CHECK((psd >= floor * (1.0 - 1e-9)).all());
  CHECK((psd <= floor * (1.0 + 1e-6)).all());
}

TEST_CASE("cepstral PSD roughly preserves clean-speech energy") {
  const auto x = nsf::synthetic_utterance(404, 3.0, 16000.0);
  nsf::StftConfig cfg;
  const nsf::Spectrogram spec = nsf::analyze_mono(x, cfg);
  const Eigen::ArrayXXd power = spec.power(0);
  const Eigen::ArrayXd zero_noise = Eigen::ArrayXd::Zero(spec.bins());
  const Eigen::ArrayXXd psd =
      nsf::estimate_speech_psd(power, zero_noise, cfg.sample_rate);

  const Eigen::ArrayXd in_frame = power.colwise().sum();
  const Eigen::ArrayXd out_frame = psd.colwise().sum();
  const double peak = in_frame.maxCoeff();
  std::vector<double> ratios;
  for (int i = 0; i < in_frame.size(); ++i) {
    if (in_frame[i] > 1e-4 * peak) {
      ratios.push_back(out_frame[i] / in_frame[i]);
    }
  }
  REQUIRE(ratios.size() > 20);
  std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2,
                   ratios.end());
  const double median = ratios[ratios.size() / 2];
  CHECK(median > 0.8);
  CHECK(median < 1.25);
  // Aggregate energy over the utterance is preserved within 20%.
  CHECK(psd.sum() > 0.8 * power.sum());
  CHECK(psd.sum() < 1.2 * power.sum());
}

TEST_CASE("steering estimation recovers a fixed rank-1 field") {
  nsf::StftConfig cfg;
  const nsf::ArrayGeometry g = nsf::ArrayGeometry::linear(3, 0.05);
  std::mt19937_64 rng(6013);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int frames = 80;
  const int bins = cfg.num_bins();
  nsf::Spectrogram clean(bins, frames, 3);
  for (int k = 0; k < bins; ++k) {
    const Eigen::VectorXcd d =
        nsf::steering_vector(g, 1.0, cfg.bin_frequency(k));
    for (int i = 0; i < frames; ++i) {
      const std::complex<double> s(normal(rng), normal(rng));
      clean.channel_vector(k, i) = d * s;
    }
  }
  const auto steering = nsf::estimate_steering(clean, 0.9);
  REQUIRE(static_cast<int>(steering.size()) == frames);
  for (int k = 10; k < bins; k += 60) {
    const Eigen::VectorXcd d =
        nsf::steering_vector(g, 1.0, cfg.bin_frequency(k));
    const Eigen::VectorXcd est = steering[frames - 1].row(k).transpose();
    const double cosang =
        std::abs(est.dot(d)) / (est.norm() * d.norm());
    CHECK(std::acos(std::min(1.0, cosang)) < 1e-3);
    // Reference microphone entry pinned to one.
    CHECK(std::abs(est(0) - std::complex<double>(1.0, 0.0)) < 1e-9);
  }
}

TEST_CASE("steering estimation falls back to ones on silence") {
  nsf::Spectrogram zero(16, 5, 2);
  const auto steering = nsf::estimate_steering(zero, 0.9);
  for (const auto& frame : steering) {
    CHECK((frame - Eigen::MatrixXcd::Ones(16, 2)).norm() == 0.0);
  }
}

TEST_CASE("steering estimation tracks a change with smoothing lag") {
  nsf::StftConfig cfg;
  const nsf::ArrayGeometry g = nsf::ArrayGeometry::linear(2, 0.06);
  std::mt19937_64 rng(6014);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int bins = cfg.num_bins();
  const int frames = 160;
  const int k = 64;
  const Eigen::VectorXcd d1 =
      nsf::steering_vector(g, 0.8, cfg.bin_frequency(k));
  const Eigen::VectorXcd d2 =
      nsf::steering_vector(g, 2.2, cfg.bin_frequency(k));
  nsf::Spectrogram clean(bins, frames, 2);
  for (int i = 0; i < frames; ++i) {
    const std::complex<double> s(normal(rng), normal(rng));
    clean.channel_vector(k, i) = (i < 80 ? d1 : d2) * s;
  }
  const auto steering = nsf::estimate_steering(clean, 0.9);
  auto angle_to = [&](int frame, const Eigen::VectorXcd& d) {
    const Eigen::VectorXcd est = steering[frame].row(k).transpose();
    return std::acos(std::min(1.0, std::abs(est.dot(d)) /
                                       (est.norm() * d.norm())));
  };
  CHECK(angle_to(79, d1) < 1e-2);
  // Right after the switch the estimate still leans toward d1; by the end
  // of the second regime it has moved to d2.
  CHECK(angle_to(82, d1) < angle_to(82, d2));
  CHECK(angle_to(159, d2) < 1e-2);
}

TEST_CASE("enhance: MVDR reconstructs noiseless steered speech") {
  nsf::StftConfig cfg;
  const nsf::ArrayGeometry g = nsf::ArrayGeometry::linear(3, 0.05);
  const double angle = 1.1;
  const auto mono = nsf::synthetic_utterance(7, 2.0, cfg.sample_rate);
  const nsf::Spectrogram steered = nsf::spatialize(mono, g, angle, cfg);

  const int bins = cfg.num_bins();
  Eigen::MatrixXcd field(bins, 3);
  std::vector<GaussianMixture> mixtures(bins);
  for (int k = 0; k < bins; ++k) {
    field.row(k) =
        nsf::steering_vector(g, angle, cfg.bin_frequency(k)).transpose();
    mixtures[k].weights = {1.0};
    mixtures[k].covariances = {
        nsf::diffuse_covariance(g, cfg.bin_frequency(k), 0.05)};
  }
  nsf::NoiseModel model;
  model.num_bins = bins;
  model.num_channels = 3;
  model.sample_rate = cfg.sample_rate;
  model.fft_size = cfg.fft_size();
  model.shift_samples = cfg.shift_samples();
  model.windows.resize(1);
  model.windows[0].last_frame = steered.frames() - 1;
  model.windows[0].center_frame = steered.frames() / 2;
  model.windows[0].bins = mixtures;

  nsf::EnhanceInput input;
  input.noisy = &steered;
  input.noise = &model;
  input.steering = nsf::SteeringField::fixed(field);
  input.prior.nu = 0.25;
  input.prior.sigma_s2 =
      Eigen::ArrayXXd::Constant(bins, steered.frames(), 1.0);
  input.stft = cfg;

  const Eigen::VectorXd out = nsf::enhance(input, Method::kMvdr, mono.size());
  const int w = cfg.window_samples();
  double max_err = 0.0;
  for (int i = w; i < mono.size() - w; ++i) {
    max_err = std::max(max_err, std::abs(out[i] - mono[i]));
  }
  CHECK(max_err < 1e-8);
}

TEST_CASE("enhance: M=1 joint and two-step pipelines coincide") {
  nsf::StftConfig cfg;
  cfg.sample_rate = 8000.0;  // smaller case, still 257.. 129 bins
  const nsf::ArrayGeometry g = nsf::ArrayGeometry::linear(2, 0.06);
  std::mt19937_64 rng(6015);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int bins = cfg.num_bins();
  const int frames = 20;
  nsf::Spectrogram noisy(bins, frames, 2);
  for (int k = 0; k < bins; ++k) {
    for (int i = 0; i < frames; ++i) {
      noisy.channel_vector(k, i) =
          oracle::random_complex_vector(2, rng);
    }
  }
  std::vector<GaussianMixture> mixtures(bins);
  for (int k = 0; k < bins; ++k) {
    mixtures[k].weights = {1.0};
    mixtures[k].covariances = {oracle::random_hermitian_pd(2, rng)};
  }
  nsf::NoiseModel model;
  model.num_bins = bins;
  model.num_channels = 2;
  model.sample_rate = cfg.sample_rate;
  model.fft_size = cfg.fft_size();
  model.shift_samples = cfg.shift_samples();
  model.windows.resize(1);
  model.windows[0].last_frame = frames - 1;
  model.windows[0].bins = mixtures;

  nsf::EnhanceInput input;
  input.noisy = &noisy;
  input.noise = &model;
  input.steering = nsf::SteeringField::ones(bins, 2);
  input.prior.nu = 0.4;
  input.prior.sigma_s2 = Eigen::ArrayXXd::Constant(bins, frames, 0.7);
  input.stft = cfg;

  const nsf::Spectrogram joint =
      nsf::enhance_spectrogram(input, Method::kNlMmse);
  const nsf::Spectrogram two_step =
      nsf::enhance_spectrogram(input, Method::kMvdrMmse);
  for (int k = 0; k < bins; ++k) {
    for (int i = 0; i < frames; ++i) {
      const double mag = std::abs(two_step(k, i, 0));
      CHECK(std::abs(joint(k, i, 0) - two_step(k, i, 0)) <=
            1e-10 * std::max(1.0, mag));
    }
  }
}

TEST_CASE("enhance: zero input gives zero output") {
  nsf::StftConfig cfg;
  const int bins = cfg.num_bins();
  const int frames = 8;
  nsf::Spectrogram noisy(bins, frames, 2);
  std::vector<GaussianMixture> mixtures(bins);
  for (int k = 0; k < bins; ++k) {
    mixtures[k].weights = {1.0};
    mixtures[k].covariances = {Eigen::MatrixXcd::Identity(2, 2)};
  }
  nsf::NoiseModel model;
  model.num_bins = bins;
  model.num_channels = 2;
  model.sample_rate = cfg.sample_rate;
  model.fft_size = cfg.fft_size();
  model.shift_samples = cfg.shift_samples();
  model.windows.resize(1);
  model.windows[0].last_frame = frames - 1;
  model.windows[0].bins = mixtures;

  nsf::EnhanceInput input;
  input.noisy = &noisy;
  input.noise = &model;
  input.steering = nsf::SteeringField::ones(bins, 2);
  input.prior.sigma_s2 = Eigen::ArrayXXd::Constant(bins, frames, 1.0);
  input.stft = cfg;

  for (Method method : {Method::kMvdr, Method::kMwf, Method::kMvdrMmse,
                        Method::kNlMmse}) {
    const Eigen::VectorXd out = nsf::enhance(input, method);
    CHECK(out.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_SUITE_END();
