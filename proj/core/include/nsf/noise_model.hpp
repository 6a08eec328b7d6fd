// Complex Gaussian mixture noise: construction, sampling, kurtosis
// analytics and EM fitting.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "nsf/errors.hpp"
#include "nsf/stft.hpp"

namespace nsf {

// Zero-mean complex Gaussian mixture for one frequency bin.
struct GaussianMixture {
  std::vector<double> weights;
  std::vector<Eigen::MatrixXcd> covariances;

  int components() const { return static_cast<int>(weights.size()); }
  int dim() const {
    return covariances.empty() ? 0
                               : static_cast<int>(covariances[0].rows());
  }

  // Sum_m c_m Sigma_m.
  Eigen::MatrixXcd aggregate_covariance() const;

  void validate() const;
};

// Mixture of scaled copies of one covariance: Sigma_m = b^{m-1}/r * base
// with equal weights and r chosen so the aggregate equals base.
struct ScaledMixtureSpec {
  int components = 1;
  double scale = 2.0;  // b
  Eigen::MatrixXcd base_covariance;
};

GaussianMixture build_scaled_mixture(const ScaledMixtureSpec& spec);

// Kurtosis multiplier q = sum_m c_m b^{2(m-1)} / r^2 of the scaled mixture
// (equal weights). q >= 1 with equality iff components == 1 or scale == 1.
double kurtosis_factor(int components, double scale);

// Kurtosis of a D-dimensional complex Gaussian: 2D(2+2D).
double gaussian_kurtosis(int dim);

// Draws from the mixture; component choice and the circular Gaussian draw
// are both driven by the seeded generator, so results are deterministic.
std::vector<Eigen::VectorXcd> sample(const GaussianMixture& mix, int count,
                                     std::uint64_t seed);

// Empirical kurtosis E[(2 (z - mean)^H C^{-1} (z - mean))^2] using the
// sample mean and sample covariance. Requires at least dim^2 samples.
double sample_kurtosis(const std::vector<Eigen::VectorXcd>& samples);

struct EmOptions {
  int max_iterations = 300;
  double rel_tolerance = 1e-7;
  int restarts = 5;
  std::uint64_t seed = 0;
  double weight_floor = 1e-4;
};

struct EmResult {
  GaussianMixture mixture;
  std::vector<double> log_likelihood;  // per accepted iteration, best restart
};

// Fits a zero-mean complex Gaussian mixture by EM with random-responsibility
// restarts. The log-likelihood trace of the returned run is non-decreasing.
EmResult em_fit(const std::vector<Eigen::VectorXcd>& frames, int components,
                const EmOptions& opts = {});

// Time-varying noise model: per-window, per-bin mixtures fitted on a
// spectrogram. Frames are associated with the window whose center is
// nearest (ties resolved toward the earlier window).
struct NoiseModel {
  struct Window {
    int first_frame = 0;
    int last_frame = 0;  // inclusive
    int center_frame = 0;
    std::vector<GaussianMixture> bins;
  };

  int num_bins = 0;
  int num_channels = 0;
  double sample_rate = 0.0;
  int fft_size = 0;
  int shift_samples = 0;
  std::vector<Window> windows;

  const GaussianMixture& lookup(int bin, int frame) const;
  int window_index(int frame) const;
  void validate() const;
};

// Independent EM fits per (frequency bin, time window). window_ms is the
// EM segment length, overlap the fractional overlap between segments.
NoiseModel em_fit_windowed(const Spectrogram& noise, const StftConfig& cfg,
                           double window_ms, double overlap, int components,
                           const EmOptions& opts = {});

// Single window covering the whole spectrogram.
NoiseModel em_fit_full(const Spectrogram& noise, const StftConfig& cfg,
                       int components, const EmOptions& opts = {});

// JSON document (schema_version 1) with per-bin weights and covariances.
// Single-window models serialize with a top-level "bins" array; time-varying
// models use "windows".
std::string to_json_string(const NoiseModel& model, int indent = -1);
NoiseModel noise_model_from_json(const std::string& text);

}  // namespace nsf
