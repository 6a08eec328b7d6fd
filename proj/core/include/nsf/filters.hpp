// The estimator family: MVDR, multichannel Wiener filter, MVDR with an
// MMSE-optimal spectral postfilter, and the jointly spatial-spectral
// nonlinear MMSE estimator under complex Gaussian mixture noise. Plus
// speech-power and steering estimation.
#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nsf/noise_model.hpp"
#include "nsf/numerics.hpp"
#include "nsf/stft.hpp"

namespace nsf {

enum class Method { kMvdr, kMwf, kMvdrMmse, kNlMmse };

Method method_from_string(const std::string& name);
std::string to_string(Method method);

// Generalized-Gamma speech prior: shape nu and per-(bin, frame) spectral
// power sigma_s^2.
struct SpeechPrior {
  double nu = 0.25;
  Eigen::ArrayXXd sigma_s2;  // bins x frames
};

// Steering vectors, either fixed per bin or varying per frame.
class SteeringField {
 public:
  // All-ones steering (broadside target).
  static SteeringField ones(int bins, int channels);
  // Fixed steering, one row per bin and one column per channel.
  static SteeringField fixed(Eigen::MatrixXcd bins_by_channels);
  // Per-frame steering: frames entries of (bins x channels).
  static SteeringField time_varying(std::vector<Eigen::MatrixXcd> per_frame);

  bool is_static() const { return per_frame_.empty(); }
  int bins() const;
  int channels() const;
  Eigen::VectorXcd at(int bin, int frame) const;

 private:
  Eigen::MatrixXcd static_field_;
  std::vector<Eigen::MatrixXcd> per_frame_;
};

// Factorization cache of one bin's mixture; shareable between filters that
// differ only in steering.
class BinNoiseModel {
 public:
  explicit BinNoiseModel(GaussianMixture mixture);

  const GaussianMixture& mixture() const { return mixture_; }
  int dim() const { return mixture_.dim(); }
  int components() const { return mixture_.components(); }

  const HermitianFactor& component_factor(int m) const { return factors_[m]; }
  const HermitianFactor& aggregate_factor() const { return *aggregate_; }
  const Eigen::MatrixXcd& component_covariance(int m) const {
    return mixture_.covariances[m];
  }
  double log_weight(int m) const { return log_weights_[m]; }
  double weight(int m) const { return mixture_.weights[m]; }

 private:
  GaussianMixture mixture_;
  std::vector<HermitianFactor> factors_;
  std::vector<double> log_weights_;
  std::unique_ptr<HermitianFactor> aggregate_;
};

// Per-bin estimator context: steering vector, noise mixture and speech
// shape bound together, with everything frame-independent precomputed.
class BinFilter {
 public:
  BinFilter(Eigen::VectorXcd steering, GaussianMixture mixture,
            double nu = 0.25);
  BinFilter(Eigen::VectorXcd steering,
            std::shared_ptr<const BinNoiseModel> noise, double nu);

  // Same noise model, different steering.
  BinFilter rebind(Eigen::VectorXcd steering) const;

  int dim() const { return static_cast<int>(steering_.size()); }
  int components() const { return noise_->components(); }
  double nu() const { return nu_; }

  // T_MVDR with the aggregate noise covariance; distortionless.
  std::complex<double> mvdr(const Eigen::VectorXcd& y) const;

  // T_MVDR with component m's covariance in place of the aggregate.
  std::complex<double> mvdr_component(int m, const Eigen::VectorXcd& y) const;

  // Multichannel Wiener filter sigma_s^2/(sigma_s^2 + (d^H Sigma_n^-1 d)^-1)
  // applied to the MVDR output.
  std::complex<double> mwf(double sigma_s2, const Eigen::VectorXcd& y) const;

  // Joint spatial-spectral MMSE estimator under the mixture model,
  // evaluated in the log domain.
  std::complex<double> nonlinear_mmse(double sigma_s2,
                                      const Eigen::VectorXcd& y) const;

  // MVDR followed by the MMSE-optimal spectral postfilter; the gain is real
  // and nonnegative, so the output keeps the MVDR phase.
  std::complex<double> mvdr_postfilter(double sigma_s2,
                                       const Eigen::VectorXcd& y) const;

  std::complex<double> apply(Method method, double sigma_s2,
                             const Eigen::VectorXcd& y) const;

  // Residual noise power at the MVDR output: (d^H Sigma_n^-1 d)^-1.
  double residual_noise_power() const { return 1.0 / aggregate_gain_; }

  // Component variance at the MVDR output (the postfilter's sigma_m^2).
  double component_output_variance(int m) const { return post_sigma2_[m]; }

  const Eigen::VectorXcd& steering() const { return steering_; }
  const BinNoiseModel& noise() const { return *noise_; }

 private:
  Eigen::VectorXcd steering_;
  double nu_;
  std::shared_ptr<const BinNoiseModel> noise_;

  // Per component: Sigma_m^{-1} d and d^H Sigma_m^{-1} d.
  std::vector<Eigen::VectorXcd> component_inv_d_;
  std::vector<double> component_gain_;
  // Aggregate Sigma_n quantities.
  Eigen::VectorXcd aggregate_inv_d_;
  double aggregate_gain_ = 0.0;
  std::vector<double> post_sigma2_;
};

// Temporal-cepstrum-smoothed speech power estimate from the periodogram of
// a single-channel signal (typically the MVDR output) and the residual
// noise PSD. Output is floored at 1e-6 times the mean noise power.
Eigen::ArrayXXd estimate_speech_psd(const Eigen::ArrayXXd& periodogram,
                                    const Eigen::ArrayXd& noise_psd,
                                    double sample_rate);

// Oracle speech power: recursive smoothing of |S|^2 with the given constant
// (per frame), floored at a small fraction of the overall mean power.
Eigen::ArrayXXd oracle_speech_psd(const Spectrogram& clean, int ref_channel,
                                  double smoothing = 0.72);

// Per-frame steering estimates: recursive smoothing of the clean-speech
// outer products followed by a principal-eigenvector extraction, rescaled
// so the reference-microphone entry is one. Zero-energy bins fall back to
// the previous frame (all-ones at the start).
std::vector<Eigen::MatrixXcd> estimate_steering(const Spectrogram& clean,
                                                double smoothing = 0.9);

// Full enhancement pass: applies the selected estimator per (bin, frame)
// and resynthesizes a mono signal.
struct EnhanceInput {
  const Spectrogram* noisy = nullptr;
  const NoiseModel* noise = nullptr;
  SteeringField steering;
  SpeechPrior prior;
  StftConfig stft;
};

Eigen::VectorXd enhance(const EnhanceInput& input, Method method,
                        Eigen::Index output_length = -1);

// The estimator outputs as a single-channel spectrogram (no synthesis).
Spectrogram enhance_spectrogram(const EnhanceInput& input, Method method);

// MVDR output together with the residual noise power (d^H Sigma_n^-1 d)^-1
// per (bin, frame); the pair feeds the cepstral speech-power estimator.
struct MvdrPass {
  Spectrogram output;              // single channel
  Eigen::ArrayXXd residual_noise;  // bins x frames
};

MvdrPass mvdr_pass(const Spectrogram& noisy, const NoiseModel& noise,
                   const SteeringField& steering);

}  // namespace nsf
