#include "nsf/filters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nsf/fft.hpp"
#include "nsf/parallel.hpp"

namespace nsf {

Method method_from_string(const std::string& name) {
  if (name == "mvdr") return Method::kMvdr;
  if (name == "mwf") return Method::kMwf;
  if (name == "mvdr-mmse") return Method::kMvdrMmse;
  if (name == "nl-mmse") return Method::kNlMmse;
  throw ConfigError("unknown method '" + name +
                    "' (expected mvdr|mwf|mvdr-mmse|nl-mmse)");
}

std::string to_string(Method method) {
  switch (method) {
    case Method::kMvdr: return "mvdr";
    case Method::kMwf: return "mwf";
    case Method::kMvdrMmse: return "mvdr-mmse";
    case Method::kNlMmse: return "nl-mmse";
  }
  return "?";
}

SteeringField SteeringField::ones(int bins, int channels) {
  return fixed(Eigen::MatrixXcd::Ones(bins, channels));
}

SteeringField SteeringField::fixed(Eigen::MatrixXcd bins_by_channels) {
  SteeringField f;
  f.static_field_ = std::move(bins_by_channels);
  return f;
}

SteeringField SteeringField::time_varying(
    std::vector<Eigen::MatrixXcd> per_frame) {
  if (per_frame.empty()) {
    throw ConfigError("SteeringField: no frames");
  }
  SteeringField f;
  f.per_frame_ = std::move(per_frame);
  return f;
}

int SteeringField::bins() const {
  return static_cast<int>(is_static() ? static_field_.rows()
                                      : per_frame_[0].rows());
}

int SteeringField::channels() const {
  return static_cast<int>(is_static() ? static_field_.cols()
                                      : per_frame_[0].cols());
}

Eigen::VectorXcd SteeringField::at(int bin, int frame) const {
  if (is_static()) return static_field_.row(bin).transpose();
  return per_frame_[frame].row(bin).transpose();
}

BinNoiseModel::BinNoiseModel(GaussianMixture mixture)
    : mixture_(std::move(mixture)) {
  mixture_.validate();
  factors_.reserve(mixture_.components());
  log_weights_.reserve(mixture_.components());
  for (int m = 0; m < mixture_.components(); ++m) {
    factors_.emplace_back(mixture_.covariances[m]);
    log_weights_.push_back(std::log(mixture_.weights[m]));
  }
  aggregate_ =
      std::make_unique<HermitianFactor>(mixture_.aggregate_covariance());
}

BinFilter::BinFilter(Eigen::VectorXcd steering, GaussianMixture mixture,
                     double nu)
    : BinFilter(std::move(steering),
                std::make_shared<const BinNoiseModel>(std::move(mixture)),
                nu) {}

BinFilter::BinFilter(Eigen::VectorXcd steering,
                     std::shared_ptr<const BinNoiseModel> noise, double nu)
    : steering_(std::move(steering)), nu_(nu), noise_(std::move(noise)) {
  if (!(nu_ > 0.0)) throw DomainError("BinFilter: nu must be positive");
  if (steering_.size() != noise_->dim()) {
    throw ConfigError("BinFilter: steering does not match noise dimension");
  }
  if (steering_.norm() == 0.0) {
    throw ConfigError("BinFilter: steering vector must be nonzero");
  }
  const int m = noise_->components();
  component_inv_d_.reserve(m);
  component_gain_.reserve(m);
  for (int c = 0; c < m; ++c) {
    component_inv_d_.push_back(noise_->component_factor(c).solve(steering_));
    const double gain = steering_.dot(component_inv_d_[c]).real();
    if (!(gain > 0.0)) {
      throw NotPositiveDefinite("BinFilter: nonpositive component gain");
    }
    component_gain_.push_back(gain);
  }
  aggregate_inv_d_ = noise_->aggregate_factor().solve(steering_);
  aggregate_gain_ = steering_.dot(aggregate_inv_d_).real();
  if (!(aggregate_gain_ > 0.0)) {
    throw NotPositiveDefinite("BinFilter: nonpositive aggregate gain");
  }
  post_sigma2_.reserve(m);
  for (int c = 0; c < m; ++c) {
    // sigma_m^2 = d^H Sn^-1 Sigma_m Sn^-1 d / (d^H Sn^-1 d)^2
    const double s2 =
        aggregate_inv_d_.dot(noise_->component_covariance(c) *
                             aggregate_inv_d_)
            .real() /
        (aggregate_gain_ * aggregate_gain_);
    if (!(s2 > 0.0)) {
      throw NotPositiveDefinite(
          "BinFilter: component has zero variance at the MVDR output");
    }
    post_sigma2_.push_back(s2);
  }
}

BinFilter BinFilter::rebind(Eigen::VectorXcd steering) const {
  return BinFilter(std::move(steering), noise_, nu_);
}

std::complex<double> BinFilter::mvdr(const Eigen::VectorXcd& y) const {
  return aggregate_inv_d_.dot(y) / aggregate_gain_;
}

std::complex<double> BinFilter::mvdr_component(
    int m, const Eigen::VectorXcd& y) const {
  return component_inv_d_[m].dot(y) / component_gain_[m];
}

std::complex<double> BinFilter::mwf(double sigma_s2,
                                    const Eigen::VectorXcd& y) const {
  if (!(sigma_s2 > 0.0)) return 0.0;
  const double gain = sigma_s2 / (sigma_s2 + residual_noise_power());
  return gain * mvdr(y);
}

std::complex<double> BinFilter::nonlinear_mmse(
    double sigma_s2, const Eigen::VectorXcd& y) const {
  if (!(sigma_s2 > 0.0)) return 0.0;
  const int m = components();
  const double log_sigma_s2 = std::log(sigma_s2);

  Eigen::ArrayXd log_den(m);
  Eigen::ArrayXd log_num(m);
  Eigen::VectorXcd coeff(m);
  for (int c = 0; c < m; ++c) {
    const double gain = component_gain_[c];
    const std::complex<double> t = component_inv_d_[c].dot(y) / gain;
    const double quad = noise_->component_factor(c).quadratic(y);
    const double lambda = nu_ + gain * sigma_s2;  // nu + d^H S^-1 d sigma_s2
    const double p = sigma_s2 * gain * gain * std::norm(t) / lambda;
    const double base = noise_->log_weight(c) - quad -
                        noise_->component_factor(c).log_det() -
                        nu_ * std::log(lambda);
    log_den(c) = base + log_kummer_m(nu_, 1.0, p);
    // sigma_s2 / (nu / gain + sigma_s2) == sigma_s2 * gain / lambda
    log_num(c) = base + log_kummer_m(nu_ + 1.0, 2.0, p) + log_sigma_s2 +
                 std::log(gain) - std::log(lambda);
    coeff(c) = t;
  }

  const double num_max = log_num.maxCoeff();
  const double den_max = log_den.maxCoeff();
  std::complex<double> num_sum = 0.0;
  double den_sum = 0.0;
  for (int c = 0; c < m; ++c) {
    num_sum += coeff(c) * std::exp(log_num(c) - num_max);
    den_sum += std::exp(log_den(c) - den_max);
  }
  const std::complex<double> result =
      nu_ * std::exp(num_max - den_max) * num_sum / den_sum;
  if (!std::isfinite(result.real()) || !std::isfinite(result.imag())) {
    throw NumericalOverflow("nonlinear_mmse: log-domain combination failed");
  }
  return result;
}

std::complex<double> BinFilter::mvdr_postfilter(
    double sigma_s2, const Eigen::VectorXcd& y) const {
  const std::complex<double> z = mvdr(y);
  if (!(sigma_s2 > 0.0)) return 0.0;
  const int m = components();
  const double z2 = std::norm(z);
  const double log_sigma_s2 = std::log(sigma_s2);

  Eigen::ArrayXd log_den(m);
  Eigen::ArrayXd log_num(m);
  for (int c = 0; c < m; ++c) {
    const double s2 = post_sigma2_[c];
    const double p = sigma_s2 * z2 / (s2 * (nu_ * s2 + sigma_s2));
    const double log_q = -nu_ * std::log(1.0 / s2 + nu_ / sigma_s2);
    const double base =
        noise_->log_weight(c) - std::log(s2) - z2 / s2 + log_q;
    log_den(c) = base + log_kummer_m(nu_, 1.0, p);
    log_num(c) = base + log_kummer_m(nu_ + 1.0, 2.0, p) + log_sigma_s2 -
                 std::log(nu_ * s2 + sigma_s2);
  }
  const double num_max = log_num.maxCoeff();
  const double den_max = log_den.maxCoeff();
  double num_sum = 0.0;
  double den_sum = 0.0;
  for (int c = 0; c < m; ++c) {
    num_sum += std::exp(log_num(c) - num_max);
    den_sum += std::exp(log_den(c) - den_max);
  }
  const double gain = nu_ * std::exp(num_max - den_max) * num_sum / den_sum;
  if (!std::isfinite(gain)) {
    throw NumericalOverflow("mvdr_postfilter: log-domain combination failed");
  }
  return gain * z;
}

std::complex<double> BinFilter::apply(Method method, double sigma_s2,
                                      const Eigen::VectorXcd& y) const {
  switch (method) {
    case Method::kMvdr: return mvdr(y);
    case Method::kMwf: return mwf(sigma_s2, y);
    case Method::kMvdrMmse: return mvdr_postfilter(sigma_s2, y);
    case Method::kNlMmse: return nonlinear_mmse(sigma_s2, y);
  }
  throw ConfigError("BinFilter::apply: unknown method");
}

Eigen::ArrayXXd estimate_speech_psd(const Eigen::ArrayXXd& periodogram,
                                    const Eigen::ArrayXd& noise_psd,
                                    double sample_rate) {
  const int bins = static_cast<int>(periodogram.rows());
  const int frames = static_cast<int>(periodogram.cols());
  if (noise_psd.size() != bins) {
    throw ConfigError("estimate_speech_psd: noise_psd size mismatch");
  }
  const double mean_noise = noise_psd.mean();
  const double floor = std::max(1e-6 * mean_noise, 1e-300);

  const int n = 2 * (bins - 1);  // cepstrum length (even spectrum extension)
  RealDft dft(n);

  // Quefrency-dependent recursive smoothing constants: light smoothing for
  // the envelope (low quefrency), heavy smoothing for the fine structure,
  // and a protected region around the detected pitch quefrency.
  const int env_edge = std::max(2, static_cast<int>(sample_rate / 1000.0));
  const int pitch_lo =
      std::min(bins - 1, static_cast<int>(sample_rate / 500.0));
  const int pitch_hi =
      std::min(bins - 1, static_cast<int>(sample_rate / 60.0));
  Eigen::ArrayXd beta(bins);
  for (int q = 0; q < bins; ++q) {
    beta[q] = (q <= env_edge) ? 0.5 : 0.92;
  }
  beta[0] = 0.2;

  std::vector<double> even(n);
  std::vector<std::complex<double>> spec(bins);
  Eigen::ArrayXd cepstrum(bins);
  Eigen::ArrayXd smoothed(bins);
  Eigen::ArrayXXd out(bins, frames);

  for (int i = 0; i < frames; ++i) {
    // ML speech power and its log spectrum.
    for (int k = 0; k < bins; ++k) {
      even[k] = std::log(std::max(periodogram(k, i) - noise_psd(k), floor));
    }
    for (int k = 1; k < bins - 1; ++k) even[n - k] = even[k];
    // Real even sequence: cepstrum = DFT/n (real-valued).
    dft.forward(even, spec);
    for (int q = 0; q < bins; ++q) cepstrum[q] = spec[q].real() / n;

    if (i == 0) {
      smoothed = cepstrum;
    } else {
      // Pitch protection: strongest cepstral peak in the plausible range.
      int pitch = pitch_lo;
      double peak = -std::numeric_limits<double>::infinity();
      for (int q = pitch_lo; q <= pitch_hi; ++q) {
        if (cepstrum[q] > peak) {
          peak = cepstrum[q];
          pitch = q;
        }
      }
      for (int q = 0; q < bins; ++q) {
        double b = beta[q];
        if (q >= pitch - 1 && q <= pitch + 1 && q >= pitch_lo) b = 0.3;
        smoothed[q] = b * smoothed[q] + (1.0 - b) * cepstrum[q];
      }
    }

    // Back to the log spectrum.
    for (int q = 0; q < bins; ++q) even[q] = smoothed[q];
    for (int q = 1; q < bins - 1; ++q) even[n - q] = smoothed[q];
    dft.forward(even, spec);
    for (int k = 0; k < bins; ++k) {
      out(k, i) = std::max(std::exp(spec[k].real()), floor);
    }
  }
  return out;
}

Eigen::ArrayXXd oracle_speech_psd(const Spectrogram& clean, int ref_channel,
                                  double smoothing) {
  const int bins = clean.bins();
  const int frames = clean.frames();
  Eigen::ArrayXXd psd(bins, frames);
  const Eigen::ArrayXXd power = clean.power(ref_channel);
  for (int k = 0; k < bins; ++k) {
    double state = power(k, 0);
    psd(k, 0) = state;
    for (int i = 1; i < frames; ++i) {
      state = smoothing * state + (1.0 - smoothing) * power(k, i);
      psd(k, i) = state;
    }
  }
  const double floor = std::max(1e-10 * power.mean(), 1e-300);
  return psd.max(floor);
}

std::vector<Eigen::MatrixXcd> estimate_steering(const Spectrogram& clean,
                                                double smoothing) {
  const int bins = clean.bins();
  const int frames = clean.frames();
  const int d = clean.channels();
  std::vector<Eigen::MatrixXcd> steering(
      frames, Eigen::MatrixXcd::Ones(bins, d));

  parallel_for(0, bins, [&](int k) {
    Eigen::MatrixXcd phi = Eigen::MatrixXcd::Zero(d, d);
    Eigen::VectorXcd current = Eigen::VectorXcd::Ones(d);
    for (int i = 0; i < frames; ++i) {
      const Eigen::VectorXcd s = clean.channel_vector(k, i);
      phi = smoothing * phi + (1.0 - smoothing) * (s * s.adjoint());
      const double scale = phi.trace().real();
      if (scale > 1e-300) {
        const Eigen::VectorXcd v = principal_eigenvector(phi);
        // Relative-transfer-function normalization: unit reference entry.
        if (std::abs(v(0)) > 1e-6 * v.norm()) {
          current = v / v(0);
        }
      }
      steering[i].row(k) = current.transpose();
    }
  });
  return steering;
}

namespace {

void check_enhance_input(const EnhanceInput& input) {
  if (input.noisy == nullptr || input.noise == nullptr) {
    throw ConfigError("enhance: missing noisy spectrogram or noise model");
  }
  const Spectrogram& noisy = *input.noisy;
  if (input.noise->num_bins != noisy.bins() ||
      input.noise->num_channels != noisy.channels()) {
    throw ConfigError("enhance: noise model does not match spectrogram");
  }
  if (input.steering.bins() != noisy.bins() ||
      input.steering.channels() != noisy.channels()) {
    throw ConfigError("enhance: steering field does not match spectrogram");
  }
  if (input.prior.sigma_s2.rows() != noisy.bins() ||
      input.prior.sigma_s2.cols() != noisy.frames()) {
    throw ConfigError("enhance: speech prior does not match spectrogram");
  }
}

}  // namespace

Spectrogram enhance_spectrogram(const EnhanceInput& input, Method method) {
  check_enhance_input(input);
  const Spectrogram& noisy = *input.noisy;
  const int bins = noisy.bins();
  const int frames = noisy.frames();
  Spectrogram out(bins, frames, 1);

  parallel_for(0, bins, [&](int k) {
    // One shared factorization per (bin, noise window).
    std::vector<std::shared_ptr<const BinNoiseModel>> window_models(
        input.noise->windows.size());
    int current_window = -1;
    std::unique_ptr<BinFilter> filter;
    for (int i = 0; i < frames; ++i) {
      const int w = input.noise->window_index(i);
      const bool new_window = w != current_window;
      if (new_window && !window_models[w]) {
        window_models[w] = std::make_shared<const BinNoiseModel>(
            input.noise->windows[w].bins[k]);
      }
      if (new_window || !input.steering.is_static()) {
        filter = std::make_unique<BinFilter>(input.steering.at(k, i),
                                             window_models[w],
                                             input.prior.nu);
        current_window = w;
      }
      out(k, i, 0) = filter->apply(method, input.prior.sigma_s2(k, i),
                                   noisy.channel_vector(k, i));
    }
  });
  return out;
}

Eigen::VectorXd enhance(const EnhanceInput& input, Method method,
                        Eigen::Index output_length) {
  return synthesize_mono(enhance_spectrogram(input, method), input.stft,
                         output_length);
}

MvdrPass mvdr_pass(const Spectrogram& noisy, const NoiseModel& noise,
                   const SteeringField& steering) {
  if (noise.num_bins != noisy.bins() ||
      noise.num_channels != noisy.channels()) {
    throw ConfigError("mvdr_pass: noise model does not match spectrogram");
  }
  const int bins = noisy.bins();
  const int frames = noisy.frames();
  MvdrPass result{Spectrogram(bins, frames, 1),
                  Eigen::ArrayXXd(bins, frames)};

  parallel_for(0, bins, [&](int k) {
    std::vector<std::shared_ptr<const BinNoiseModel>> window_models(
        noise.windows.size());
    int current_window = -1;
    std::unique_ptr<BinFilter> filter;
    for (int i = 0; i < frames; ++i) {
      const int w = noise.window_index(i);
      const bool new_window = w != current_window;
      if (new_window && !window_models[w]) {
        window_models[w] =
            std::make_shared<const BinNoiseModel>(noise.windows[w].bins[k]);
      }
      if (new_window || !steering.is_static()) {
        filter = std::make_unique<BinFilter>(steering.at(k, i),
                                             window_models[w], 1.0);
        current_window = w;
      }
      result.output(k, i, 0) = filter->mvdr(noisy.channel_vector(k, i));
      result.residual_noise(k, i) = filter->residual_noise_power();
    }
  });
  return result;
}

}  // namespace nsf
