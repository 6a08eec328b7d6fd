#include "nsf/stft.hpp"

#include <cmath>
#include <numbers>

#include "nsf/fft.hpp"

namespace nsf {

namespace {

int integral_samples(double ms, double sample_rate, const char* what) {
  const double exact = ms * sample_rate / 1000.0;
  const double rounded = std::round(exact);
  if (std::abs(exact - rounded) > 1e-6 || rounded < 1.0) {
    throw ConfigError(std::string("StftConfig: ") + what +
                      " is not an integral number of samples");
  }
  return static_cast<int>(rounded);
}

}  // namespace

int StftConfig::window_samples() const {
  return integral_samples(window_ms, sample_rate, "window length");
}

int StftConfig::shift_samples() const {
  return integral_samples(shift_ms, sample_rate, "shift");
}

int StftConfig::frame_count(Eigen::Index num_samples) const {
  const int window = window_samples();
  const int shift = shift_samples();
  if (num_samples < window) {
    throw ConfigError("StftConfig: signal shorter than one window");
  }
  const Eigen::Index tail = num_samples - window;
  return static_cast<int>((tail + shift - 1) / shift) + 1;
}

void StftConfig::validate() const {
  if (!(sample_rate > 0.0)) {
    throw ConfigError("StftConfig: sample_rate must be positive");
  }
  const int window = window_samples();
  const int shift = shift_samples();
  if (window % shift != 0) {
    throw ConfigError("StftConfig: shift must divide the window length");
  }
  const int overlap_factor = window / shift;
  if (overlap_factor < 2) {
    throw ConfigError("StftConfig: window must overlap (window/shift >= 2)");
  }
  // Overlap-add identity: analysis window times (normalized) synthesis
  // window must sum to one at every offset.
  const Eigen::VectorXd w = sqrt_hann_window(window);
  const double synth_scale = 2.0 * shift / window;
  for (int offset = 0; offset < shift; ++offset) {
    double sum = 0.0;
    for (int m = 0; m * shift + offset < window; ++m) {
      const double v = w[m * shift + offset];
      sum += v * v * synth_scale;
    }
    if (std::abs(sum - 1.0) > 1e-10) {
      throw ConfigError("StftConfig: window does not satisfy overlap-add");
    }
  }
}

Eigen::VectorXd sqrt_hann_window(int n) {
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) {
    // sqrt of the periodic Hann window == half-sine.
    w[i] = std::sin(std::numbers::pi * i / n);
  }
  return w;
}

Spectrogram::Spectrogram(int num_bins, int num_frames, int num_channels)
    : bins_(num_bins),
      frames_(num_frames),
      channels_(num_channels),
      data_(static_cast<std::size_t>(num_bins) * num_frames * num_channels) {
  if (num_bins < 1 || num_frames < 1 || num_channels < 1) {
    throw ConfigError("Spectrogram: all dimensions must be at least 1");
  }
}

Spectrogram Spectrogram::channel(int ch) const {
  Spectrogram out(bins_, frames_, 1);
  for (int k = 0; k < bins_; ++k) {
    for (int i = 0; i < frames_; ++i) {
      out(k, i, 0) = (*this)(k, i, ch);
    }
  }
  return out;
}

Eigen::ArrayXXd Spectrogram::power(int channel) const {
  Eigen::ArrayXXd p(bins_, frames_);
  for (int k = 0; k < bins_; ++k) {
    for (int i = 0; i < frames_; ++i) {
      p(k, i) = std::norm((*this)(k, i, channel));
    }
  }
  return p;
}

double Spectrogram::total_power(int channel) const {
  double sum = 0.0;
  for (int k = 0; k < bins_; ++k) {
    for (int i = 0; i < frames_; ++i) {
      sum += std::norm((*this)(k, i, channel));
    }
  }
  return sum;
}

Spectrogram& Spectrogram::operator+=(const Spectrogram& other) {
  if (bins_ != other.bins_ || frames_ != other.frames_ ||
      channels_ != other.channels_) {
    throw ConfigError("Spectrogram: dimension mismatch in +=");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Spectrogram& Spectrogram::operator*=(double scale) {
  for (auto& v : data_) v *= scale;
  return *this;
}

Spectrogram analyze(const Eigen::MatrixXd& samples, const StftConfig& cfg) {
  cfg.validate();
  const int window = cfg.window_samples();
  const int shift = cfg.shift_samples();
  const int bins = cfg.num_bins();
  const Eigen::Index n = samples.rows();
  const int channels = static_cast<int>(samples.cols());
  if (channels < 1) throw ConfigError("analyze: no channels");
  const int frames = cfg.frame_count(n);

  const Eigen::VectorXd w = sqrt_hann_window(window);
  Spectrogram out(bins, frames, channels);
  RealDft dft(window);
  std::vector<double> buf(window);
  std::vector<std::complex<double>> coeffs(bins);
  for (int ch = 0; ch < channels; ++ch) {
    for (int i = 0; i < frames; ++i) {
      const Eigen::Index start = static_cast<Eigen::Index>(i) * shift;
      for (int t = 0; t < window; ++t) {
        const Eigen::Index idx = start + t;
        buf[t] = (idx < n) ? samples(idx, ch) * w[t] : 0.0;
      }
      dft.forward(buf, coeffs);
      for (int k = 0; k < bins; ++k) out(k, i, ch) = coeffs[k];
    }
  }
  return out;
}

Eigen::MatrixXd synthesize(const Spectrogram& spec, const StftConfig& cfg,
                           Eigen::Index output_length) {
  cfg.validate();
  const int window = cfg.window_samples();
  const int shift = cfg.shift_samples();
  if (spec.bins() != cfg.num_bins()) {
    throw ConfigError("synthesize: spectrogram bins do not match config");
  }
  const int frames = spec.frames();
  const int channels = spec.channels();
  const Eigen::Index total =
      static_cast<Eigen::Index>(frames - 1) * shift + window;
  if (output_length > total) {
    throw ConfigError("synthesize: requested length exceeds signal extent");
  }

  Eigen::VectorXd w = sqrt_hann_window(window);
  w *= 2.0 * shift / window;  // overlap-add normalization
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(total, channels);
  RealDft dft(window);
  std::vector<std::complex<double>> coeffs(spec.bins());
  std::vector<double> buf(window);
  for (int ch = 0; ch < channels; ++ch) {
    for (int i = 0; i < frames; ++i) {
      for (int k = 0; k < spec.bins(); ++k) coeffs[k] = spec(k, i, ch);
      dft.inverse(coeffs, buf);
      const Eigen::Index start = static_cast<Eigen::Index>(i) * shift;
      for (int t = 0; t < window; ++t) {
        out(start + t, ch) += buf[t] * w[t];
      }
    }
  }
  if (output_length >= 0 && output_length < total) {
    out.conservativeResize(output_length, Eigen::NoChange);
  }
  return out;
}

Spectrogram analyze_mono(const Eigen::VectorXd& samples,
                         const StftConfig& cfg) {
  return analyze(Eigen::MatrixXd(samples), cfg);
}

Eigen::VectorXd synthesize_mono(const Spectrogram& spec, const StftConfig& cfg,
                                Eigen::Index output_length) {
  if (spec.channels() != 1) {
    throw ConfigError("synthesize_mono: spectrogram is not single-channel");
  }
  return synthesize(spec, cfg, output_length).col(0);
}

}  // namespace nsf
