// Short-time Fourier analysis/synthesis with square-root Hann windows.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "nsf/errors.hpp"

namespace nsf {

struct StftConfig {
  double sample_rate = 16000.0;
  double window_ms = 32.0;
  double shift_ms = 16.0;

  int window_samples() const;
  int shift_samples() const;
  int fft_size() const { return window_samples(); }
  int num_bins() const { return fft_size() / 2 + 1; }
  double bin_frequency(int bin) const {
    return bin * sample_rate / fft_size();
  }
  // Number of analysis frames covering num_samples samples.
  int frame_count(Eigen::Index num_samples) const;

  // Throws ConfigError if the window/shift pair is not realizable (lengths
  // not integral in samples, shift not dividing the window, or the
  // overlap-add identity violated).
  void validate() const;
};

// Square-root periodic Hann window of length n.
Eigen::VectorXd sqrt_hann_window(int n);

// Complex STFT coefficients indexed (bin, frame, channel). The channel
// vector of a (bin, frame) cell is contiguous.
class Spectrogram {
 public:
  Spectrogram() = default;
  Spectrogram(int num_bins, int num_frames, int num_channels);

  int bins() const { return bins_; }
  int frames() const { return frames_; }
  int channels() const { return channels_; }

  std::complex<double>& operator()(int bin, int frame, int channel) {
    return data_[index(bin, frame, channel)];
  }
  const std::complex<double>& operator()(int bin, int frame,
                                         int channel) const {
    return data_[index(bin, frame, channel)];
  }

  // View of the length-D channel vector at one time-frequency cell.
  Eigen::Map<Eigen::VectorXcd> channel_vector(int bin, int frame) {
    return {&data_[index(bin, frame, 0)], channels_};
  }
  Eigen::Map<const Eigen::VectorXcd> channel_vector(int bin, int frame) const {
    return {&data_[index(bin, frame, 0)], channels_};
  }

  // Single-channel copy.
  Spectrogram channel(int ch) const;

  // |X|^2 of one channel as a (bins x frames) array.
  Eigen::ArrayXXd power(int channel) const;

  double total_power(int channel) const;

  Spectrogram& operator+=(const Spectrogram& other);
  Spectrogram& operator*=(double scale);

 private:
  std::size_t index(int bin, int frame, int channel) const {
    return (static_cast<std::size_t>(bin) * frames_ + frame) * channels_ +
           channel;
  }

  int bins_ = 0;
  int frames_ = 0;
  int channels_ = 0;
  std::vector<std::complex<double>> data_;
};

// One-sided STFT of a multichannel signal (samples x channels). The frame
// grid starts at sample 0 and the tail is zero-padded so every sample is
// covered.
Spectrogram analyze(const Eigen::MatrixXd& samples, const StftConfig& cfg);

// Overlap-add synthesis, the inverse of analyze in the interior. If
// output_length >= 0 the result is trimmed to that many samples.
Eigen::MatrixXd synthesize(const Spectrogram& spec, const StftConfig& cfg,
                           Eigen::Index output_length = -1);

// Convenience single-channel wrappers.
Spectrogram analyze_mono(const Eigen::VectorXd& samples, const StftConfig& cfg);
Eigen::VectorXd synthesize_mono(const Spectrogram& spec, const StftConfig& cfg,
                                Eigen::Index output_length = -1);

}  // namespace nsf
