// Minimal RIFF/WAVE reader and writer (16-bit PCM and 32-bit float).
#pragma once

#include <Eigen/Dense>
#include <string>

namespace nsf {

struct WavData {
  double sample_rate = 0.0;
  Eigen::MatrixXd samples;  // samples x channels, nominal range [-1, 1]
};

WavData read_wav(const std::string& path);

// bits must be 16 (PCM, clamped) or 32 (IEEE float).
void write_wav(const std::string& path, const WavData& data, int bits = 32);

}  // namespace nsf
