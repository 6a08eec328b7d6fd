// Scenario construction: array geometry, steering vectors, diffuse-field
// covariances and directivity patterns.
//
// Angle convention: angles are measured in the array plane from the array
// axis (x axis). Broadside is pi/2. Far-field plane-wave propagation with
// delays only, referenced to the first microphone.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nsf/stft.hpp"

namespace nsf {

struct ArrayGeometry {
  // 3D microphone positions in meters, one column per microphone.
  Eigen::Matrix3Xd positions;
  double speed_of_sound = 343.0;

  int size() const { return static_cast<int>(positions.cols()); }

  // Uniform linear array along the x axis, centered on the origin.
  static ArrayGeometry linear(int count, double spacing);

  // Parses "linear:<count>x<spacing_m>", e.g. "linear:2x0.06".
  static ArrayGeometry parse(const std::string& description);

  void validate() const;  // >= 2 distinct microphones
};

struct Scenario {
  ArrayGeometry geometry;
  double target_angle = 1.5707963267948966;  // broadside
  std::vector<double> interferer_angles;
  double snr_db = 0.0;
  StftConfig stft;

  void validate() const;
};

// Interferer placement used by the multi-source experiments:
// theta_i = pi/6 + 2 pi i / count.
std::vector<double> ring_interferer_angles(int count);

// Far-field steering vector d with d_l = exp(-j 2 pi f tau_l), tau_l the
// arrival delay of microphone l relative to the first one. All entries have
// unit magnitude.
Eigen::VectorXcd steering_vector(const ArrayGeometry& geometry, double angle,
                                 double frequency);

// Spherically isotropic diffuse-field coherence sinc(2 pi f d / c), blended
// with a white_fraction portion of spatially white noise; unit diagonal.
Eigen::MatrixXcd diffuse_covariance(const ArrayGeometry& geometry,
                                    double frequency, double white_fraction);

// Multiplies the mono source STFT by the per-bin steering vector, realizing
// fractional delays exactly in the frequency domain.
Spectrogram spatialize(const Eigen::VectorXd& source,
                       const ArrayGeometry& geometry, double angle,
                       const StftConfig& cfg);

struct DirectivityPattern {
  std::vector<double> frequencies;  // Hz
  std::vector<double> angles;       // radians
  Eigen::MatrixXd gains_db;         // frequencies x angles

  // CSV rows "frequency_hz,angle_deg,gain_db" with a header line.
  void write_csv(std::ostream& os) const;
};

// Gain 20 log10 |w(f)^H d(theta, f)| per (frequency, angle).
DirectivityPattern directivity(
    const std::function<Eigen::VectorXcd(double frequency)>& weights,
    const ArrayGeometry& geometry, std::span<const double> angles,
    std::span<const double> frequencies);

// MVDR weight vector Sigma^{-1} d / (d^H Sigma^{-1} d).
Eigen::VectorXcd mvdr_weights(const Eigen::MatrixXcd& noise_covariance,
                              const Eigen::VectorXcd& steering);

// Regular angle grid over [0, 2 pi) with the given step in degrees.
std::vector<double> angle_grid(double step_degrees = 1.0);

}  // namespace nsf
