#include "nsf/spatial.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "nsf/numerics.hpp"

namespace nsf {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double unnormalized_sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}
}  // namespace

ArrayGeometry ArrayGeometry::linear(int count, double spacing) {
  if (count < 2 || !(spacing > 0.0)) {
    throw ConfigError("ArrayGeometry::linear: need >= 2 mics, spacing > 0");
  }
  ArrayGeometry g;
  g.positions.resize(3, count);
  const double origin = -0.5 * spacing * (count - 1);
  for (int i = 0; i < count; ++i) {
    g.positions.col(i) << origin + i * spacing, 0.0, 0.0;
  }
  return g;
}

ArrayGeometry ArrayGeometry::parse(const std::string& description) {
  const std::string prefix = "linear:";
  if (description.rfind(prefix, 0) != 0) {
    throw ConfigError("ArrayGeometry::parse: expected 'linear:<n>x<spacing>'");
  }
  const std::string body = description.substr(prefix.size());
  const auto x = body.find('x');
  if (x == std::string::npos) {
    throw ConfigError("ArrayGeometry::parse: expected 'linear:<n>x<spacing>'");
  }
  try {
    const int count = std::stoi(body.substr(0, x));
    const double spacing = std::stod(body.substr(x + 1));
    return linear(count, spacing);
  } catch (const std::exception&) {
    throw ConfigError("ArrayGeometry::parse: malformed geometry '" +
                      description + "'");
  }
}

void ArrayGeometry::validate() const {
  if (size() < 2) throw ConfigError("ArrayGeometry: need >= 2 microphones");
  if (!(speed_of_sound > 0.0)) {
    throw ConfigError("ArrayGeometry: speed_of_sound must be positive");
  }
  for (int i = 0; i < size(); ++i) {
    for (int j = i + 1; j < size(); ++j) {
      if ((positions.col(i) - positions.col(j)).norm() < 1e-9) {
        throw ConfigError("ArrayGeometry: microphone positions must differ");
      }
    }
  }
}

void Scenario::validate() const {
  geometry.validate();
  stft.validate();
  if (!std::isfinite(snr_db)) throw ConfigError("Scenario: snr must be finite");
  for (double a : interferer_angles) {
    if (!(a >= 0.0) || !(a < kTwoPi)) {
      throw ConfigError("Scenario: interferer angles must lie in [0, 2pi)");
    }
  }
}

std::vector<double> ring_interferer_angles(int count) {
  std::vector<double> angles(count);
  for (int i = 0; i < count; ++i) {
    angles[i] = std::numbers::pi / 6.0 + kTwoPi * i / count;
  }
  return angles;
}

Eigen::VectorXcd steering_vector(const ArrayGeometry& geometry, double angle,
                                 double frequency) {
  if (!(frequency >= 0.0)) {
    throw DomainError("steering_vector: frequency must be >= 0");
  }
  const int d = geometry.size();
  // Unit vector pointing from the array toward the source.
  const Eigen::Vector3d source_dir(std::cos(angle), std::sin(angle), 0.0);
  Eigen::VectorXcd steering(d);
  const Eigen::Vector3d ref = geometry.positions.col(0);
  for (int l = 0; l < d; ++l) {
    const double delay =
        (ref - geometry.positions.col(l)).dot(source_dir) /
        geometry.speed_of_sound;
    const double phase = -kTwoPi * frequency * delay;
    steering(l) = std::polar(1.0, phase);
  }
  return steering;
}

Eigen::MatrixXcd diffuse_covariance(const ArrayGeometry& geometry,
                                    double frequency, double white_fraction) {
  if (white_fraction < 0.0 || white_fraction > 1.0) {
    throw DomainError("diffuse_covariance: white_fraction must be in [0, 1]");
  }
  const int d = geometry.size();
  Eigen::MatrixXcd cov(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const double dist =
          (geometry.positions.col(i) - geometry.positions.col(j)).norm();
      const double coherence = unnormalized_sinc(
          kTwoPi * frequency * dist / geometry.speed_of_sound);
      cov(i, j) = (1.0 - white_fraction) * coherence +
                  (i == j ? white_fraction : 0.0);
    }
  }
  // Already unit-diagonal by construction; rescale defensively in case of
  // rounding in the blend.
  for (int i = 0; i < d; ++i) cov(i, i) = 1.0;
  return cov;
}

Spectrogram spatialize(const Eigen::VectorXd& source,
                       const ArrayGeometry& geometry, double angle,
                       const StftConfig& cfg) {
  if (source.size() == 0) throw ConfigError("spatialize: empty source");
  const Spectrogram mono = analyze_mono(source, cfg);
  Spectrogram out(mono.bins(), mono.frames(), geometry.size());
  for (int k = 0; k < mono.bins(); ++k) {
    const Eigen::VectorXcd d =
        steering_vector(geometry, angle, cfg.bin_frequency(k));
    for (int i = 0; i < mono.frames(); ++i) {
      const std::complex<double> s = mono(k, i, 0);
      for (int ch = 0; ch < geometry.size(); ++ch) {
        out(k, i, ch) = s * d(ch);
      }
    }
  }
  return out;
}

void DirectivityPattern::write_csv(std::ostream& os) const {
  os << "frequency_hz,angle_deg,gain_db\n";
  char line[128];
  for (std::size_t f = 0; f < frequencies.size(); ++f) {
    for (std::size_t a = 0; a < angles.size(); ++a) {
      std::snprintf(line, sizeof(line), "%.6g,%.6g,%.6g\n", frequencies[f],
                    angles[a] * 180.0 / std::numbers::pi,
                    gains_db(static_cast<Eigen::Index>(f),
                             static_cast<Eigen::Index>(a)));
      os << line;
    }
  }
}

DirectivityPattern directivity(
    const std::function<Eigen::VectorXcd(double frequency)>& weights,
    const ArrayGeometry& geometry, std::span<const double> angles,
    std::span<const double> frequencies) {
  DirectivityPattern pattern;
  pattern.frequencies.assign(frequencies.begin(), frequencies.end());
  pattern.angles.assign(angles.begin(), angles.end());
  pattern.gains_db.resize(static_cast<Eigen::Index>(frequencies.size()),
                          static_cast<Eigen::Index>(angles.size()));
  for (std::size_t f = 0; f < frequencies.size(); ++f) {
    const Eigen::VectorXcd w = weights(frequencies[f]);
    if (w.size() != geometry.size()) {
      throw ConfigError("directivity: weight vector does not match array");
    }
    for (std::size_t a = 0; a < angles.size(); ++a) {
      const Eigen::VectorXcd d =
          steering_vector(geometry, angles[a], frequencies[f]);
      const double mag = std::abs(w.dot(d));
      pattern.gains_db(static_cast<Eigen::Index>(f),
                       static_cast<Eigen::Index>(a)) =
          20.0 * std::log10(std::max(mag, 1e-12));
    }
  }
  return pattern;
}

Eigen::VectorXcd mvdr_weights(const Eigen::MatrixXcd& noise_covariance,
                              const Eigen::VectorXcd& steering) {
  const Eigen::VectorXcd inv_d = hermitian_solve(noise_covariance, steering);
  const double gain = steering.dot(inv_d).real();
  if (!(gain > 0.0)) {
    throw NotPositiveDefinite("mvdr_weights: nonpositive array gain");
  }
  return inv_d / gain;
}

std::vector<double> angle_grid(double step_degrees) {
  std::vector<double> grid;
  const double step = step_degrees * std::numbers::pi / 180.0;
  for (double a = 0.0; a < kTwoPi - 1e-12; a += step) grid.push_back(a);
  return grid;
}

}  // namespace nsf
