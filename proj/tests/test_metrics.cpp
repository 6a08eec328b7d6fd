#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "nsf/metrics.hpp"

using nsf::MetricsReport;
using nsf::si_sdr_segmental;

namespace {

Eigen::VectorXd random_signal(int n, unsigned seed, double amp = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, amp);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = normal(rng);
  return x;
}

// Per segment, replaces noise with its component orthogonal to the target,
// rescaled to the requested energy ratio.
Eigen::VectorXd orthogonal_noise(const Eigen::VectorXd& target,
                                 unsigned seed, int seg_len,
                                 double energy_ratio) {
  Eigen::VectorXd noise = random_signal(static_cast<int>(target.size()), seed);
  for (int s = 0; s + seg_len <= target.size(); s += seg_len) {
    auto t = target.segment(s, seg_len);
    auto w = noise.segment(s, seg_len);
    const double te = t.squaredNorm();
    if (te > 0.0) w -= (w.dot(t) / te) * t;
    const double we = w.squaredNorm();
    if (we > 0.0) w *= std::sqrt(energy_ratio * te / we);
  }
  return noise;
}

}  // namespace

TEST_SUITE_BEGIN("metrics");

TEST_CASE("perfect estimate reports the 100 dB cap") {
  const Eigen::VectorXd target = random_signal(16000, 1);
  const MetricsReport report =
      si_sdr_segmental(target, target, nullptr, 16000.0);
  CHECK(report.si_sdr == doctest::Approx(100.0));
  CHECK(report.segment_count > 0);
}

TEST_CASE("scale invariance of SI-SDR") {
  const Eigen::VectorXd target = random_signal(16000, 2);
  const Eigen::VectorXd noise = random_signal(16000, 3, 0.3);
  const Eigen::VectorXd estimate = target + noise;
  const MetricsReport base =
      si_sdr_segmental(estimate, target, &noise, 16000.0);
  for (double c : {0.5, 2.0, -3.0, 1e-3, 1e3}) {
    const MetricsReport scaled =
        si_sdr_segmental(c * estimate, target, &noise, 16000.0);
    CHECK(std::abs(scaled.si_sdr - base.si_sdr) < 1e-9);
  }
}

TEST_CASE("equal-power orthogonal noise gives 0 dB per segment") {
  const int seg = 160;  // 10 ms at 16 kHz
  const Eigen::VectorXd target = random_signal(16000, 4);
  const Eigen::VectorXd noise = orthogonal_noise(target, 5, seg, 1.0);
  const MetricsReport report =
      si_sdr_segmental(target + noise, target, &noise, 16000.0);
  for (const auto& s : report.segments) {
    CHECK(std::abs(s.si_sdr) <= 0.01);
  }
}

TEST_CASE("adding orthogonal noise never increases segment SI-SDR") {
  const int seg = 160;
  const Eigen::VectorXd target = random_signal(16000, 6);
  const Eigen::VectorXd small = orthogonal_noise(target, 7, seg, 0.1);
  const Eigen::VectorXd extra = orthogonal_noise(target, 8, seg, 0.2);
  const MetricsReport before =
      si_sdr_segmental(target + small, target, nullptr, 16000.0);
  const MetricsReport after =
      si_sdr_segmental(target + small + extra, target, nullptr, 16000.0);
  REQUIRE(before.segments.size() == after.segments.size());
  for (std::size_t i = 0; i < before.segments.size(); ++i) {
    CHECK(after.segments[i].si_sdr <=
          before.segments[i].si_sdr + 1e-9);
  }
}

TEST_CASE("silent target segments are gated out") {
  const int seg = 160;
  Eigen::VectorXd target = random_signal(16000, 9);
  // Hard-mute a stretch of segments.
  target.segment(10 * seg, 20 * seg).setZero();
  const Eigen::VectorXd noise = random_signal(16000, 10, 0.2);
  const MetricsReport report =
      si_sdr_segmental(target + noise, target, &noise, 16000.0);
  for (const auto& s : report.segments) {
    CHECK(target.segment(s.index * seg, seg).squaredNorm() > 0.0);
    CHECK((s.index < 10 || s.index >= 30));
  }
}

TEST_CASE("all-silent target is degenerate") {
  const Eigen::VectorXd zeros = Eigen::VectorXd::Zero(16000);
  const Eigen::VectorXd est = random_signal(16000, 11);
  CHECK_THROWS_AS((void)si_sdr_segmental(est, zeros, nullptr, 16000.0),
                  nsf::DegenerateSegment);
}

TEST_CASE("interference decomposition accounts for the residual") {
  const int n = 16000;
  const Eigen::VectorXd target = random_signal(n, 12);
  const Eigen::VectorXd interference = random_signal(n, 13, 0.5);
  // Estimate consisting of target plus a known slice of interference.
  const Eigen::VectorXd estimate = target + 0.7 * interference;
  const MetricsReport report =
      si_sdr_segmental(estimate, target, &interference, 16000.0);
  // Nearly everything in the residual is interference: SAR far above SIR.
  CHECK(report.si_sir < report.si_sar);
  CHECK(report.si_sdr <= report.si_sir + 1.0);
}

TEST_CASE("report serialization") {
  const Eigen::VectorXd target = random_signal(8000, 14);
  const Eigen::VectorXd noise = random_signal(8000, 15, 0.5);
  const MetricsReport report =
      si_sdr_segmental(target + noise, target, &noise, 16000.0);
  const std::string text = report.to_json_string();
  CHECK(text.find("\"si_sdr\"") != std::string::npos);
  CHECK(text.find("\"segments\"") != std::string::npos);
  std::ostringstream os;
  MetricsReport::write_csv_header(os);
  report.write_csv_rows(os, "mvdr");
  CHECK(os.str().find("mvdr,si_sdr,") != std::string::npos);
  CHECK(os.str().find("mvdr,si_sar,") != std::string::npos);
}

TEST_SUITE_END();
