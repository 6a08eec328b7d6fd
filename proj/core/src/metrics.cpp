#include "nsf/metrics.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include <nlohmann/json.hpp>

namespace nsf {

namespace {

constexpr double kCapDb = 100.0;

double to_db_capped(double num, double den) {
  if (den <= 0.0) return kCapDb;
  if (num <= 0.0) return -kCapDb;
  const double db = 10.0 * std::log10(num / den);
  return std::clamp(db, -kCapDb, kCapDb);
}

double mean_of(const std::vector<SegmentMetrics>& segments,
               double SegmentMetrics::*field) {
  if (segments.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& s : segments) acc += s.*field;
  return acc / static_cast<double>(segments.size());
}

}  // namespace

double MetricsReport::ci95_si_sdr() const {
  if (segments.size() < 2) return 0.0;
  const double mean = si_sdr;
  double var = 0.0;
  for (const auto& s : segments) {
    var += (s.si_sdr - mean) * (s.si_sdr - mean);
  }
  var /= static_cast<double>(segments.size() - 1);
  return 1.96 * std::sqrt(var / static_cast<double>(segments.size()));
}

std::string MetricsReport::to_json_string(int indent) const {
  nlohmann::json doc;
  doc["si_sdr"] = si_sdr;
  doc["si_sir"] = si_sir;
  doc["si_sar"] = si_sar;
  doc["segment_count"] = segment_count;
  doc["ci95_si_sdr"] = ci95_si_sdr();
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : segments) {
    segs.push_back({{"index", s.index},
                    {"si_sdr", s.si_sdr},
                    {"si_sir", s.si_sir},
                    {"si_sar", s.si_sar}});
  }
  doc["segments"] = std::move(segs);
  return doc.dump(indent);
}

void MetricsReport::write_csv_header(std::ostream& os) {
  os << "method,metric,mean,ci95\n";
}

void MetricsReport::write_csv_rows(std::ostream& os,
                                   const std::string& method) const {
  char line[160];
  std::snprintf(line, sizeof(line), "%s,si_sdr,%.6f,%.6f\n", method.c_str(),
                si_sdr, ci95_si_sdr());
  os << line;
  if (std::isfinite(si_sir)) {
    std::snprintf(line, sizeof(line), "%s,si_sir,%.6f,\n", method.c_str(),
                  si_sir);
    os << line;
    std::snprintf(line, sizeof(line), "%s,si_sar,%.6f,\n", method.c_str(),
                  si_sar);
    os << line;
  }
}

MetricsReport si_sdr_segmental(const Eigen::VectorXd& estimate,
                               const Eigen::VectorXd& target,
                               const Eigen::VectorXd* interference,
                               double sample_rate, double segment_ms,
                               double activity_threshold_db) {
  const Eigen::Index n = target.size();
  if (estimate.size() != n ||
      (interference != nullptr && interference->size() != n)) {
    throw ConfigError("si_sdr_segmental: signals must have equal length");
  }
  const auto seg_len =
      static_cast<Eigen::Index>(std::lround(segment_ms * sample_rate / 1000.0));
  if (seg_len < 2 || n < seg_len) {
    throw ConfigError("si_sdr_segmental: segment longer than signal");
  }
  const Eigen::Index num_segments = n / seg_len;

  // Speech-activity gating on target segment energy.
  Eigen::VectorXd energy(num_segments);
  for (Eigen::Index s = 0; s < num_segments; ++s) {
    energy[s] = target.segment(s * seg_len, seg_len).squaredNorm();
  }
  const double mean_energy = energy.mean();
  if (!(mean_energy > 0.0)) {
    throw DegenerateSegment("si_sdr_segmental: target has no energy");
  }
  const double threshold =
      mean_energy * std::pow(10.0, -activity_threshold_db / 10.0);

  MetricsReport report;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (Eigen::Index s = 0; s < num_segments; ++s) {
    if (!(energy[s] > threshold) || energy[s] == 0.0) continue;
    const Eigen::VectorXd est = estimate.segment(s * seg_len, seg_len);
    const Eigen::VectorXd tgt = target.segment(s * seg_len, seg_len);

    // Project the estimate onto the target (optimal scaling).
    const double alpha = est.dot(tgt) / energy[s];
    const Eigen::VectorXd scaled_target = alpha * tgt;
    const Eigen::VectorXd residual = est - scaled_target;

    SegmentMetrics seg;
    seg.index = static_cast<int>(s);
    seg.si_sdr = to_db_capped(scaled_target.squaredNorm(),
                              residual.squaredNorm());
    if (interference != nullptr) {
      // Least-squares split of the residual into the interference direction
      // (orthogonalized against the target) and the artifact remainder.
      Eigen::VectorXd noise = interference->segment(s * seg_len, seg_len);
      noise -= (noise.dot(tgt) / energy[s]) * tgt;
      const double noise_energy = noise.squaredNorm();
      Eigen::VectorXd e_interf = Eigen::VectorXd::Zero(seg_len);
      if (noise_energy > 0.0) {
        e_interf = (residual.dot(noise) / noise_energy) * noise;
      }
      const Eigen::VectorXd e_artifact = residual - e_interf;
      seg.si_sir = to_db_capped(scaled_target.squaredNorm(),
                                e_interf.squaredNorm());
      seg.si_sar = to_db_capped(scaled_target.squaredNorm(),
                                e_artifact.squaredNorm());
    } else {
      seg.si_sir = nan;
      seg.si_sar = nan;
    }
    report.segments.push_back(seg);
  }
  if (report.segments.empty()) {
    throw DegenerateSegment("si_sdr_segmental: no active segments");
  }
  report.segment_count = static_cast<int>(report.segments.size());
  report.si_sdr = mean_of(report.segments, &SegmentMetrics::si_sdr);
  if (interference != nullptr) {
    report.si_sir = mean_of(report.segments, &SegmentMetrics::si_sir);
    report.si_sar = mean_of(report.segments, &SegmentMetrics::si_sar);
  } else {
    report.si_sir = nan;
    report.si_sar = nan;
  }
  return report;
}

}  // namespace nsf
