// Scale-invariant SDR family over speech-active segments.
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "nsf/errors.hpp"

namespace nsf {

struct SegmentMetrics {
  int index = 0;
  double si_sdr = 0.0;
  double si_sir = 0.0;  // NaN when no interference reference was given
  double si_sar = 0.0;
};

struct MetricsReport {
  double si_sdr = 0.0;  // means over active segments, dB
  double si_sir = 0.0;
  double si_sar = 0.0;
  int segment_count = 0;
  std::vector<SegmentMetrics> segments;

  double ci95_si_sdr() const;

  std::string to_json_string(int indent = -1) const;
  // Rows "method,metric,mean,ci95"; one row per metric.
  void write_csv_rows(std::ostream& os, const std::string& method) const;
  static void write_csv_header(std::ostream& os);
};

// Segmental SI-SDR / SI-SIR / SI-SAR over non-overlapping segments of
// segment_ms milliseconds. Segments whose target energy falls more than
// activity_threshold_db below the mean segment energy are excluded. The
// per-segment values are capped to +-100 dB.
MetricsReport si_sdr_segmental(const Eigen::VectorXd& estimate,
                               const Eigen::VectorXd& target,
                               const Eigen::VectorXd* interference,
                               double sample_rate, double segment_ms = 10.0,
                               double activity_threshold_db = 30.0);

}  // namespace nsf
