// Experiment harness: the three simulation families plus enhancement of
// user-supplied recordings, with CSV/JSON result emission.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nsf/filters.hpp"
#include "nsf/metrics.hpp"
#include "nsf/noise_model.hpp"
#include "nsf/spatial.hpp"
#include "nsf/stft.hpp"

namespace nsf {

enum class ExperimentKind {
  kHeavyTailed,
  kInterfererSpeech,
  kGaussianBursts,
  kExternalPair,
};

ExperimentKind experiment_from_string(const std::string& name);
std::string to_string(ExperimentKind kind);

enum class PsdMode { kCepstral, kOracle };

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kHeavyTailed;
  StftConfig stft;  // defaults: 16 kHz, 32 ms / 16 ms
  std::uint64_t seed = 1;
  double snr_db = 0.0;
  double nu = 0.25;
  PsdMode psd_mode = PsdMode::kCepstral;

  // Heavy-tailed diffuse-noise scenario.
  int mic_count = 5;
  double mic_spacing = 0.05;
  double scale_factor = 2.0;  // b
  std::vector<int> component_grid = {1, 2, 4, 6, 8};
  double white_fraction = 0.05;

  // Interferer scenarios (two microphones).
  int interferer_count = 5;
  double interferer_spacing = 0.06;
  double burst_ms = 336.0;
  double em_window_ms = 250.0;
  double em_overlap = 0.5;
  int em_components = 5;
  EmOptions em;

  // Clean utterances; when empty, deterministic synthetic utterances are
  // generated from the seed.
  std::vector<std::string> speech_files;
  int synthetic_utterances = 4;
  double synthetic_seconds = 6.0;

  // External pair (user-supplied multichannel clean + noise WAVs).
  std::string clean_path;
  std::string noise_path;
  std::vector<int> external_component_grid = {1, 2, 3, 4};
  double external_em_window_ms = 750.0;
  std::optional<double> external_snr_db;  // rescale noise only when set
  double steering_smoothing = 0.9;

  std::string output_dir;  // empty: no files written

  static ExperimentConfig from_json_string(const std::string& text);
  std::string to_json_string(int indent = 2) const;
};

struct ResultRow {
  int components = 0;
  double q = 0.0;  // kurtosis factor of the condition (1 when n/a)
  std::string method;
  std::string utterance;
  double si_sdr = 0.0;
  double si_sir = 0.0;
  double si_sar = 0.0;
  int segments = 0;
};

struct ExperimentResult {
  ExperimentKind kind = ExperimentKind::kHeavyTailed;
  std::vector<ResultRow> rows;

  std::vector<int> component_values() const;
  double q_for(int components) const;
  // Mean over utterances of the per-utterance metric.
  double mean_si_sdr(int components, Method method) const;
  // Mean over utterances of (nl-mmse minus mvdr-mmse) per utterance.
  double gap_si_sdr(int components) const;

  std::string to_csv() const;
  std::string summary_csv() const;
};

// Deterministic speech-like test signal: voiced harmonic segments with
// pitch movement and formant envelopes, fricative-like noise bursts and
// pauses. Range well inside [-1, 1].
Eigen::VectorXd synthetic_utterance(std::uint64_t seed, double seconds,
                                    double sample_rate);

// Multichannel time-domain noise from interferers emitting non-overlapping
// white Gaussian bursts in cyclic order, spatialized per interferer angle.
Eigen::MatrixXd gaussian_burst_noise(const Scenario& scenario,
                                     Eigen::Index num_samples, double burst_ms,
                                     std::uint64_t seed);

// Multichannel time-domain noise from interfering mono sources placed at
// the scenario's interferer angles.
Eigen::MatrixXd interferer_source_noise(
    const Scenario& scenario, const std::vector<Eigen::VectorXd>& sources,
    Eigen::Index num_samples);

ExperimentResult run_heavy_tailed(const ExperimentConfig& cfg);
ExperimentResult run_interferers(const ExperimentConfig& cfg,
                                 bool gaussian_bursts);
ExperimentResult run_external_pair(const ExperimentConfig& cfg);

// Dispatches on cfg.kind and, when output_dir is set, writes results.csv,
// summary.csv and manifest.json.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// FNV-1a 64-bit hash, hex-encoded; used for config fingerprints.
std::string content_hash(const std::string& text);

void write_experiment_outputs(const ExperimentConfig& cfg,
                              const ExperimentResult& result);

}  // namespace nsf
