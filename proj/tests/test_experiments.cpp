#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "nsf/experiments.hpp"
#include "nsf/wav.hpp"

using nsf::ExperimentConfig;
using nsf::ExperimentKind;

namespace {

// Small, fast configuration shared by the harness tests.
ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.seed = 11;
  cfg.synthetic_utterances = 1;
  cfg.synthetic_seconds = 1.5;
  cfg.component_grid = {1, 3};
  return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("experiments");

TEST_CASE("synthetic utterances are deterministic and bounded") {
  const auto a = nsf::synthetic_utterance(5, 2.0, 16000.0);
  const auto b = nsf::synthetic_utterance(5, 2.0, 16000.0);
  CHECK(a.size() == 32000);
  CHECK((a - b).norm() == 0.0);
  CHECK(a.cwiseAbs().maxCoeff() <= 0.5);
  CHECK(a.cwiseAbs().maxCoeff() > 0.01);
  const auto c = nsf::synthetic_utterance(6, 2.0, 16000.0);
  CHECK((a - c).norm() > 0.0);
}

TEST_CASE("gaussian burst noise cycles through the interferers") {
  nsf::Scenario scenario;
  scenario.geometry = nsf::ArrayGeometry::linear(2, 0.06);
  scenario.interferer_angles = nsf::ring_interferer_angles(5);
  scenario.stft = nsf::StftConfig{};
  const Eigen::Index n = 16000 * 3;
  const Eigen::MatrixXd noise =
      nsf::gaussian_burst_noise(scenario, n, 336.0, 3);
  CHECK(noise.rows() == n);
  CHECK(noise.cols() == 2);
  CHECK(noise.col(0).squaredNorm() > 0.0);
  // Deterministic per seed.
  const Eigen::MatrixXd again =
      nsf::gaussian_burst_noise(scenario, n, 336.0, 3);
  CHECK((noise - again).norm() == 0.0);
}

TEST_CASE("config JSON round trip") {
  ExperimentConfig cfg = tiny_config();
  cfg.kind = ExperimentKind::kGaussianBursts;
  cfg.speech_files = {"a.wav", "b.wav"};
  cfg.external_snr_db = 5.0;
  const std::string text = cfg.to_json_string();
  const ExperimentConfig back = ExperimentConfig::from_json_string(text);
  CHECK(back.kind == ExperimentKind::kGaussianBursts);
  CHECK(back.seed == cfg.seed);
  CHECK(back.component_grid == cfg.component_grid);
  CHECK(back.speech_files == cfg.speech_files);
  REQUIRE(back.external_snr_db.has_value());
  CHECK(*back.external_snr_db == doctest::Approx(5.0));
  CHECK(back.to_json_string() == text);
}

TEST_CASE("heavy-tailed experiment rows and M=1 separation end to end") {
  ExperimentConfig cfg = tiny_config();
  const auto result = nsf::run_heavy_tailed(cfg);
  // 2 conditions x 4 methods x 1 utterance.
  CHECK(result.rows.size() == 8);
  // With Gaussian noise the joint and two-step estimators coincide.
  const double gap1 = result.gap_si_sdr(1);
  CHECK(std::abs(gap1) < 0.01);
  // q column carries the kurtosis factor.
  CHECK(result.q_for(1) == doctest::Approx(1.0));
  CHECK(result.q_for(3) == doctest::Approx(nsf::kurtosis_factor(3, 2.0)));
  // Determinism of the whole table.
  const auto second = nsf::run_heavy_tailed(cfg);
  CHECK(second.to_csv() == result.to_csv());
}

TEST_CASE("experiment outputs land in the output directory") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "nsf_exp_out_test";
  fs::remove_all(dir);
  ExperimentConfig cfg = tiny_config();
  cfg.component_grid = {1};
  cfg.output_dir = dir.string();
  const auto result = nsf::run_experiment(cfg);
  CHECK(fs::exists(dir / "results.csv"));
  CHECK(fs::exists(dir / "summary.csv"));
  CHECK(fs::exists(dir / "manifest.json"));
  std::ifstream manifest(dir / "manifest.json");
  std::string text((std::istreambuf_iterator<char>(manifest)),
                   std::istreambuf_iterator<char>());
  CHECK(text.find("config_hash") != std::string::npos);
  CHECK(text.find("\"seed\": 11") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("external pair: MVDR is invariant to the component count") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "nsf_external_test";
  fs::create_directories(dir);

  // Synthetic stand-in: steered speech plus burst noise, written as WAVs.
  nsf::StftConfig stft;
  nsf::Scenario scenario;
  scenario.geometry = nsf::ArrayGeometry::linear(2, 0.06);
  scenario.interferer_angles = nsf::ring_interferer_angles(5);
  scenario.stft = stft;

  const auto mono = nsf::synthetic_utterance(21, 2.5, stft.sample_rate);
  Eigen::MatrixXd clean(mono.size(), 2);
  clean.col(0) = mono;
  clean.col(1) = mono;
  Eigen::MatrixXd noise =
      nsf::gaussian_burst_noise(scenario, mono.size(), 336.0, 22);
  noise *= std::sqrt(mono.squaredNorm() / noise.col(0).squaredNorm());

  nsf::write_wav((dir / "clean.wav").string(), {stft.sample_rate, clean});
  nsf::write_wav((dir / "noise.wav").string(), {stft.sample_rate, noise});

  ExperimentConfig cfg = tiny_config();
  cfg.kind = ExperimentKind::kExternalPair;
  cfg.clean_path = (dir / "clean.wav").string();
  cfg.noise_path = (dir / "noise.wav").string();
  cfg.external_component_grid = {1, 3, 5};
  cfg.external_em_window_ms = 750.0;

  const auto result = nsf::run_external_pair(cfg);

  // M=1: joint equals two-step.
  CHECK(std::abs(result.gap_si_sdr(1)) < 0.01);

  // The EM aggregate equals the per-window scatter regardless of M, so the
  // MVDR result cannot depend on the component count.
  const double mvdr1 = result.mean_si_sdr(1, nsf::Method::kMvdr);
  for (int m : {3, 5}) {
    CHECK(std::abs(result.mean_si_sdr(m, nsf::Method::kMvdr) - mvdr1) < 0.01);
  }

  // Richer mixtures help the joint estimator on burst noise: the curve is
  // non-decreasing in M (0.05 dB slack for EM jitter).
  const double joint1 = result.mean_si_sdr(1, nsf::Method::kNlMmse);
  const double joint3 = result.mean_si_sdr(3, nsf::Method::kNlMmse);
  const double joint5 = result.mean_si_sdr(5, nsf::Method::kNlMmse);
  CHECK(joint3 >= joint1 - 0.05);
  CHECK(joint5 >= joint3 - 0.05);

  fs::remove_all(dir);
}

TEST_SUITE_END();
