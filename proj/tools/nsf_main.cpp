// Command-line front end: simulate / enhance / fit-noise / metrics /
// directivity.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nsf/experiments.hpp"
#include "nsf/filters.hpp"
#include "nsf/metrics.hpp"
#include "nsf/noise_model.hpp"
#include "nsf/spatial.hpp"
#include "nsf/version.hpp"
#include "nsf/wav.hpp"

namespace {

constexpr double kPi = std::numbers::pi;

std::string read_text_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw nsf::FileError("cannot open " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw nsf::FileError("cannot write " + path);
  os << text;
}

nsf::StftConfig stft_from_model(const nsf::NoiseModel& model) {
  nsf::StftConfig cfg;
  cfg.sample_rate = model.sample_rate;
  cfg.window_ms = 1000.0 * model.fft_size / model.sample_rate;
  cfg.shift_ms = 1000.0 * model.shift_samples / model.sample_rate;
  return cfg;
}

struct SimulateArgs {
  std::string config_path;
  std::string experiment;
  std::string out_dir;
  std::vector<std::string> speech;
  std::optional<std::uint64_t> seed;
  std::optional<int> utterances;
  std::optional<double> seconds;
};

int run_simulate(const SimulateArgs& args) {
  nsf::ExperimentConfig cfg;
  if (!args.config_path.empty()) {
    cfg = nsf::ExperimentConfig::from_json_string(
        read_text_file(args.config_path));
  }
  if (!args.experiment.empty()) {
    cfg.kind = nsf::experiment_from_string(args.experiment);
  }
  if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
  if (!args.speech.empty()) cfg.speech_files = args.speech;
  if (args.seed) cfg.seed = *args.seed;
  if (args.utterances) cfg.synthetic_utterances = *args.utterances;
  if (args.seconds) cfg.synthetic_seconds = *args.seconds;
  if (cfg.output_dir.empty()) {
    throw nsf::ConfigError("simulate: --out-dir (or output_dir) is required");
  }

  const nsf::ExperimentResult result = nsf::run_experiment(cfg);
  std::cout << result.summary_csv();
  std::cout << "wrote " << cfg.output_dir << "/results.csv, summary.csv, "
            << "manifest.json\n";
  return 0;
}

struct EnhanceArgs {
  std::string method = "nl-mmse";
  std::string noisy_path;
  std::string model_path;
  std::string steering = "ones";
  std::string clean_path;  // for steering estimation / oracle PSD
  std::string psd = "cepstral";
  std::string out_path;
  double nu = 0.25;
  int bits = 32;
};

int run_enhance(const EnhanceArgs& args) {
  const nsf::NoiseModel model =
      nsf::noise_model_from_json(read_text_file(args.model_path));
  const nsf::StftConfig stft = stft_from_model(model);

  const nsf::WavData noisy = nsf::read_wav(args.noisy_path);
  if (std::abs(noisy.sample_rate - model.sample_rate) > 1e-6) {
    throw nsf::ConfigError(
        "enhance: WAV sample rate does not match the noise model "
        "(resampling is not supported)");
  }
  if (noisy.samples.cols() != model.num_channels) {
    throw nsf::ConfigError("enhance: channel count does not match the model");
  }
  const nsf::Spectrogram noisy_spec = nsf::analyze(noisy.samples, stft);

  nsf::SteeringField steering =
      nsf::SteeringField::ones(noisy_spec.bins(), noisy_spec.channels());
  std::optional<nsf::Spectrogram> clean_spec;
  if (!args.clean_path.empty()) {
    const nsf::WavData clean = nsf::read_wav(args.clean_path);
    if (std::abs(clean.sample_rate - model.sample_rate) > 1e-6 ||
        clean.samples.cols() != model.num_channels) {
      throw nsf::ConfigError("enhance: clean reference does not match");
    }
    clean_spec = nsf::analyze(clean.samples, stft);
  }
  if (args.steering == "ones") {
    // broadside default
  } else if (args.steering == "estimate") {
    if (!clean_spec) {
      throw nsf::ConfigError(
          "enhance: --steering estimate requires --clean <wav>");
    }
    steering =
        nsf::SteeringField::time_varying(nsf::estimate_steering(*clean_spec));
  } else {
    throw nsf::ConfigError("enhance: unknown steering mode '" +
                           args.steering + "' (ones|estimate)");
  }

  nsf::SpeechPrior prior;
  prior.nu = args.nu;
  if (args.psd == "oracle") {
    if (!clean_spec) {
      throw nsf::ConfigError("enhance: --psd oracle requires --clean <wav>");
    }
    prior.sigma_s2 = nsf::oracle_speech_psd(*clean_spec, 0);
  } else if (args.psd == "cepstral") {
    const nsf::MvdrPass pass = nsf::mvdr_pass(noisy_spec, model, steering);
    prior.sigma_s2 = nsf::estimate_speech_psd(
        pass.output.power(0), pass.residual_noise.rowwise().mean(),
        stft.sample_rate);
  } else {
    throw nsf::ConfigError("enhance: unknown psd mode '" + args.psd +
                           "' (cepstral|oracle)");
  }

  nsf::EnhanceInput input;
  input.noisy = &noisy_spec;
  input.noise = &model;
  input.steering = steering;
  input.prior = prior;
  input.stft = stft;

  const Eigen::VectorXd out = nsf::enhance(
      input, nsf::method_from_string(args.method), noisy.samples.rows());
  nsf::WavData out_wav;
  out_wav.sample_rate = stft.sample_rate;
  out_wav.samples = out;
  nsf::write_wav(args.out_path, out_wav, args.bits);
  std::cout << "wrote " << args.out_path << "\n";
  return 0;
}

struct FitNoiseArgs {
  std::string input_path;
  std::string out_path;
  int components = 5;
  double window_ms = 250.0;
  double overlap = 0.5;
  double stft_window_ms = 32.0;
  double stft_shift_ms = 16.0;
  std::uint64_t seed = 0;
  int restarts = 5;
};

int run_fit_noise(const FitNoiseArgs& args) {
  const nsf::WavData noise = nsf::read_wav(args.input_path);
  nsf::StftConfig stft;
  stft.sample_rate = noise.sample_rate;
  stft.window_ms = args.stft_window_ms;
  stft.shift_ms = args.stft_shift_ms;
  const nsf::Spectrogram spec = nsf::analyze(noise.samples, stft);

  nsf::EmOptions opts;
  opts.seed = args.seed;
  opts.restarts = args.restarts;
  const nsf::NoiseModel model = nsf::em_fit_windowed(
      spec, stft, args.window_ms, args.overlap, args.components, opts);
  write_text_file(args.out_path, nsf::to_json_string(model));
  std::cout << "wrote " << args.out_path << " (" << model.windows.size()
            << " windows x " << model.num_bins << " bins)\n";
  return 0;
}

struct MetricsArgs {
  std::string estimate_path;
  std::string target_path;
  std::string interference_path;
  std::string out_path;
  std::string csv_path;
  std::string label = "estimate";
  double segment_ms = 10.0;
};

int run_metrics(const MetricsArgs& args) {
  const nsf::WavData estimate = nsf::read_wav(args.estimate_path);
  const nsf::WavData target = nsf::read_wav(args.target_path);
  std::optional<nsf::WavData> interference;
  if (!args.interference_path.empty()) {
    interference = nsf::read_wav(args.interference_path);
  }
  const Eigen::VectorXd est = estimate.samples.col(0);
  const Eigen::VectorXd tgt = target.samples.col(0);
  std::optional<Eigen::VectorXd> noise;
  if (interference) noise = interference->samples.col(0);

  const nsf::MetricsReport report = nsf::si_sdr_segmental(
      est, tgt, noise ? &*noise : nullptr, target.sample_rate,
      args.segment_ms);
  if (!args.out_path.empty()) {
    write_text_file(args.out_path, report.to_json_string(2));
  }
  if (!args.csv_path.empty()) {
    std::ostringstream os;
    nsf::MetricsReport::write_csv_header(os);
    report.write_csv_rows(os, args.label);
    write_text_file(args.csv_path, os.str());
  }
  std::cout << "si_sdr=" << report.si_sdr << " dB over "
            << report.segment_count << " segments\n";
  return 0;
}

struct DirectivityArgs {
  std::string model_path;
  std::string geometry = "linear:2x0.06";
  std::string out_path;
  double target_angle_deg = 90.0;
  double angle_step_deg = 1.0;
  double min_freq = 0.0;
  double max_freq = -1.0;
  int window_index = 0;
};

int run_directivity(const DirectivityArgs& args) {
  const nsf::NoiseModel model =
      nsf::noise_model_from_json(read_text_file(args.model_path));
  const nsf::ArrayGeometry geometry = nsf::ArrayGeometry::parse(args.geometry);
  if (geometry.size() != model.num_channels) {
    throw nsf::ConfigError("directivity: geometry does not match the model");
  }
  if (args.window_index < 0 ||
      args.window_index >= static_cast<int>(model.windows.size())) {
    throw nsf::ConfigError("directivity: window index out of range");
  }
  const auto& window = model.windows[args.window_index];
  const nsf::StftConfig stft = stft_from_model(model);
  const double target_angle = args.target_angle_deg * kPi / 180.0;
  const std::vector<double> angles = nsf::angle_grid(args.angle_step_deg);
  const double max_freq =
      args.max_freq < 0.0 ? stft.sample_rate / 2.0 : args.max_freq;

  std::ostringstream os;
  os << "component,frequency_hz,angle_deg,gain_db\n";
  const int components = window.bins[0].components();
  char line[160];
  for (int comp = 0; comp <= components; ++comp) {
    for (int k = 0; k < model.num_bins; ++k) {
      const double freq = stft.bin_frequency(k);
      if (freq < args.min_freq || freq > max_freq) continue;
      const Eigen::MatrixXcd cov =
          comp == 0 ? window.bins[k].aggregate_covariance()
                    : window.bins[k].covariances[comp - 1];
      const Eigen::VectorXcd w = nsf::mvdr_weights(
          cov, nsf::steering_vector(geometry, target_angle, freq));
      const std::vector<double> freqs = {freq};
      const nsf::DirectivityPattern pattern = nsf::directivity(
          [&](double) { return w; }, geometry, angles, freqs);
      for (std::size_t a = 0; a < angles.size(); ++a) {
        std::snprintf(line, sizeof(line), "%s,%.6g,%.6g,%.6g\n",
                      comp == 0 ? "aggregate" : std::to_string(comp).c_str(),
                      freq, angles[a] * 180.0 / kPi,
                      pattern.gains_db(0, static_cast<Eigen::Index>(a)));
        os << line;
      }
    }
  }
  write_text_file(args.out_path, os.str());
  std::cout << "wrote " << args.out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multichannel speech enhancement with Gaussian-mixture "
               "nonlinear spatial filters"};
  app.set_version_flag("--version", nsf::kVersionString);
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand(
      "simulate", "Run a simulation experiment and write result tables");
  simulate->add_option("--config", sim.config_path,
                       "JSON experiment configuration");
  simulate->add_option(
      "--experiment", sim.experiment,
      "heavy-tailed|interferer-speech|gaussian-bursts|external-pair");
  simulate->add_option("--out-dir", sim.out_dir, "Output directory");
  simulate->add_option("--speech", sim.speech, "Clean speech WAV files");
  std::uint64_t sim_seed = 0;
  auto* seed_opt = simulate->add_option("--seed", sim_seed, "Random seed");
  int sim_utt = 0;
  auto* utt_opt =
      simulate->add_option("--utterances", sim_utt, "Synthetic utterances");
  double sim_sec = 0.0;
  auto* sec_opt = simulate->add_option("--seconds", sim_sec,
                                       "Synthetic utterance length");

  EnhanceArgs enh;
  auto* enhance = app.add_subcommand("enhance", "Enhance a noisy WAV");
  enhance->add_option("--method", enh.method,
                      "mvdr|mwf|mvdr-mmse|nl-mmse");
  enhance->add_option("--noisy", enh.noisy_path, "Noisy multichannel WAV")
      ->required();
  enhance->add_option("--noise-model", enh.model_path,
                      "Noise model JSON from fit-noise")
      ->required();
  enhance->add_option("--steering", enh.steering, "ones|estimate");
  enhance->add_option("--clean", enh.clean_path,
                      "Clean reference WAV (steering/oracle PSD)");
  enhance->add_option("--psd", enh.psd, "cepstral|oracle");
  enhance->add_option("--nu", enh.nu, "Speech shape parameter");
  enhance->add_option("--out", enh.out_path, "Output WAV")->required();
  enhance->add_option("--bits", enh.bits, "16 or 32");

  FitNoiseArgs fit;
  auto* fit_noise =
      app.add_subcommand("fit-noise", "Fit a Gaussian mixture noise model");
  fit_noise->add_option("--input", fit.input_path, "Noise WAV")->required();
  fit_noise->add_option("--components", fit.components, "Mixture components");
  fit_noise->add_option("--window-ms", fit.window_ms, "EM window length");
  fit_noise->add_option("--overlap", fit.overlap, "EM window overlap [0,1)");
  fit_noise->add_option("--stft-window-ms", fit.stft_window_ms,
                        "STFT window length");
  fit_noise->add_option("--stft-shift-ms", fit.stft_shift_ms, "STFT shift");
  fit_noise->add_option("--seed", fit.seed, "EM restart seed");
  fit_noise->add_option("--restarts", fit.restarts, "EM restarts");
  fit_noise->add_option("--out", fit.out_path, "Output model JSON")
      ->required();

  MetricsArgs met;
  auto* metrics =
      app.add_subcommand("metrics", "Segmental SI-SDR family report");
  metrics->add_option("--estimate", met.estimate_path, "Estimate WAV")
      ->required();
  metrics->add_option("--target", met.target_path, "Clean target WAV")
      ->required();
  metrics->add_option("--interference", met.interference_path,
                      "Noise-only reference WAV (enables SI-SIR/SI-SAR)");
  metrics->add_option("--segment-ms", met.segment_ms, "Segment length");
  metrics->add_option("--out", met.out_path, "Report JSON path");
  metrics->add_option("--csv", met.csv_path, "Report CSV path");
  metrics->add_option("--label", met.label, "Method label for CSV rows");

  DirectivityArgs dir;
  auto* directivity = app.add_subcommand(
      "directivity", "Per-component MVDR directivity patterns from a model");
  directivity->add_option("--model", dir.model_path, "Noise model JSON")
      ->required();
  directivity->add_option("--geometry", dir.geometry,
                          "Array geometry, e.g. linear:2x0.06");
  directivity->add_option("--out", dir.out_path, "Output CSV")->required();
  directivity->add_option("--target-angle", dir.target_angle_deg,
                          "Distortionless direction in degrees");
  directivity->add_option("--angle-step", dir.angle_step_deg,
                          "Angle grid step in degrees");
  directivity->add_option("--min-freq", dir.min_freq, "Lowest frequency");
  directivity->add_option("--max-freq", dir.max_freq, "Highest frequency");
  directivity->add_option("--window", dir.window_index,
                          "EM window index for time-varying models");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      if (*seed_opt) sim.seed = sim_seed;
      if (*utt_opt) sim.utterances = sim_utt;
      if (*sec_opt) sim.seconds = sim_sec;
      return run_simulate(sim);
    }
    if (enhance->parsed()) return run_enhance(enh);
    if (fit_noise->parsed()) return run_fit_noise(fit);
    if (metrics->parsed()) return run_metrics(met);
    if (directivity->parsed()) return run_directivity(dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
