#include "nsf/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nsf/random.hpp"
#include "nsf/version.hpp"
#include "nsf/wav.hpp"

namespace nsf {

using json = nlohmann::json;

namespace {

constexpr Method kAllMethods[] = {Method::kMvdr, Method::kMwf,
                                  Method::kMvdrMmse, Method::kNlMmse};

std::string psd_mode_to_string(PsdMode mode) {
  return mode == PsdMode::kCepstral ? "cepstral" : "oracle";
}

PsdMode psd_mode_from_string(const std::string& name) {
  if (name == "cepstral") return PsdMode::kCepstral;
  if (name == "oracle") return PsdMode::kOracle;
  throw ConfigError("unknown psd_mode '" + name + "'");
}

}  // namespace

ExperimentKind experiment_from_string(const std::string& name) {
  if (name == "heavy-tailed" || name == "heavy_tailed") {
    return ExperimentKind::kHeavyTailed;
  }
  if (name == "interferer-speech" || name == "interferer_speech") {
    return ExperimentKind::kInterfererSpeech;
  }
  if (name == "gaussian-bursts" || name == "gaussian_bursts") {
    return ExperimentKind::kGaussianBursts;
  }
  if (name == "external-pair" || name == "external_pair") {
    return ExperimentKind::kExternalPair;
  }
  throw ConfigError("unknown experiment '" + name + "'");
}

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kHeavyTailed: return "heavy-tailed";
    case ExperimentKind::kInterfererSpeech: return "interferer-speech";
    case ExperimentKind::kGaussianBursts: return "gaussian-bursts";
    case ExperimentKind::kExternalPair: return "external-pair";
  }
  return "?";
}

ExperimentConfig ExperimentConfig::from_json_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    if (doc.contains("kind")) {
      cfg.kind = experiment_from_string(doc["kind"].get<std::string>());
    }
    if (doc.contains("stft")) {
      const auto& s = doc["stft"];
      cfg.stft.sample_rate = s.value("sample_rate", cfg.stft.sample_rate);
      cfg.stft.window_ms = s.value("window_ms", cfg.stft.window_ms);
      cfg.stft.shift_ms = s.value("shift_ms", cfg.stft.shift_ms);
    }
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.snr_db = doc.value("snr_db", cfg.snr_db);
    cfg.nu = doc.value("nu", cfg.nu);
    if (doc.contains("psd_mode")) {
      cfg.psd_mode = psd_mode_from_string(doc["psd_mode"].get<std::string>());
    }
    cfg.mic_count = doc.value("mic_count", cfg.mic_count);
    cfg.mic_spacing = doc.value("mic_spacing", cfg.mic_spacing);
    cfg.scale_factor = doc.value("scale_factor", cfg.scale_factor);
    if (doc.contains("component_grid")) {
      cfg.component_grid = doc["component_grid"].get<std::vector<int>>();
    }
    cfg.white_fraction = doc.value("white_fraction", cfg.white_fraction);
    cfg.interferer_count = doc.value("interferer_count", cfg.interferer_count);
    cfg.interferer_spacing =
        doc.value("interferer_spacing", cfg.interferer_spacing);
    cfg.burst_ms = doc.value("burst_ms", cfg.burst_ms);
    if (doc.contains("em")) {
      const auto& e = doc["em"];
      cfg.em_window_ms = e.value("window_ms", cfg.em_window_ms);
      cfg.em_overlap = e.value("overlap", cfg.em_overlap);
      cfg.em_components = e.value("components", cfg.em_components);
      cfg.em.max_iterations = e.value("max_iterations", cfg.em.max_iterations);
      cfg.em.restarts = e.value("restarts", cfg.em.restarts);
      cfg.em.rel_tolerance = e.value("rel_tolerance", cfg.em.rel_tolerance);
      cfg.em.weight_floor = e.value("weight_floor", cfg.em.weight_floor);
    }
    if (doc.contains("speech_files")) {
      cfg.speech_files = doc["speech_files"].get<std::vector<std::string>>();
    }
    cfg.synthetic_utterances =
        doc.value("synthetic_utterances", cfg.synthetic_utterances);
    cfg.synthetic_seconds =
        doc.value("synthetic_seconds", cfg.synthetic_seconds);
    cfg.clean_path = doc.value("clean_path", cfg.clean_path);
    cfg.noise_path = doc.value("noise_path", cfg.noise_path);
    if (doc.contains("external")) {
      const auto& e = doc["external"];
      if (e.contains("component_grid")) {
        cfg.external_component_grid =
            e["component_grid"].get<std::vector<int>>();
      }
      cfg.external_em_window_ms =
          e.value("em_window_ms", cfg.external_em_window_ms);
      if (e.contains("snr_db")) {
        cfg.external_snr_db = e["snr_db"].get<double>();
      }
      cfg.steering_smoothing =
          e.value("steering_smoothing", cfg.steering_smoothing);
    }
    cfg.output_dir = doc.value("output_dir", cfg.output_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  return cfg;
}

std::string ExperimentConfig::to_json_string(int indent) const {
  json doc;
  doc["kind"] = to_string(kind);
  doc["stft"] = {{"sample_rate", stft.sample_rate},
                 {"window_ms", stft.window_ms},
                 {"shift_ms", stft.shift_ms}};
  doc["seed"] = seed;
  doc["snr_db"] = snr_db;
  doc["nu"] = nu;
  doc["psd_mode"] = psd_mode_to_string(psd_mode);
  doc["mic_count"] = mic_count;
  doc["mic_spacing"] = mic_spacing;
  doc["scale_factor"] = scale_factor;
  doc["component_grid"] = component_grid;
  doc["white_fraction"] = white_fraction;
  doc["interferer_count"] = interferer_count;
  doc["interferer_spacing"] = interferer_spacing;
  doc["burst_ms"] = burst_ms;
  doc["em"] = {{"window_ms", em_window_ms},
               {"overlap", em_overlap},
               {"components", em_components},
               {"max_iterations", em.max_iterations},
               {"restarts", em.restarts},
               {"rel_tolerance", em.rel_tolerance},
               {"weight_floor", em.weight_floor}};
  doc["speech_files"] = speech_files;
  doc["synthetic_utterances"] = synthetic_utterances;
  doc["synthetic_seconds"] = synthetic_seconds;
  doc["clean_path"] = clean_path;
  doc["noise_path"] = noise_path;
  json external = {{"component_grid", external_component_grid},
                   {"em_window_ms", external_em_window_ms},
                   {"steering_smoothing", steering_smoothing}};
  if (external_snr_db) external["snr_db"] = *external_snr_db;
  doc["external"] = std::move(external);
  doc["output_dir"] = output_dir;
  return doc.dump(indent);
}

std::vector<int> ExperimentResult::component_values() const {
  std::set<int> values;
  for (const auto& row : rows) values.insert(row.components);
  return {values.begin(), values.end()};
}

double ExperimentResult::q_for(int components) const {
  for (const auto& row : rows) {
    if (row.components == components) return row.q;
  }
  throw ConfigError("ExperimentResult: no rows for requested condition");
}

double ExperimentResult::mean_si_sdr(int components, Method method) const {
  const std::string name = to_string(method);
  double acc = 0.0;
  int count = 0;
  for (const auto& row : rows) {
    if (row.components == components && row.method == name) {
      acc += row.si_sdr;
      ++count;
    }
  }
  if (count == 0) {
    throw ConfigError("ExperimentResult: no rows for requested condition");
  }
  return acc / count;
}

double ExperimentResult::gap_si_sdr(int components) const {
  return mean_si_sdr(components, Method::kNlMmse) -
         mean_si_sdr(components, Method::kMvdrMmse);
}

std::string ExperimentResult::to_csv() const {
  std::ostringstream os;
  os << "experiment,components,q,method,utterance,si_sdr,si_sir,si_sar,"
        "segments\n";
  char line[256];
  for (const auto& row : rows) {
    std::snprintf(line, sizeof(line), "%s,%d,%.6f,%s,%s,%.6f,%.6f,%.6f,%d\n",
                  to_string(kind).c_str(), row.components, row.q,
                  row.method.c_str(), row.utterance.c_str(), row.si_sdr,
                  row.si_sir, row.si_sar, row.segments);
    os << line;
  }
  return os.str();
}

std::string ExperimentResult::summary_csv() const {
  std::ostringstream os;
  os << "experiment,components,q,method,si_sdr,si_sir,si_sar\n";
  char line[256];
  for (int m : component_values()) {
    for (Method method : kAllMethods) {
      const std::string name = to_string(method);
      double sdr = 0.0, sir = 0.0, sar = 0.0;
      int count = 0;
      for (const auto& row : rows) {
        if (row.components == m && row.method == name) {
          sdr += row.si_sdr;
          sir += row.si_sir;
          sar += row.si_sar;
          ++count;
        }
      }
      if (count == 0) continue;
      std::snprintf(line, sizeof(line), "%s,%d,%.6f,%s,%.6f,%.6f,%.6f\n",
                    to_string(kind).c_str(), m, q_for(m), name.c_str(),
                    sdr / count, sir / count, sar / count);
      os << line;
    }
    // Headline gap between the joint nonlinear filter and the two-step setup.
    bool have_both = true;
    double gap = 0.0;
    try {
      gap = gap_si_sdr(m);
    } catch (const ConfigError&) {
      have_both = false;
    }
    if (have_both) {
      std::snprintf(line, sizeof(line), "%s,%d,%.6f,delta_nl_vs_post,%.6f,,\n",
                    to_string(kind).c_str(), m, q_for(m), gap);
      os << line;
    }
  }
  return os.str();
}

Eigen::VectorXd synthetic_utterance(std::uint64_t seed, double seconds,
                                    double sample_rate) {
  if (!(seconds > 0.0) || !(sample_rate > 0.0)) {
    throw ConfigError("synthetic_utterance: invalid duration or rate");
  }
  auto rng = make_rng(mix_seed(seed, 0x757474u));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  const auto n = static_cast<Eigen::Index>(std::lround(seconds * sample_rate));
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  const double f0_base = 110.0 + 130.0 * unif(rng);

  // Formant-like spectral envelope, fixed per utterance.
  const double formants[3] = {300.0 + 500.0 * unif(rng),
                              900.0 + 1300.0 * unif(rng),
                              2400.0 + 800.0 * unif(rng)};
  const double widths[3] = {120.0 + 120.0 * unif(rng),
                            150.0 + 150.0 * unif(rng),
                            200.0 + 150.0 * unif(rng)};
  auto envelope = [&](double f) {
    double g = 0.05;
    for (int j = 0; j < 3; ++j) {
      const double d = (f - formants[j]) / widths[j];
      g += 1.0 / (1.0 + d * d);
    }
    return g;
  };

  Eigen::Index t = 0;
  while (t < n) {
    const double kind = unif(rng);
    if (kind < 0.55) {  // voiced
      const double dur = 0.12 + 0.25 * unif(rng);
      const auto len = std::min<Eigen::Index>(
          static_cast<Eigen::Index>(dur * sample_rate), n - t);
      if (len < 32) break;
      const double f0 = f0_base * (0.9 + 0.25 * unif(rng));
      const double syllable_hz = 2.0 + 4.0 * unif(rng);
      const double vibrato_phase = 2.0 * std::numbers::pi * unif(rng);
      const int harmonics =
          std::max(1, static_cast<int>(0.45 * sample_rate / f0));
      Eigen::VectorXd seg = Eigen::VectorXd::Zero(len);
      for (int h = 1; h <= harmonics; ++h) {
        const double freq = h * f0;
        const double amp = envelope(freq) / h;
        const double phase0 = 2.0 * std::numbers::pi * unif(rng);
        for (Eigen::Index i = 0; i < len; ++i) {
          const double time = static_cast<double>(i) / sample_rate;
          const double warped =
              time + 0.004 * std::sin(2.0 * std::numbers::pi * 4.7 * time +
                                      vibrato_phase);
          seg[i] += amp * std::cos(2.0 * std::numbers::pi * freq * warped +
                                   phase0);
        }
      }
      // Attack/decay ramps plus syllabic amplitude modulation.
      const auto ramp = std::min<Eigen::Index>(len / 4, 320);
      for (Eigen::Index i = 0; i < len; ++i) {
        double env = 1.0;
        if (i < ramp) env *= 0.5 - 0.5 * std::cos(std::numbers::pi * i / ramp);
        if (i >= len - ramp) {
          env *= 0.5 - 0.5 * std::cos(std::numbers::pi * (len - 1 - i) / ramp);
        }
        const double time = static_cast<double>(i) / sample_rate;
        env *= 1.0 - 0.35 * std::sin(2.0 * std::numbers::pi * syllable_hz *
                                     time);
        seg[i] *= env;
      }
      const double rms = std::sqrt(seg.squaredNorm() / len);
      if (rms > 0.0) seg *= (0.15 + 0.15 * unif(rng)) / rms;
      out.segment(t, len) = seg;
      t += len;
    } else if (kind < 0.78) {  // unvoiced, fricative-like
      const double dur = 0.06 + 0.10 * unif(rng);
      const auto len = std::min<Eigen::Index>(
          static_cast<Eigen::Index>(dur * sample_rate), n - t);
      if (len < 16) break;
      Eigen::VectorXd seg(len);
      double prev = 0.0;
      for (Eigen::Index i = 0; i < len; ++i) {
        const double white = normal(rng);
        seg[i] = white - prev;  // first difference: high-frequency emphasis
        prev = white;
      }
      const auto ramp = std::min<Eigen::Index>(len / 4, 160);
      for (Eigen::Index i = 0; i < len; ++i) {
        double env = 1.0;
        if (i < ramp) env *= static_cast<double>(i) / ramp;
        if (i >= len - ramp) env *= static_cast<double>(len - 1 - i) / ramp;
        seg[i] *= env;
      }
      const double rms = std::sqrt(seg.squaredNorm() / len);
      if (rms > 0.0) seg *= (0.03 + 0.05 * unif(rng)) / rms;
      out.segment(t, len) = seg;
      t += len;
    } else {  // pause with a faint breath floor
      const double dur = 0.08 + 0.17 * unif(rng);
      const auto len = std::min<Eigen::Index>(
          static_cast<Eigen::Index>(dur * sample_rate), n - t);
      if (len < 16) break;
      for (Eigen::Index i = 0; i < len; ++i) {
        out[t + i] = 0.002 * normal(rng);
      }
      t += len;
    }
  }
  const double peak = out.cwiseAbs().maxCoeff();
  if (peak > 0.5) out *= 0.5 / peak;
  return out;
}

Eigen::MatrixXd gaussian_burst_noise(const Scenario& scenario,
                                     Eigen::Index num_samples, double burst_ms,
                                     std::uint64_t seed) {
  scenario.validate();
  const double fs = scenario.stft.sample_rate;
  const auto burst_len =
      static_cast<Eigen::Index>(std::lround(burst_ms * fs / 1000.0));
  if (burst_len < 1) throw ConfigError("gaussian_burst_noise: burst too short");
  const int count = static_cast<int>(scenario.interferer_angles.size());
  if (count < 1) throw ConfigError("gaussian_burst_noise: no interferers");

  auto rng = make_rng(mix_seed(seed, 0xb0757u));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::VectorXd> sources(
      count, Eigen::VectorXd::Zero(num_samples));
  for (Eigen::Index t = 0; t < num_samples; ++t) {
    const int active = static_cast<int>((t / burst_len) % count);
    sources[active][t] = normal(rng);
  }
  return interferer_source_noise(scenario, sources, num_samples);
}

Eigen::MatrixXd interferer_source_noise(
    const Scenario& scenario, const std::vector<Eigen::VectorXd>& sources,
    Eigen::Index num_samples) {
  scenario.validate();
  if (sources.size() != scenario.interferer_angles.size()) {
    throw ConfigError("interferer_source_noise: sources/angles mismatch");
  }
  Spectrogram total;
  bool first = true;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    Eigen::VectorXd src = sources[i];
    if (src.size() < num_samples) {
      Eigen::VectorXd padded = Eigen::VectorXd::Zero(num_samples);
      padded.head(src.size()) = src;
      src = std::move(padded);
    } else if (src.size() > num_samples) {
      src = src.head(num_samples).eval();
    }
    Spectrogram spat = spatialize(src, scenario.geometry,
                                  scenario.interferer_angles[i],
                                  scenario.stft);
    if (first) {
      total = std::move(spat);
      first = false;
    } else {
      total += spat;
    }
  }
  return synthesize(total, scenario.stft, num_samples);
}

namespace {

struct UtteranceSet {
  std::vector<std::string> names;
  std::vector<Eigen::VectorXd> signals;
};

UtteranceSet load_utterances(const ExperimentConfig& cfg, int count,
                             std::uint64_t seed_salt) {
  UtteranceSet set;
  if (!cfg.speech_files.empty()) {
    for (const auto& path : cfg.speech_files) {
      WavData wav = read_wav(path);
      if (std::abs(wav.sample_rate - cfg.stft.sample_rate) > 1e-6) {
        throw ConfigError("utterance sample rate mismatch (resampling is not "
                          "supported): " + path);
      }
      set.names.push_back(std::filesystem::path(path).filename().string());
      set.signals.push_back(wav.samples.col(0));
    }
    if (static_cast<int>(set.signals.size()) < count) {
      throw ConfigError("not enough speech files for this experiment");
    }
    set.names.resize(count);
    set.signals.resize(count);
  } else {
    for (int u = 0; u < count; ++u) {
      set.names.push_back("synthetic-" + std::to_string(u));
      set.signals.push_back(synthetic_utterance(
          mix_seed(cfg.seed, seed_salt, static_cast<std::uint64_t>(u)),
          cfg.synthetic_seconds, cfg.stft.sample_rate));
    }
  }
  return set;
}

// Trims the analysis edges (one window on each side) before metrics.
Eigen::VectorXd interior(const Eigen::VectorXd& x, int window_samples) {
  const Eigen::Index keep = x.size() - 2 * window_samples;
  if (keep < window_samples) return x;
  return x.segment(window_samples, keep);
}

struct EvaluationContext {
  const ExperimentConfig* cfg = nullptr;
  const Spectrogram* noisy = nullptr;
  const NoiseModel* model = nullptr;
  // Model for the speech-PSD path when it differs from `model` (the
  // external-pair pipeline pins it to the first EM window).
  const NoiseModel* psd_model = nullptr;
  SteeringField steering;
  const Spectrogram* clean = nullptr;  // for oracle PSD
  Eigen::VectorXd target_time;
  Eigen::VectorXd noise_time;
};

// Runs every estimator on one noisy scenario and reports segmental metrics.
std::map<Method, MetricsReport> evaluate_methods(const EvaluationContext& ctx) {
  const ExperimentConfig& cfg = *ctx.cfg;
  const int window = cfg.stft.window_samples();
  const Eigen::Index length = ctx.target_time.size();

  // Speech power: cepstral smoothing on the MVDR output by default.
  MvdrPass mvdr = mvdr_pass(*ctx.noisy, *ctx.model, ctx.steering);
  SpeechPrior prior;
  prior.nu = cfg.nu;
  if (cfg.psd_mode == PsdMode::kOracle) {
    if (ctx.clean == nullptr) {
      throw ConfigError("oracle psd requested without clean spectrogram");
    }
    prior.sigma_s2 = oracle_speech_psd(*ctx.clean, 0);
  } else {
    const MvdrPass* psd_pass = &mvdr;
    std::optional<MvdrPass> alternate;
    if (ctx.psd_model != nullptr && ctx.psd_model != ctx.model) {
      alternate = mvdr_pass(*ctx.noisy, *ctx.psd_model, ctx.steering);
      psd_pass = &*alternate;
    }
    const Eigen::ArrayXd noise_psd = psd_pass->residual_noise.rowwise().mean();
    prior.sigma_s2 = estimate_speech_psd(psd_pass->output.power(0), noise_psd,
                                         cfg.stft.sample_rate);
  }

  EnhanceInput input;
  input.noisy = ctx.noisy;
  input.noise = ctx.model;
  input.steering = ctx.steering;
  input.prior = prior;
  input.stft = cfg.stft;

  const Eigen::VectorXd target = interior(ctx.target_time, window);
  const Eigen::VectorXd noise_ref = interior(ctx.noise_time, window);

  std::map<Method, MetricsReport> reports;
  for (Method method : kAllMethods) {
    Eigen::VectorXd est;
    if (method == Method::kMvdr) {
      est = synthesize_mono(mvdr.output, cfg.stft, length);
    } else {
      est = enhance(input, method, length);
    }
    const Eigen::VectorXd est_interior = interior(est, window);
    reports.emplace(method,
                    si_sdr_segmental(est_interior, target, &noise_ref,
                                     cfg.stft.sample_rate));
  }
  return reports;
}

}  // namespace

ExperimentResult run_heavy_tailed(const ExperimentConfig& cfg) {
  cfg.stft.validate();
  ExperimentResult result;
  result.kind = ExperimentKind::kHeavyTailed;

  const ArrayGeometry geometry =
      ArrayGeometry::linear(cfg.mic_count, cfg.mic_spacing);
  const int d = geometry.size();
  const int bins = cfg.stft.num_bins();
  UtteranceSet utterances =
      load_utterances(cfg, cfg.synthetic_utterances, 0x41u);

  for (std::size_t u = 0; u < utterances.signals.size(); ++u) {
    const Eigen::VectorXd& mono = utterances.signals[u];
    const Eigen::MatrixXd broadside = mono.replicate(1, d);
    const Spectrogram clean_spec = analyze(broadside, cfg.stft);
    const int frames = clean_spec.frames();
    const double clean_power = clean_spec.total_power(0);

    for (int m : cfg.component_grid) {
      // Oracle mixture per bin: scaled copies of the diffuse-field shape.
      std::vector<GaussianMixture> bin_mixtures(bins);
      for (int k = 0; k < bins; ++k) {
        ScaledMixtureSpec spec;
        spec.components = m;
        spec.scale = cfg.scale_factor;
        spec.base_covariance = diffuse_covariance(
            geometry, cfg.stft.bin_frequency(k), cfg.white_fraction);
        bin_mixtures[k] = build_scaled_mixture(spec);
      }

      // Noise DFT coefficients drawn directly from the mixture.
      Spectrogram noise_spec(bins, frames, d);
      for (int k = 0; k < bins; ++k) {
        const auto draws =
            sample(bin_mixtures[k], frames,
                   mix_seed(cfg.seed, static_cast<std::uint64_t>(u * 131 + m),
                            static_cast<std::uint64_t>(k)));
        for (int i = 0; i < frames; ++i) {
          noise_spec.channel_vector(k, i) = draws[i];
        }
      }
      const double noise_power = noise_spec.total_power(0);
      const double wanted = clean_power / std::pow(10.0, cfg.snr_db / 10.0);
      const double scale = std::sqrt(wanted / noise_power);
      noise_spec *= scale;
      for (int k = 0; k < bins; ++k) {
        for (auto& cov : bin_mixtures[k].covariances) cov *= scale * scale;
      }

      Spectrogram noisy = clean_spec;
      noisy += noise_spec;

      NoiseModel model;
      model.num_bins = bins;
      model.num_channels = d;
      model.sample_rate = cfg.stft.sample_rate;
      model.fft_size = cfg.stft.fft_size();
      model.shift_samples = cfg.stft.shift_samples();
      model.windows.resize(1);
      model.windows[0].first_frame = 0;
      model.windows[0].last_frame = frames - 1;
      model.windows[0].center_frame = frames / 2;
      model.windows[0].bins = std::move(bin_mixtures);

      EvaluationContext ctx;
      ctx.cfg = &cfg;
      ctx.noisy = &noisy;
      ctx.model = &model;
      ctx.steering = SteeringField::ones(bins, d);
      ctx.clean = &clean_spec;
      ctx.target_time = mono;
      ctx.noise_time =
          synthesize_mono(noise_spec.channel(0), cfg.stft, mono.size());

      const double q = kurtosis_factor(m, cfg.scale_factor);
      for (const auto& [method, report] : evaluate_methods(ctx)) {
        result.rows.push_back({m, q, to_string(method), utterances.names[u],
                               report.si_sdr, report.si_sir, report.si_sar,
                               report.segment_count});
      }
    }
  }
  return result;
}

ExperimentResult run_interferers(const ExperimentConfig& cfg,
                                 bool gaussian_bursts) {
  cfg.stft.validate();
  ExperimentResult result;
  result.kind = gaussian_bursts ? ExperimentKind::kGaussianBursts
                                : ExperimentKind::kInterfererSpeech;

  Scenario scenario;
  scenario.geometry = ArrayGeometry::linear(2, cfg.interferer_spacing);
  scenario.interferer_angles = ring_interferer_angles(cfg.interferer_count);
  scenario.snr_db = cfg.snr_db;
  scenario.stft = cfg.stft;

  const int bins = cfg.stft.num_bins();
  const int d = scenario.geometry.size();
  UtteranceSet utterances =
      load_utterances(cfg, cfg.synthetic_utterances, 0x42u);

  for (std::size_t u = 0; u < utterances.signals.size(); ++u) {
    const Eigen::VectorXd& mono = utterances.signals[u];
    const Eigen::Index length = mono.size();

    Eigen::MatrixXd noise_time;
    if (gaussian_bursts) {
      noise_time = gaussian_burst_noise(
          scenario, length, cfg.burst_ms,
          mix_seed(cfg.seed, 0x6273u, static_cast<std::uint64_t>(u)));
    } else {
      std::vector<Eigen::VectorXd> sources;
      for (int i = 0; i < cfg.interferer_count; ++i) {
        sources.push_back(synthetic_utterance(
            mix_seed(cfg.seed, 0x1f7u + i, static_cast<std::uint64_t>(u)),
            cfg.synthetic_seconds, cfg.stft.sample_rate));
      }
      noise_time = interferer_source_noise(scenario, sources, length);
    }

    // Global rescale to the configured SNR at the reference microphone.
    const double speech_power = mono.squaredNorm();
    const double noise_power = noise_time.col(0).squaredNorm();
    const double wanted = speech_power / std::pow(10.0, cfg.snr_db / 10.0);
    noise_time *= std::sqrt(wanted / noise_power);

    Eigen::MatrixXd noisy_time = noise_time;
    for (int ch = 0; ch < d; ++ch) noisy_time.col(ch) += mono;

    const Spectrogram noisy = analyze(noisy_time, cfg.stft);
    const Spectrogram noise_spec = analyze(noise_time, cfg.stft);
    const Spectrogram clean_spec =
        analyze(Eigen::MatrixXd(mono.replicate(1, d)), cfg.stft);

    EmOptions em = cfg.em;
    em.seed = mix_seed(cfg.seed, 0xe3u, static_cast<std::uint64_t>(u));
    NoiseModel model;
    if (gaussian_bursts) {
      model = em_fit_full(noise_spec, cfg.stft, cfg.em_components, em);
    } else {
      model = em_fit_windowed(noise_spec, cfg.stft, cfg.em_window_ms,
                              cfg.em_overlap, cfg.em_components, em);
    }

    EvaluationContext ctx;
    ctx.cfg = &cfg;
    ctx.noisy = &noisy;
    ctx.model = &model;
    ctx.steering = SteeringField::ones(bins, d);
    ctx.clean = &clean_spec;
    ctx.target_time = mono;
    ctx.noise_time = noise_time.col(0);

    for (const auto& [method, report] : evaluate_methods(ctx)) {
      result.rows.push_back({cfg.em_components, 1.0, to_string(method),
                             utterances.names[u], report.si_sdr,
                             report.si_sir, report.si_sar,
                             report.segment_count});
    }
  }
  return result;
}

ExperimentResult run_external_pair(const ExperimentConfig& cfg) {
  cfg.stft.validate();
  ExperimentResult result;
  result.kind = ExperimentKind::kExternalPair;
  if (cfg.clean_path.empty() || cfg.noise_path.empty()) {
    throw ConfigError("external-pair: clean_path and noise_path are required");
  }
  WavData clean = read_wav(cfg.clean_path);
  WavData noise = read_wav(cfg.noise_path);
  if (std::abs(clean.sample_rate - cfg.stft.sample_rate) > 1e-6 ||
      std::abs(noise.sample_rate - cfg.stft.sample_rate) > 1e-6) {
    throw ConfigError("external-pair: sample rate mismatch (resampling is "
                      "not supported)");
  }
  if (clean.samples.cols() != noise.samples.cols()) {
    throw ConfigError("external-pair: channel count mismatch");
  }
  const Eigen::Index length =
      std::min(clean.samples.rows(), noise.samples.rows());
  Eigen::MatrixXd clean_time = clean.samples.topRows(length);
  Eigen::MatrixXd noise_time = noise.samples.topRows(length);
  if (cfg.external_snr_db) {
    const double wanted = clean_time.col(0).squaredNorm() /
                          std::pow(10.0, *cfg.external_snr_db / 10.0);
    noise_time *= std::sqrt(wanted / noise_time.col(0).squaredNorm());
  }
  const Eigen::MatrixXd noisy_time = clean_time + noise_time;

  const Spectrogram clean_spec = analyze(clean_time, cfg.stft);
  const Spectrogram noise_spec = analyze(noise_time, cfg.stft);
  const Spectrogram noisy = analyze(noisy_time, cfg.stft);

  const SteeringField steering = SteeringField::time_varying(
      estimate_steering(clean_spec, cfg.steering_smoothing));

  for (int m : cfg.external_component_grid) {
    EmOptions em = cfg.em;
    em.seed = mix_seed(cfg.seed, 0xec5u, static_cast<std::uint64_t>(m));
    NoiseModel model =
        em_fit_windowed(noise_spec, cfg.stft, cfg.external_em_window_ms,
                        cfg.em_overlap, m, em);

    // Convention: the speech PSD is estimated on the MVDR output computed
    // with the first EM window's model.
    NoiseModel first_window = model;
    first_window.windows.resize(1);

    EvaluationContext ctx;
    ctx.cfg = &cfg;
    ctx.noisy = &noisy;
    ctx.model = &model;
    ctx.steering = steering;
    ctx.clean = &clean_spec;
    ctx.target_time = clean_time.col(0);
    ctx.noise_time = noise_time.col(0);
    ctx.psd_model = &first_window;

    for (const auto& [method, report] : evaluate_methods(ctx)) {
      result.rows.push_back({m, 1.0, to_string(method), "external",
                             report.si_sdr, report.si_sir, report.si_sar,
                             report.segment_count});
    }
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentResult result;
  switch (cfg.kind) {
    case ExperimentKind::kHeavyTailed:
      result = run_heavy_tailed(cfg);
      break;
    case ExperimentKind::kInterfererSpeech:
      result = run_interferers(cfg, false);
      break;
    case ExperimentKind::kGaussianBursts:
      result = run_interferers(cfg, true);
      break;
    case ExperimentKind::kExternalPair:
      result = run_external_pair(cfg);
      break;
  }
  if (!cfg.output_dir.empty()) {
    write_experiment_outputs(cfg, result);
  }
  return result;
}

std::string content_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

void write_experiment_outputs(const ExperimentConfig& cfg,
                              const ExperimentResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  const fs::path dir(cfg.output_dir);

  auto write_file = [](const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw FileError("cannot write " + path.string());
    os << text;
  };
  write_file(dir / "results.csv", result.to_csv());
  write_file(dir / "summary.csv", result.summary_csv());

  const std::string config_text = cfg.to_json_string(2);
  json manifest;
  manifest["schema_version"] = 1;
  manifest["library_version"] = kVersionString;
  manifest["seed"] = cfg.seed;
  manifest["config_hash"] = content_hash(config_text);
  manifest["config"] = json::parse(config_text);
  write_file(dir / "manifest.json", manifest.dump(2));
}

}  // namespace nsf
