#include "nsf/noise_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "nsf/numerics.hpp"
#include "nsf/parallel.hpp"
#include "nsf/random.hpp"

namespace nsf {

using json = nlohmann::json;

Eigen::MatrixXcd GaussianMixture::aggregate_covariance() const {
  validate();
  Eigen::MatrixXcd agg = Eigen::MatrixXcd::Zero(dim(), dim());
  for (int m = 0; m < components(); ++m) {
    agg += weights[m] * covariances[m];
  }
  return agg;
}

void GaussianMixture::validate() const {
  if (weights.empty() || weights.size() != covariances.size()) {
    throw ConfigError("GaussianMixture: weights/covariances mismatch");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw ConfigError("GaussianMixture: weights must be > 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-8) {
    throw ConfigError("GaussianMixture: weights must sum to one");
  }
  const int d = dim();
  for (const auto& cov : covariances) {
    if (cov.rows() != d || cov.cols() != d) {
      throw ConfigError("GaussianMixture: covariance dimension mismatch");
    }
  }
}

GaussianMixture build_scaled_mixture(const ScaledMixtureSpec& spec) {
  if (spec.components < 1) {
    throw ConfigError("build_scaled_mixture: need >= 1 component");
  }
  if (!(spec.scale > 0.0)) {
    throw ConfigError("build_scaled_mixture: scale must be > 0");
  }
  if (spec.base_covariance.rows() != spec.base_covariance.cols() ||
      spec.base_covariance.rows() < 1) {
    throw ConfigError("build_scaled_mixture: base covariance must be square");
  }
  const int m = spec.components;
  const double weight = 1.0 / m;
  double r = 0.0;
  double power = 1.0;
  for (int i = 0; i < m; ++i) {
    r += weight * power;
    power *= spec.scale;
  }
  GaussianMixture mix;
  mix.weights.assign(m, weight);
  mix.covariances.reserve(m);
  power = 1.0;
  for (int i = 0; i < m; ++i) {
    mix.covariances.push_back((power / r) * spec.base_covariance);
    power *= spec.scale;
  }
  return mix;
}

double kurtosis_factor(int components, double scale) {
  if (components < 1) throw ConfigError("kurtosis_factor: components >= 1");
  if (!(scale > 0.0)) throw ConfigError("kurtosis_factor: scale must be > 0");
  const double weight = 1.0 / components;
  double r = 0.0;
  double q_num = 0.0;
  double power = 1.0;
  for (int m = 0; m < components; ++m) {
    r += weight * power;
    q_num += weight * power * power;
    power *= scale;
  }
  return q_num / (r * r);
}

double gaussian_kurtosis(int dim) {
  return 2.0 * dim * (2.0 + 2.0 * dim);
}

std::vector<Eigen::VectorXcd> sample(const GaussianMixture& mix, int count,
                                     std::uint64_t seed) {
  mix.validate();
  const int d = mix.dim();
  const int m = mix.components();

  // Cholesky factors; a zero covariance yields zero draws.
  std::vector<Eigen::MatrixXcd> chol(m);
  for (int c = 0; c < m; ++c) {
    if (mix.covariances[c].norm() == 0.0) {
      chol[c] = Eigen::MatrixXcd::Zero(d, d);
      continue;
    }
    Eigen::LLT<Eigen::MatrixXcd> llt(mix.covariances[c]);
    if (llt.info() != Eigen::Success) {
      // Retry with the shared loading policy.
      HermitianFactor factor(mix.covariances[c]);
      Eigen::MatrixXcd loaded = mix.covariances[c];
      loaded.diagonal().array() += factor.loading();
      llt.compute(loaded);
      if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite("sample: component covariance not PSD");
      }
    }
    chol[c] = llt.matrixL();
  }

  std::vector<double> cdf(m);
  double acc = 0.0;
  for (int c = 0; c < m; ++c) {
    acc += mix.weights[c];
    cdf[c] = acc;
  }
  cdf[m - 1] = 1.0;

  auto rng = make_rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

  std::vector<Eigen::VectorXcd> draws;
  draws.reserve(count);
  Eigen::VectorXcd u(d);
  for (int i = 0; i < count; ++i) {
    const double pick = unif(rng);
    const int c = static_cast<int>(
        std::lower_bound(cdf.begin(), cdf.end(), pick) - cdf.begin());
    for (int j = 0; j < d; ++j) {
      u(j) = std::complex<double>(normal(rng), normal(rng)) * inv_sqrt2;
    }
    draws.push_back(chol[c] * u);
  }
  return draws;
}

double sample_kurtosis(const std::vector<Eigen::VectorXcd>& samples) {
  if (samples.empty()) throw ConfigError("sample_kurtosis: no samples");
  const int d = static_cast<int>(samples[0].size());
  const auto n = static_cast<Eigen::Index>(samples.size());
  if (n < static_cast<Eigen::Index>(d) * d) {
    throw ConfigError("sample_kurtosis: need at least dim^2 samples");
  }
  Eigen::VectorXcd mean = Eigen::VectorXcd::Zero(d);
  for (const auto& z : samples) mean += z;
  mean /= static_cast<double>(n);
  Eigen::MatrixXcd cov = Eigen::MatrixXcd::Zero(d, d);
  for (const auto& z : samples) {
    const Eigen::VectorXcd centered = z - mean;
    cov.noalias() += centered * centered.adjoint();
  }
  cov /= static_cast<double>(n);
  HermitianFactor factor(cov);  // throws NotPositiveDefinite when singular
  double acc = 0.0;
  for (const auto& z : samples) {
    const double q = 2.0 * factor.quadratic(z - mean);
    acc += q * q;
  }
  return acc / static_cast<double>(n);
}

namespace {

constexpr double kLogPi = 1.1447298858494002;  // log(pi)

struct EmRun {
  GaussianMixture mixture;
  std::vector<double> trace;
  double final_ll = -std::numeric_limits<double>::infinity();
};

// One EM run from given initial responsibilities (frames x components).
EmRun em_single_run(const std::vector<Eigen::VectorXcd>& frames,
                    Eigen::MatrixXd resp, const EmOptions& opts) {
  const int t = static_cast<int>(frames.size());
  const int d = static_cast<int>(frames[0].size());
  const int m = static_cast<int>(resp.cols());

  EmRun run;
  run.mixture.weights.assign(m, 1.0 / m);
  run.mixture.covariances.assign(m, Eigen::MatrixXcd::Zero(d, d));

  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    // M-step from responsibilities.
    for (int c = 0; c < m; ++c) {
      const double mass = resp.col(c).sum();
      if (!(mass > 0.0)) {
        throw DegenerateComponent(
            "em_fit: component received zero responsibility mass");
      }
      Eigen::MatrixXcd scatter = Eigen::MatrixXcd::Zero(d, d);
      for (int i = 0; i < t; ++i) {
        scatter.noalias() +=
            resp(i, c) * (frames[i] * frames[i].adjoint());
      }
      scatter /= mass;
      // Regularize: diagonal loading relative to the component trace.
      const double load = 1e-8 * scatter.trace().real() / d;
      scatter.diagonal().array() += load;
      run.mixture.covariances[c] = scatter;
      run.mixture.weights[c] = mass / t;
    }
    // Weight floor with renormalization.
    double wsum = 0.0;
    for (int c = 0; c < m; ++c) {
      run.mixture.weights[c] =
          std::max(run.mixture.weights[c], opts.weight_floor);
      wsum += run.mixture.weights[c];
    }
    for (int c = 0; c < m; ++c) run.mixture.weights[c] /= wsum;

    // E-step: responsibilities and log-likelihood in the log domain.
    std::vector<HermitianFactor> factors;
    factors.reserve(m);
    std::vector<double> log_norm(m);
    for (int c = 0; c < m; ++c) {
      factors.emplace_back(run.mixture.covariances[c]);
      log_norm[c] = std::log(run.mixture.weights[c]) - d * kLogPi -
                    factors[c].log_det();
    }
    double ll = 0.0;
    for (int i = 0; i < t; ++i) {
      double max_term = -std::numeric_limits<double>::infinity();
      Eigen::ArrayXd terms(m);
      for (int c = 0; c < m; ++c) {
        terms[c] = log_norm[c] - factors[c].quadratic(frames[i]);
        max_term = std::max(max_term, terms[c]);
      }
      double denom = 0.0;
      for (int c = 0; c < m; ++c) denom += std::exp(terms[c] - max_term);
      for (int c = 0; c < m; ++c) {
        resp(i, c) = std::exp(terms[c] - max_term) / denom;
      }
      ll += max_term + std::log(denom);
    }
    if (!std::isfinite(ll)) {
      throw DegenerateComponent("em_fit: log-likelihood is not finite");
    }
    if (iter > 0 && ll + 1e-8 * (1.0 + std::abs(ll)) < prev_ll) {
      throw Error("em_fit: log-likelihood decreased");
    }
    run.trace.push_back(ll);
    const bool converged =
        iter > 0 && std::abs(ll - prev_ll) <=
                        opts.rel_tolerance * (1.0 + std::abs(prev_ll));
    prev_ll = ll;
    if (converged) break;
  }
  run.final_ll = prev_ll;
  return run;
}

}  // namespace

EmResult em_fit(const std::vector<Eigen::VectorXcd>& frames, int components,
                const EmOptions& opts) {
  if (components < 1) throw ConfigError("em_fit: components must be >= 1");
  if (frames.empty()) throw ConfigError("em_fit: no frames");
  const int d = static_cast<int>(frames[0].size());
  const auto t = static_cast<int>(frames.size());
  if (t < components * d) {
    throw ConfigError("em_fit: need at least components*dim frames");
  }
  for (const auto& f : frames) {
    if (f.size() != d) throw ConfigError("em_fit: frame dimension mismatch");
  }

  // M = 1 has the closed-form solution; run a single deterministic pass.
  const int restarts = components == 1 ? 1 : std::max(1, opts.restarts);

  auto rng = make_rng(opts.seed);
  std::uniform_real_distribution<double> unif(0.05, 1.0);

  EmRun best;
  bool have_best = false;
  for (int r = 0; r < restarts; ++r) {
    Eigen::MatrixXd resp(t, components);
    if (components == 1) {
      resp.setOnes();
    } else {
      for (int i = 0; i < t; ++i) {
        double sum = 0.0;
        for (int c = 0; c < components; ++c) {
          resp(i, c) = unif(rng);
          sum += resp(i, c);
        }
        resp.row(i) /= sum;
      }
    }
    try {
      EmRun run = em_single_run(frames, std::move(resp), opts);
      if (!have_best || run.final_ll > best.final_ll) {
        best = std::move(run);
        have_best = true;
      }
    } catch (const DegenerateComponent&) {
      if (r == restarts - 1 && !have_best) throw;
    }
  }
  if (!have_best) {
    throw DegenerateComponent("em_fit: every restart degenerated");
  }
  return EmResult{std::move(best.mixture), std::move(best.trace)};
}

const GaussianMixture& NoiseModel::lookup(int bin, int frame) const {
  return windows[window_index(frame)].bins[bin];
}

int NoiseModel::window_index(int frame) const {
  if (windows.empty()) throw ConfigError("NoiseModel: no windows");
  int best = 0;
  int best_dist = std::numeric_limits<int>::max();
  for (int w = 0; w < static_cast<int>(windows.size()); ++w) {
    const int dist = std::abs(windows[w].center_frame - frame);
    if (dist < best_dist) {  // strict: ties stay with the earlier window
      best_dist = dist;
      best = w;
    }
  }
  return best;
}

void NoiseModel::validate() const {
  if (windows.empty()) throw ConfigError("NoiseModel: no windows");
  for (const auto& w : windows) {
    if (static_cast<int>(w.bins.size()) != num_bins) {
      throw ConfigError("NoiseModel: window bin count mismatch");
    }
    for (const auto& mix : w.bins) {
      mix.validate();
      if (mix.dim() != num_channels) {
        throw ConfigError("NoiseModel: mixture dimension mismatch");
      }
    }
  }
}

NoiseModel em_fit_windowed(const Spectrogram& noise, const StftConfig& cfg,
                           double window_ms, double overlap, int components,
                           const EmOptions& opts) {
  if (!(window_ms > 0.0)) {
    throw ConfigError("em_fit_windowed: window_ms must be positive");
  }
  if (overlap < 0.0 || overlap >= 1.0) {
    throw ConfigError("em_fit_windowed: overlap must be in [0, 1)");
  }
  const int frames = noise.frames();
  const int bins = noise.bins();
  const int d = noise.channels();
  int win_frames = static_cast<int>(window_ms / cfg.shift_ms);
  win_frames = std::min(win_frames, frames);
  if (win_frames < components * d) {
    throw ConfigError("em_fit_windowed: window shorter than components*dim frames");
  }
  int hop = std::max(1, static_cast<int>(std::lround(win_frames * (1.0 - overlap))));

  // Window starts; the final window is clamped so it keeps full length.
  std::vector<int> starts;
  for (int s = 0;; s += hop) {
    if (s + win_frames >= frames) {
      starts.push_back(std::max(0, frames - win_frames));
      break;
    }
    starts.push_back(s);
  }

  NoiseModel model;
  model.num_bins = bins;
  model.num_channels = d;
  model.sample_rate = cfg.sample_rate;
  model.fft_size = cfg.fft_size();
  model.shift_samples = cfg.shift_samples();
  model.windows.resize(starts.size());
  for (std::size_t w = 0; w < starts.size(); ++w) {
    model.windows[w].first_frame = starts[w];
    model.windows[w].last_frame = starts[w] + win_frames - 1;
    model.windows[w].center_frame = starts[w] + win_frames / 2;
    model.windows[w].bins.resize(bins);
  }

  const int num_windows = static_cast<int>(starts.size());
  parallel_for(0, num_windows * bins, [&](int slot) {
    const int w = slot / bins;
    const int k = slot % bins;
    std::vector<Eigen::VectorXcd> data;
    data.reserve(win_frames);
    for (int i = model.windows[w].first_frame;
         i <= model.windows[w].last_frame; ++i) {
      data.emplace_back(noise.channel_vector(k, i));
    }
    EmOptions slot_opts = opts;
    slot_opts.seed = mix_seed(opts.seed, static_cast<std::uint64_t>(w),
                              static_cast<std::uint64_t>(k));
    model.windows[w].bins[k] = em_fit(data, components, slot_opts).mixture;
  });
  return model;
}

NoiseModel em_fit_full(const Spectrogram& noise, const StftConfig& cfg,
                       int components, const EmOptions& opts) {
  const double full_ms = noise.frames() * cfg.shift_ms + cfg.window_ms;
  return em_fit_windowed(noise, cfg, full_ms, 0.0, components, opts);
}

namespace {

json mixture_to_json(const GaussianMixture& mix) {
  json bin;
  bin["weights"] = mix.weights;
  json covs = json::array();
  for (const auto& cov : mix.covariances) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < cov.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < cov.cols(); ++j) {
        row.push_back({cov(i, j).real(), cov(i, j).imag()});
      }
      rows.push_back(std::move(row));
    }
    covs.push_back(std::move(rows));
  }
  bin["covariances"] = std::move(covs);
  return bin;
}

GaussianMixture mixture_from_json(const json& bin) {
  GaussianMixture mix;
  mix.weights = bin.at("weights").get<std::vector<double>>();
  for (const auto& rows : bin.at("covariances")) {
    const auto d = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXcd cov(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const auto& row = rows.at(i);
      if (static_cast<Eigen::Index>(row.size()) != d) {
        throw ConfigError("noise model JSON: covariance is not square");
      }
      for (Eigen::Index j = 0; j < d; ++j) {
        cov(i, j) = std::complex<double>(row.at(j).at(0).get<double>(),
                                         row.at(j).at(1).get<double>());
      }
    }
    mix.covariances.push_back(std::move(cov));
  }
  mix.validate();
  return mix;
}

json window_bins_to_json(const NoiseModel::Window& window) {
  json bins = json::array();
  for (const auto& mix : window.bins) bins.push_back(mixture_to_json(mix));
  return bins;
}

}  // namespace

std::string to_json_string(const NoiseModel& model, int indent) {
  model.validate();
  json doc;
  doc["schema_version"] = 1;
  doc["kind"] = "gaussian_mixture_noise_model";
  doc["sample_rate"] = model.sample_rate;
  doc["fft_size"] = model.fft_size;
  doc["shift_samples"] = model.shift_samples;
  doc["channels"] = model.num_channels;
  doc["num_bins"] = model.num_bins;
  if (model.windows.size() == 1) {
    doc["bins"] = window_bins_to_json(model.windows[0]);
    doc["first_frame"] = model.windows[0].first_frame;
    doc["last_frame"] = model.windows[0].last_frame;
  } else {
    json windows = json::array();
    for (const auto& w : model.windows) {
      json jw;
      jw["first_frame"] = w.first_frame;
      jw["last_frame"] = w.last_frame;
      jw["center_frame"] = w.center_frame;
      jw["bins"] = window_bins_to_json(w);
      windows.push_back(std::move(jw));
    }
    doc["windows"] = std::move(windows);
  }
  return doc.dump(indent);
}

NoiseModel noise_model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("noise model JSON: ") + e.what());
  }
  try {
    if (doc.at("schema_version").get<int>() != 1) {
      throw ConfigError("noise model JSON: unsupported schema_version");
    }
    NoiseModel model;
    model.sample_rate = doc.at("sample_rate").get<double>();
    model.fft_size = doc.at("fft_size").get<int>();
    model.shift_samples = doc.at("shift_samples").get<int>();
    model.num_channels = doc.at("channels").get<int>();
    model.num_bins = doc.at("num_bins").get<int>();
    auto read_window = [](const json& jw, NoiseModel::Window& w) {
      w.first_frame = jw.value("first_frame", 0);
      w.last_frame = jw.value("last_frame", 0);
      w.center_frame =
          jw.value("center_frame", (w.first_frame + w.last_frame) / 2);
      for (const auto& bin : jw.at("bins")) {
        w.bins.push_back(mixture_from_json(bin));
      }
    };
    if (doc.contains("bins")) {
      NoiseModel::Window w;
      read_window(doc, w);
      w.center_frame = (w.first_frame + w.last_frame) / 2;
      model.windows.push_back(std::move(w));
    } else {
      for (const auto& jw : doc.at("windows")) {
        NoiseModel::Window w;
        read_window(jw, w);
        model.windows.push_back(std::move(w));
      }
    }
    model.validate();
    return model;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("noise model JSON: ") + e.what());
  }
}

}  // namespace nsf
