#include "diffuvolume/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace diffuvolume {
namespace {

constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kDdimStream = 1000;
constexpr std::uint64_t kRenewalStream = 2000;

void require_same_size(std::span<const double> a, std::span<const double> b, const char* op) {
  if (a.size() != b.size()) throw std::invalid_argument(std::string(op) + ": operand sizes differ");
}

void require_same_map(const DisparityMap& a, const DisparityMap& b, const char* op) {
  if (a.width != b.width || a.height != b.height) {
    throw std::invalid_argument(std::string(op) + ": disparity maps differ in shape");
  }
}

DisparityMap clamp_to_levels(DisparityMap d, int levels) {
  for (double& v : d.values) v = std::clamp(v, 0.0, static_cast<double>(levels - 1));
  std::fill(d.mask.begin(), d.mask.end(), std::uint8_t{1});
  return d;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

EmbeddingMode parse_embedding_mode(const std::string& name) {
  if (name == "zero") return EmbeddingMode::kZero;
  if (name == "sinusoidal") return EmbeddingMode::kSinusoidal;
  throw std::invalid_argument("unknown time-embedding mode '" + name + "'");
}

std::string to_string(EmbeddingMode mode) {
  return mode == EmbeddingMode::kZero ? "zero" : "sinusoidal";
}

double RenewalPolicy::uncertainty_for(int levels) const {
  return uncertainty_threshold.value_or(0.5 * std::log(static_cast<double>(levels)));
}

void RenewalPolicy::validate() const {
  if (!(disparity_threshold >= 0.0)) throw std::invalid_argument("renewal: disparity threshold must be >= 0");
  if (uncertainty_threshold && !(*uncertainty_threshold >= 0.0)) {
    throw std::invalid_argument("renewal: uncertainty threshold must be >= 0");
  }
}

std::vector<double> SamplerConfig::resolved_weights() const {
  return weights.empty() ? default_integration_weights(steps) : weights;
}

void SamplerConfig::validate() const {
  if (timesteps < 1) throw std::invalid_argument("sampler: timesteps must be >= 1");
  if (steps < 1 || steps > timesteps) {
    throw std::invalid_argument("sampler: step count must lie in [1, timesteps]");
  }
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("sampler: eta must lie in [0, 1]");
  const auto w = resolved_weights();
  if (w.size() != static_cast<std::size_t>(steps) + 1) {
    throw std::invalid_argument("sampler: expected " + std::to_string(steps + 1) +
                                " integration weights, got " + std::to_string(w.size()));
  }
  double sum = 0.0;
  for (double v : w) {
    if (!(v >= 0.0)) throw std::invalid_argument("sampler: integration weights must be non-negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("sampler: integration weights must sum to 1");
  renewal.validate();
}

std::vector<int> timestep_grid(int timesteps, int steps) {
  if (steps < 1 || steps > timesteps) {
    throw std::invalid_argument("timestep_grid: need 1 <= steps <= timesteps");
  }
  std::vector<int> grid(steps);
  for (int i = 0; i < steps; ++i) {
    grid[i] = static_cast<int>(std::lround(static_cast<double>(timesteps) * (steps - i) / steps));
  }
  return grid;
}

std::vector<double> default_integration_weights(int steps) {
  if (steps < 1) throw std::invalid_argument("default_integration_weights: steps must be >= 1");
  std::vector<double> w(steps + 1, 0.0);
  w[steps] = 0.5;
  if (steps == 1) {
    w[0] = 0.5;
  } else {
    w[steps - 2] = 0.2;
    w[steps - 1] = 0.3;
  }
  return w;
}

double ddim_sigma(const NoiseSchedule& schedule, int t, int t_prev, double eta) {
  if (!(t > t_prev && t_prev >= 0 && t <= schedule.steps())) {
    throw std::out_of_range("ddim_sigma: need T >= t > t_prev >= 0");
  }
  const double ab_t = schedule.alpha_bar(t);
  const double ab_prev = schedule.alpha_bar(t_prev);
  return eta * std::sqrt((1.0 - ab_t / ab_prev) * (1.0 - ab_prev) / (1.0 - ab_t));
}

std::vector<double> ddim_step(const NoiseSchedule& schedule, std::span<const double> xt,
                              std::span<const double> x0c, std::span<const double> noise, int t,
                              int t_prev, double eta, const NoiseStream& fresh) {
  require_same_size(xt, x0c, "ddim_step");
  require_same_size(xt, noise, "ddim_step");
  const double sigma = ddim_sigma(schedule, t, t_prev, eta);
  const double ab_prev = schedule.alpha_bar(t_prev);
  const double radicand = 1.0 - ab_prev - sigma * sigma;
  if (radicand < -1e-12) {
    throw std::invalid_argument("ddim_step: sigma^2 exceeds 1 - alpha_bar(t_prev); reduce eta");
  }
  const double a = std::sqrt(ab_prev);
  const double b = std::sqrt(std::max(radicand, 0.0));
  std::vector<double> out(xt.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = a * x0c[i] + b * noise[i];
    if (sigma > 0.0) out[i] += sigma * fresh.gaussian(i);
  }
  return out;
}

std::vector<double> ddpm_mean(const NoiseSchedule& schedule, std::span<const double> xt,
                              std::span<const double> x0c, int t) {
  require_same_size(xt, x0c, "ddpm_mean");
  if (t < 1 || t > schedule.steps()) throw std::out_of_range("ddpm_step: t must lie in [1, T]");
  const double ab_t = schedule.alpha_bar(t);
  const double ab_prev = schedule.alpha_bar(t - 1);
  const double cx = std::sqrt(schedule.alpha(t)) * (1.0 - ab_prev) / (1.0 - ab_t);
  const double c0 = std::sqrt(ab_prev) * schedule.beta(t) / (1.0 - ab_t);
  std::vector<double> out(xt.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = cx * xt[i] + c0 * x0c[i];
  return out;
}

double ddpm_sigma(const NoiseSchedule& schedule, int t) {
  if (t < 1 || t > schedule.steps()) throw std::out_of_range("ddpm_step: t must lie in [1, T]");
  return std::sqrt(schedule.beta(t) * (1.0 - schedule.alpha_bar(t - 1)) /
                   (1.0 - schedule.alpha_bar(t)));
}

std::vector<double> ddpm_step(const NoiseSchedule& schedule, std::span<const double> xt,
                              std::span<const double> x0c, int t, const NoiseStream& fresh,
                              bool stochastic) {
  auto out = ddpm_mean(schedule, xt, x0c, t);
  if (stochastic) {
    const double sigma = ddpm_sigma(schedule, t);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += sigma * fresh.gaussian(i);
  }
  return out;
}

std::vector<std::uint8_t> select_outliers(const DisparityMap& prediction,
                                          const DisparityMap& baseline,
                                          const ProbabilityVolume& probabilities,
                                          const RenewalPolicy& policy) {
  require_same_map(prediction, baseline, "select_outliers");
  if (probabilities.width != prediction.width || probabilities.height != prediction.height) {
    throw std::invalid_argument("select_outliers: probability volume shape mismatch");
  }
  const auto entropy = entropy_map(probabilities);
  const double bound = policy.uncertainty_for(probabilities.levels);
  std::vector<std::uint8_t> mask(prediction.size(), 0);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const bool far = std::abs(prediction.values[i] - baseline.values[i]) > policy.disparity_threshold;
    mask[i] = (far || entropy[i] > bound) ? 1 : 0;
  }
  return mask;
}

RenewalResult volume_renewal(const ProbabilityVolume& filter, const DisparityMap& prediction,
                             const DisparityMap& baseline, const ProbabilityVolume& probabilities,
                             const RenewalPolicy& policy, const NoiseStream& fresh) {
  RenewalResult result{filter, std::vector<std::uint8_t>(filter.plane(), 0), 0};
  if (!policy.enabled) return result;
  if (filter.width != prediction.width || filter.height != prediction.height) {
    throw std::invalid_argument("volume_renewal: filter shape mismatch");
  }
  result.outliers = select_outliers(prediction, baseline, probabilities, policy);
  std::vector<double> column(filter.levels);
  for (int y = 0; y < filter.height; ++y) {
    for (int x = 0; x < filter.width; ++x) {
      if (!result.outliers[prediction.index(x, y)]) continue;
      ++result.count;
      for (int k = 0; k < filter.levels; ++k) column[k] = fresh.gaussian(filter.index(k, x, y));
      const auto [lo, hi] = std::minmax_element(column.begin(), column.end());
      const double range = *hi - *lo;
      for (int k = 0; k < filter.levels; ++k) {
        const double unit = range > 0.0 ? (column[k] - *lo) / range : 0.5;
        result.volume.at(k, x, y) = 2.0 * unit - 1.0;
      }
    }
  }
  return result;
}

DisparityMap dense_integration(std::span<const DisparityMap> predictions,
                               const DisparityMap& baseline, std::span<const double> weights) {
  if (weights.size() != predictions.size() + 1) {
    throw std::invalid_argument("dense_integration: need one weight per prediction plus the baseline");
  }
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("dense_integration: weights must be non-negative");
  }
  for (const auto& p : predictions) require_same_map(p, baseline, "dense_integration");
  DisparityMap out = baseline;
  const double wb = weights.back();
  for (std::size_t i = 0; i < out.size(); ++i) {
    double v = wb * baseline.values[i];
    for (std::size_t s = 0; s < predictions.size(); ++s) v += weights[s] * predictions[s].values[i];
    out.values[i] = v;
  }
  return out;
}

std::vector<double> time_embedding(int t, int levels, EmbeddingMode mode) {
  if (levels < 2) throw std::invalid_argument("time_embedding: need at least 2 levels");
  std::vector<double> out(levels, 0.0);
  if (mode == EmbeddingMode::kZero) return out;
  for (int i = 0; i < levels; ++i) {
    const int pair = i / 2;
    const double freq = std::pow(10000.0, -2.0 * pair / levels);
    const double angle = t * freq;
    out[i] = 0.1 * (i % 2 == 0 ? std::sin(angle) : std::cos(angle));
  }
  return out;
}

std::vector<double> filter_entropy(const ProbabilityVolume& signed_filter) {
  return entropy_map(to_distribution(rescale_unit(signed_filter)));
}

SamplerOutput run_reverse(const CostVolume& base, const VolumeMatcher& matcher,
                          const DisparityMap& baseline, const SamplerConfig& config) {
  config.validate();
  if (baseline.width != base.width || baseline.height != base.height) {
    throw std::invalid_argument("run_reverse: baseline shape does not match the base volume");
  }
  const int levels = base.levels;
  const NoiseSchedule schedule = cosine_schedule(config.timesteps);
  const NoiseStream root(config.seed, 0);

  SamplerOutput out;
  out.timesteps = timestep_grid(config.timesteps, config.steps);

  ProbabilityVolume filter(levels, base.height, base.width);
  root.derive(kInitStream).fill_gaussian(filter.values);

  for (int i = 0; i < config.steps; ++i) {
    const int t = out.timesteps[i];
    const int t_prev = i + 1 < config.steps ? out.timesteps[i + 1] : 0;

    out.mean_entropy.push_back(mean_of(filter_entropy(filter)));
    if (config.keep_snapshots) out.snapshots.push_back(filter);

    const auto embedding = time_embedding(t, levels, config.embedding);
    const CostVolume filtered = filter_volume(base, rescale_unit(filter), embedding);
    Prediction pred = matcher.predict(filtered);

    const ProbabilityVolume coarse =
        rescale_signed(discretize_two_hot(clamp_to_levels(pred.disparity, levels), levels));
    const auto noise = recover_noise(schedule, filter.values, coarse.values, t);
    filter.values = ddim_step(schedule, filter.values, coarse.values, noise, t, t_prev, config.eta,
                              root.derive(kDdimStream + i));

    RenewalResult renewed = volume_renewal(filter, pred.disparity, baseline, pred.probabilities,
                                           config.renewal, root.derive(kRenewalStream + i));
    if (config.renewal.enabled) {
      out.outlier_counts.push_back(renewed.count);
      filter = std::move(renewed.volume);
    } else {
      const auto mask = select_outliers(pred.disparity, baseline, pred.probabilities, config.renewal);
      out.outlier_counts.push_back(static_cast<int>(std::count(mask.begin(), mask.end(), 1)));
    }
    out.predictions.push_back(std::move(pred.disparity));
  }

  const auto weights = config.resolved_weights();
  out.final_disparity = dense_integration(out.predictions, baseline, weights);
  return out;
}

}  // namespace diffuvolume
