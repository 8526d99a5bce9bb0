#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "diffuvolume/matcher.hpp"
#include "diffuvolume/random.hpp"
#include "diffuvolume/schedule.hpp"
#include "diffuvolume/volume.hpp"

namespace diffuvolume {

enum class EmbeddingMode { kZero, kSinusoidal };

EmbeddingMode parse_embedding_mode(const std::string& name);
std::string to_string(EmbeddingMode mode);

struct RenewalPolicy {
  bool enabled = true;
  /// A pixel whose step prediction differs from the baseline by more than this
  /// many pixels is an outlier.
  double disparity_threshold = 1.0;
  /// Column-entropy bound (nats) on the step's probability volume. Unset means
  /// ln(D) / 2 for a D-level volume.
  std::optional<double> uncertainty_threshold;

  double uncertainty_for(int levels) const;
  void validate() const;
};

struct SamplerConfig {
  int timesteps = 1000;
  int steps = 5;
  double eta = 0.0;
  /// w_1..w_S followed by the baseline weight. Empty selects
  /// default_integration_weights(steps).
  std::vector<double> weights;
  RenewalPolicy renewal;
  std::uint64_t seed = 7;
  EmbeddingMode embedding = EmbeddingMode::kZero;
  bool keep_snapshots = false;

  std::vector<double> resolved_weights() const;
  void validate() const;
};

/// Strictly decreasing grid T = t_1 > t_2 > ... > t_S >= 1, evenly spaced
/// (1000, 800, 600, 400, 200 for T = 1000, S = 5).
std::vector<int> timestep_grid(int timesteps, int steps);

/// Baseline keeps 0.5; the last two step predictions share the rest as 0.2 / 0.3
/// (a single step takes the whole 0.5). For S = 5 this is 0-0-0-0.2-0.3-0.5.
std::vector<double> default_integration_weights(int steps);

/// sigma = eta * sqrt((1 - ab_t / ab_prev) * (1 - ab_prev) / (1 - ab_t)).
double ddim_sigma(const NoiseSchedule& schedule, int t, int t_prev, double eta);

/// x_prev = sqrt(ab_prev) x0c + sqrt(1 - ab_prev - sigma^2) eps + sigma eps*.
/// `fresh` supplies eps* element-wise and is not touched when sigma = 0.
std::vector<double> ddim_step(const NoiseSchedule& schedule, std::span<const double> xt,
                              std::span<const double> x0c, std::span<const double> noise, int t,
                              int t_prev, double eta, const NoiseStream& fresh);

/// Posterior mean of q(x_{t-1} | x_t, x0c).
std::vector<double> ddpm_mean(const NoiseSchedule& schedule, std::span<const double> xt,
                              std::span<const double> x0c, int t);
/// sigma_t = sqrt(beta_t (1 - ab_{t-1}) / (1 - ab_t)).
double ddpm_sigma(const NoiseSchedule& schedule, int t);
/// ddpm_mean + sigma_t * eps*. With `stochastic` false the mean is returned.
std::vector<double> ddpm_step(const NoiseSchedule& schedule, std::span<const double> xt,
                              std::span<const double> x0c, int t, const NoiseStream& fresh,
                              bool stochastic = true);

/// Outlier mask: |pred - baseline| > disparity threshold, or the column entropy
/// of `probabilities` exceeds the uncertainty threshold. Ignores `enabled`.
std::vector<std::uint8_t> select_outliers(const DisparityMap& prediction,
                                          const DisparityMap& baseline,
                                          const ProbabilityVolume& probabilities,
                                          const RenewalPolicy& policy);

struct RenewalResult {
  ProbabilityVolume volume;
  std::vector<std::uint8_t> outliers;
  int count = 0;
};

/// Replaces outlier columns of the signed filter with fresh Gaussian draws,
/// min-max rescaled per column to [0, 1] and mapped to the signed range.
/// A disabled policy returns the input untouched with no outliers.
RenewalResult volume_renewal(const ProbabilityVolume& filter, const DisparityMap& prediction,
                             const DisparityMap& baseline, const ProbabilityVolume& probabilities,
                             const RenewalPolicy& policy, const NoiseStream& fresh);

/// Pixel-wise weighted average; the last weight applies to `baseline`.
DisparityMap dense_integration(std::span<const DisparityMap> predictions,
                               const DisparityMap& baseline, std::span<const double> weights);

/// Zero vector, or a sinusoidal position code of t scaled by 0.1 with sin on
/// even and cos on odd entries.
std::vector<double> time_embedding(int t, int levels, EmbeddingMode mode);

struct SamplerOutput {
  std::vector<int> timesteps;
  /// Pred_{t_1} .. Pred_{t_S}, in step order.
  std::vector<DisparityMap> predictions;
  DisparityMap final_disparity;
  /// Pixels selected by the renewal rule after each step (counted even when
  /// renewal is disabled).
  std::vector<int> outlier_counts;
  /// Mean column entropy (nats) of the filter used at each step.
  std::vector<double> mean_entropy;
  /// Signed filter DV_{t_i} used at each step; filled when keep_snapshots.
  std::vector<ProbabilityVolume> snapshots;
};

/// Column entropies of a signed filter, read as distributions via
/// to_distribution(rescale_unit(filter)).
std::vector<double> filter_entropy(const ProbabilityVolume& signed_filter);

/// Iterative volume filtering: Gaussian DV_T, then per step filter the base
/// volume, predict, re-discretize, recover noise, take a DDIM step and renew
/// outlier columns. Dense integration combines the step predictions with
/// `baseline`.
SamplerOutput run_reverse(const CostVolume& base, const VolumeMatcher& matcher,
                          const DisparityMap& baseline, const SamplerConfig& config);

}  // namespace diffuvolume
