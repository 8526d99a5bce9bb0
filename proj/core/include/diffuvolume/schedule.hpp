#pragma once

#include <span>
#include <vector>

namespace diffuvolume {

/// Noise coefficients for a discrete diffusion chain.
///
/// Index convention: t = 1..T carry noise, t = 0 is the clean state with
/// alpha_bar(0) = 1. `beta(t)` and `alpha(t)` are defined for t >= 1 only.
/// Immutable after construction.
class NoiseSchedule {
 public:
  /// Builds the chain from explicit betas (beta_1 .. beta_T), each in (0, 1).
  static NoiseSchedule from_betas(std::vector<double> betas);

  int steps() const { return static_cast<int>(betas_.size()); }
  double beta(int t) const;
  double alpha(int t) const;
  double alpha_bar(int t) const;

  std::span<const double> betas() const { return betas_; }
  std::span<const double> alpha_bars() const { return alpha_bars_; }

 private:
  NoiseSchedule() = default;

  std::vector<double> betas_;
  std::vector<double> alpha_bars_;  // T + 1 entries
};

/// Cosine schedule: alpha_bar(t) = f(t)/f(0), f(t) = cos^2(((t/T + s)/(1 + s)) pi/2),
/// with s = 0.008 and betas clipped to 0.999. Cumulative products of the clipped
/// alphas define the stored alpha_bar.
NoiseSchedule cosine_schedule(int steps, double offset = 0.008, double max_beta = 0.999);

/// x_t = sqrt(ab_t) x0 + sqrt(1 - ab_t) eps, for 1 <= t <= T.
std::vector<double> q_sample(const NoiseSchedule& schedule, std::span<const double> x0, int t,
                             std::span<const double> noise);

/// eps = (x_t - sqrt(ab_t) x0) / sqrt(1 - ab_t). Rejects t = 0.
std::vector<double> recover_noise(const NoiseSchedule& schedule, std::span<const double> xt,
                                  std::span<const double> x0, int t);

/// x0 = (x_t - sqrt(1 - ab_t) eps) / sqrt(ab_t).
std::vector<double> predict_x0(const NoiseSchedule& schedule, std::span<const double> xt,
                               std::span<const double> noise, int t);

}  // namespace diffuvolume
