#include "diffuvolume/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace diffuvolume {
namespace {

void require_same_size(std::span<const double> a, std::span<const double> b, const char* op) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(op) + ": operand sizes differ");
  }
}

void require_noisy_step(const NoiseSchedule& s, int t, const char* op) {
  if (t < 1 || t > s.steps()) {
    throw std::out_of_range(std::string(op) + ": timestep " + std::to_string(t) +
                            " outside [1, " + std::to_string(s.steps()) + "]");
  }
}

}  // namespace

NoiseSchedule NoiseSchedule::from_betas(std::vector<double> betas) {
  if (betas.empty()) throw std::invalid_argument("NoiseSchedule: need at least one step");
  NoiseSchedule s;
  s.alpha_bars_.reserve(betas.size() + 1);
  s.alpha_bars_.push_back(1.0);
  for (double b : betas) {
    if (!(b > 0.0 && b < 1.0)) throw std::invalid_argument("NoiseSchedule: beta outside (0, 1)");
    s.alpha_bars_.push_back(s.alpha_bars_.back() * (1.0 - b));
  }
  s.betas_ = std::move(betas);
  return s;
}

double NoiseSchedule::beta(int t) const {
  if (t < 1 || t > steps()) throw std::out_of_range("NoiseSchedule::beta: t outside [1, T]");
  return betas_[t - 1];
}

double NoiseSchedule::alpha(int t) const { return 1.0 - beta(t); }

double NoiseSchedule::alpha_bar(int t) const {
  if (t < 0 || t > steps()) throw std::out_of_range("NoiseSchedule::alpha_bar: t outside [0, T]");
  return alpha_bars_[t];
}

NoiseSchedule cosine_schedule(int steps, double offset, double max_beta) {
  if (steps <= 0) throw std::invalid_argument("cosine_schedule: T must be positive");
  auto f = [&](int t) {
    const double c = std::cos((static_cast<double>(t) / steps + offset) / (1.0 + offset) *
                              std::numbers::pi / 2.0);
    return c * c;
  };
  const double f0 = f(0);
  std::vector<double> betas(steps);
  double prev = 1.0;
  for (int t = 1; t <= steps; ++t) {
    const double ab = f(t) / f0;
    betas[t - 1] = std::min(1.0 - ab / prev, max_beta);
    prev = ab;
  }
  return NoiseSchedule::from_betas(std::move(betas));
}

std::vector<double> q_sample(const NoiseSchedule& schedule, std::span<const double> x0, int t,
                             std::span<const double> noise) {
  require_same_size(x0, noise, "q_sample");
  require_noisy_step(schedule, t, "q_sample");
  const double ab = schedule.alpha_bar(t);
  const double a = std::sqrt(ab);
  const double b = std::sqrt(1.0 - ab);
  std::vector<double> out(x0.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x0[i] + b * noise[i];
  return out;
}

std::vector<double> recover_noise(const NoiseSchedule& schedule, std::span<const double> xt,
                                  std::span<const double> x0, int t) {
  require_same_size(xt, x0, "recover_noise");
  require_noisy_step(schedule, t, "recover_noise");
  const double ab = schedule.alpha_bar(t);
  const double a = std::sqrt(ab);
  const double inv_b = 1.0 / std::sqrt(1.0 - ab);
  std::vector<double> out(xt.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (xt[i] - a * x0[i]) * inv_b;
  return out;
}

std::vector<double> predict_x0(const NoiseSchedule& schedule, std::span<const double> xt,
                               std::span<const double> noise, int t) {
  require_same_size(xt, noise, "predict_x0");
  require_noisy_step(schedule, t, "predict_x0");
  const double ab = schedule.alpha_bar(t);
  const double inv_a = 1.0 / std::sqrt(ab);
  const double b = std::sqrt(1.0 - ab);
  std::vector<double> out(xt.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (xt[i] - b * noise[i]) * inv_a;
  return out;
}

}  // namespace diffuvolume
