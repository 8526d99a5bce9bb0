#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace diffuvolume {

/// Dense H x W disparity field in pixels with a per-pixel validity mask.
///
/// A masked-out pixel carries no ground truth (sparse benchmarks) and is
/// skipped by discretization and by every metric.
struct DisparityMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> mask;

  DisparityMap() = default;
  DisparityMap(int w, int h, double fill = 0.0);

  std::size_t size() const { return values.size(); }
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width + x;
  }
  double& at(int x, int y) { return values[index(x, y)]; }
  double at(int x, int y) const { return values[index(x, y)]; }
  bool valid(int x, int y) const { return mask[index(x, y)] != 0; }
};

/// D x H x W weight volume. Column (x, y) holds one weight per disparity level.
///
/// The same storage carries the filter in three states: probability (columns
/// on the simplex), unit ([0,1] nominal) and signed ([-1,1] nominal). The
/// state is a caller convention, not tracked by the type.
struct ProbabilityVolume {
  int levels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> values;

  ProbabilityVolume() = default;
  ProbabilityVolume(int d, int h, int w, double fill = 0.0);

  std::size_t size() const { return values.size(); }
  std::size_t plane() const { return static_cast<std::size_t>(height) * width; }
  std::size_t index(int k, int x, int y) const {
    return (static_cast<std::size_t>(k) * height + y) * width + x;
  }
  double& at(int k, int x, int y) { return values[index(k, x, y)]; }
  double at(int k, int x, int y) const { return values[index(k, x, y)]; }

  std::vector<double> column(int x, int y) const;
  bool same_shape(const ProbabilityVolume& other) const {
    return levels == other.levels && height == other.height && width == other.width;
  }
};

/// C x D x H x W matching volume (similarity convention: larger is better).
struct CostVolume {
  int channels = 0;
  int levels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> values;

  CostVolume() = default;
  CostVolume(int c, int d, int h, int w, double fill = 0.0);

  std::size_t size() const { return values.size(); }
  std::size_t index(int c, int k, int x, int y) const {
    return ((static_cast<std::size_t>(c) * levels + k) * height + y) * width + x;
  }
  double& at(int c, int k, int x, int y) { return values[index(c, k, x, y)]; }
  double at(int c, int k, int x, int y) const { return values[index(c, k, x, y)]; }
};

/// Two-hot encoding: weight 1 - frac(d) at floor(d) and frac(d) at floor(d)+1.
/// Masked-out pixels receive a uniform column. Throws std::out_of_range naming
/// the pixel when a valid value lies outside [0, levels-1].
ProbabilityVolume discretize_two_hot(const DisparityMap& disparity, int levels);

/// Per-pixel expectation sum_k k * P(k). Columns must sum to 1 within 1e-4.
DisparityMap soft_argmin(const ProbabilityVolume& probabilities);

/// x -> 2x - 1, no clamping.
ProbabilityVolume rescale_signed(const ProbabilityVolume& unit);
/// x -> (x + 1) / 2, no clamping.
ProbabilityVolume rescale_unit(const ProbabilityVolume& signed_volume);

/// Per-pixel Shannon entropy in nats, with 0 log 0 = 0. Row-major H x W.
std::vector<double> entropy_map(const ProbabilityVolume& probabilities);

/// Entropy of a single weight column (nats). Throws on negative entries.
double column_entropy(std::span<const double> column);

/// Turns an arbitrary filter (unit state) into per-column distributions by
/// clamping negatives to zero and normalizing. All-zero columns become uniform.
ProbabilityVolume to_distribution(const ProbabilityVolume& unit);

/// C_flt(c,k,x,y) = C_base(c,k,x,y) * (filter(k,x,y) + embedding(k)).
CostVolume filter_volume(const CostVolume& base, const ProbabilityVolume& filter,
                         std::span<const double> embedding);

/// Nearest sampling at stride `factor` with values divided by `factor`.
/// Output is ceil(H/f) x ceil(W/f); the mask is sampled alongside.
DisparityMap downsample_disparity(const DisparityMap& disparity, int factor);

/// Inverse of downsample_disparity for predictions: nearest upsampling to
/// (width, height) with values multiplied by `factor`.
DisparityMap upsample_disparity(const DisparityMap& disparity, int factor, int width,
                                int height);

}  // namespace diffuvolume
