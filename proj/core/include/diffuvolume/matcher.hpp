#pragma once

#include "diffuvolume/image.hpp"
#include "diffuvolume/volume.hpp"

namespace diffuvolume {

struct MatcherConfig {
  int max_disparity = 64;
  int downsample = 1;
  int census_radius = 3;
  // (2r+1)^2 = 49 feature channels at r = 3, so 7 groups of 7.
  int groups = 7;
  int aggregation_radius = 2;
  double temperature = 0.005;
  // Weight of the concatenation-volume term fused into the base volume.
  double concat_weight = 0.0;
  // Scale each descriptor to unit mean square so the full-channel correlation
  // is a normalized cross-correlation in [-1, 1].
  bool normalize_features = true;

  int levels() const { return max_disparity / downsample; }
  int feature_channels() const { return (2 * census_radius + 1) * (2 * census_radius + 1); }
  /// Throws std::invalid_argument when the configuration is inconsistent.
  void validate() const;
};

/// N_c x H x W feature stack.
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> values;

  FeatureMap() = default;
  FeatureMap(int c, int h, int w);

  std::size_t index(int c, int x, int y) const {
    return (static_cast<std::size_t>(c) * height + y) * width + x;
  }
  double& at(int c, int x, int y) { return values[index(c, x, y)]; }
  double at(int c, int x, int y) const { return values[index(c, x, y)]; }
};

/// Patch descriptors: channel (dy, dx) holds I(y+dy, x+dx) minus the window
/// mean, for |dx|, |dy| <= radius, with edge replication at the borders.
/// With `normalize` each descriptor is divided by its root mean square
/// (flat windows stay zero).
FeatureMap extract_features(const Image& image, int radius, bool normalize = false);

/// Concatenation volume: channels [0, N_c) hold F_l(x), channels [N_c, 2N_c)
/// hold F_r(x - d), zero where x - d < 0.
CostVolume build_concat_volume(const FeatureMap& left, const FeatureMap& right, int levels);

/// Group-wise correlation: C(g,d,x,y) = (N_g/N_c) <F_l^g(x,y), F_r^g(x-d,y)>,
/// zero where x - d < 0.
CostVolume build_group_corr_volume(const FeatureMap& left, const FeatureMap& right, int levels,
                                   int groups);

/// Adds `weight` times a per-group similarity read from the concatenation
/// volume, -(N_g/N_c) * 0.5 * ||F_l^g - F_r^g||^2, to each correlation channel.
CostVolume fuse_volumes(const CostVolume& correlation, const CostVolume& concat, double weight);

/// Box-average pooling by `factor` (ceil output size, edge-clamped).
Image downsample_image(const Image& image, int factor);

/// Features, group correlation and optional concat fusion at the configured
/// resolution. Produces the unfiltered base volume.
CostVolume build_base_volume(const ImagePair& pair, const MatcherConfig& config);

/// Channel mean, (2r+1)^2 box filter per level (window clipped at borders),
/// then per-pixel softmax over levels at the configured temperature.
ProbabilityVolume aggregate(const CostVolume& volume, const MatcherConfig& config);

struct Prediction {
  ProbabilityVolume probabilities;
  DisparityMap disparity;
};

/// aggregate followed by soft_argmin.
Prediction base_predict(const CostVolume& volume, const MatcherConfig& config);

/// Contract for the matcher driven by the reverse process: anything that turns
/// a (filtered) cost volume into a probability volume and a disparity map.
class VolumeMatcher {
 public:
  virtual ~VolumeMatcher() = default;
  virtual Prediction predict(const CostVolume& volume) const = 0;
};

class ClassicalMatcher final : public VolumeMatcher {
 public:
  explicit ClassicalMatcher(MatcherConfig config);
  Prediction predict(const CostVolume& volume) const override;
  const MatcherConfig& config() const { return config_; }

 private:
  MatcherConfig config_;
};

}  // namespace diffuvolume
