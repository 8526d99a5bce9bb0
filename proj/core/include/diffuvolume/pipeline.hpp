#pragma once

#include <optional>
#include <vector>

#include "diffuvolume/datagen.hpp"
#include "diffuvolume/matcher.hpp"
#include "diffuvolume/metrics.hpp"
#include "diffuvolume/sampler.hpp"

namespace diffuvolume {

/// Mask that drops a `margin`-pixel frame around the image.
std::vector<std::uint8_t> interior_mask(int width, int height, int margin);

/// Prediction with the base volume filtered by the unit-state two-hot ground
/// truth (no time embedding). `gt` is at full resolution.
Prediction ground_truth_filtered_predict(const CostVolume& base, const DisparityMap& gt,
                                         const MatcherConfig& config);

struct SceneResult {
  /// Full-resolution maps.
  DisparityMap baseline;
  DisparityMap diffuvolume;
  /// Reverse-process trace at matcher resolution.
  SamplerOutput sampler;
  std::optional<MetricReport> baseline_report;
  std::optional<MetricReport> diffuvolume_report;
};

/// Base volume, unfiltered baseline, reverse process and (with `gt`) metrics
/// over the ground-truth mask.
SceneResult run_scene(const ImagePair& pair, const std::optional<DisparityMap>& gt,
                      const MatcherConfig& matcher, const SamplerConfig& sampler);

/// run_scene over generated scenes on up to `threads` workers; results keep
/// scene order. `threads` <= 0 uses the hardware concurrency.
std::vector<SceneResult> run_suite(const std::vector<SceneSpec>& scenes,
                                   const MatcherConfig& matcher, const SamplerConfig& sampler,
                                   int threads = 0);

}  // namespace diffuvolume
