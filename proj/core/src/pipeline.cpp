#include "diffuvolume/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

namespace diffuvolume {

std::vector<std::uint8_t> interior_mask(int width, int height, int margin) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(width) * height, 0);
  for (int y = margin; y < height - margin; ++y) {
    for (int x = margin; x < width - margin; ++x) mask[static_cast<std::size_t>(y) * width + x] = 1;
  }
  return mask;
}

Prediction ground_truth_filtered_predict(const CostVolume& base, const DisparityMap& gt,
                                         const MatcherConfig& config) {
  const DisparityMap low = downsample_disparity(gt, config.downsample);
  const ProbabilityVolume filter = discretize_two_hot(low, base.levels);
  const std::vector<double> embedding(base.levels, 0.0);
  return base_predict(filter_volume(base, filter, embedding), config);
}

SceneResult run_scene(const ImagePair& pair, const std::optional<DisparityMap>& gt,
                      const MatcherConfig& matcher_config, const SamplerConfig& sampler) {
  const CostVolume base = build_base_volume(pair, matcher_config);
  const ClassicalMatcher matcher(matcher_config);
  const Prediction baseline = matcher.predict(base);

  SceneResult result;
  result.sampler = run_reverse(base, matcher, baseline.disparity, sampler);
  const int f = matcher_config.downsample;
  const int w = pair.left.width;
  const int h = pair.left.height;
  result.baseline = upsample_disparity(baseline.disparity, f, w, h);
  result.diffuvolume = upsample_disparity(result.sampler.final_disparity, f, w, h);
  if (gt) {
    const auto mask = evaluation_mask(*gt);
    result.baseline_report = evaluate(result.baseline, *gt, mask);
    result.diffuvolume_report = evaluate(result.diffuvolume, *gt, mask);
  }
  return result;
}

std::vector<SceneResult> run_suite(const std::vector<SceneSpec>& scenes,
                                   const MatcherConfig& matcher, const SamplerConfig& sampler,
                                   int threads) {
  std::vector<SceneResult> results(scenes.size());
  std::vector<std::exception_ptr> errors(scenes.size());
  const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const int workers = std::clamp(threads > 0 ? threads : hw, 1, std::max<int>(1, scenes.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < scenes.size(); i = next++) {
      try {
        const Stereogram s = gen_stereogram(scenes[i]);
        results[i] = run_scene(s.pair, s.disparity, matcher, sampler);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace diffuvolume
