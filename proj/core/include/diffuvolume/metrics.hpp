#pragma once

#include <span>
#include <string>
#include <vector>

#include "diffuvolume/volume.hpp"

namespace diffuvolume {

/// Evaluation mask: the ground-truth mask, optionally intersected with an
/// extra mask of the same size. Empty `extra` means none.
std::vector<std::uint8_t> evaluation_mask(const DisparityMap& gt,
                                          std::span<const std::uint8_t> extra = {});

/// Mean |pred - gt| over masked pixels.
double epe(const DisparityMap& pred, const DisparityMap& gt, std::span<const std::uint8_t> mask);

/// Percentage of masked pixels with error strictly greater than `threshold`.
double bad_p(const DisparityMap& pred, const DisparityMap& gt, double threshold,
             std::span<const std::uint8_t> mask);

/// KITTI outlier rate: error > 3 px and > 5% of the ground truth.
double d1(const DisparityMap& pred, const DisparityMap& gt, std::span<const std::uint8_t> mask);

/// sum_i lambda_i * mean |gt - pred_i| over masked pixels.
double weighted_l1_loss(std::span<const DisparityMap> preds, const DisparityMap& gt,
                        std::span<const double> lambdas, std::span<const std::uint8_t> mask);

/// Three-output weighting used when none is given.
inline const std::vector<double> kDefaultLossWeights = {0.5, 0.7, 1.0};

struct MetricReport {
  double epe = 0.0;
  double bad_1 = 0.0;
  double bad_2 = 0.0;
  double bad_3 = 0.0;
  double d1_all = 0.0;
  long long pixels = 0;

  /// One `key=value` per line, fixed key order and 6 decimal places.
  std::string to_key_value() const;
  /// Flat JSON object with the same keys.
  std::string to_json() const;
  static MetricReport from_json(const std::string& text);
};

MetricReport evaluate(const DisparityMap& pred, const DisparityMap& gt,
                      std::span<const std::uint8_t> mask);

}  // namespace diffuvolume
