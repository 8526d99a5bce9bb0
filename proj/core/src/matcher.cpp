#include "diffuvolume/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace diffuvolume {
namespace {

// Mean-square contrast below which a window counts as flat.
constexpr double kFlatWindow = 1e-10;

void require_same_features(const FeatureMap& a, const FeatureMap& b, const char* op) {
  if (a.channels != b.channels || a.height != b.height || a.width != b.width) {
    throw std::invalid_argument(std::string(op) + ": feature maps differ in shape");
  }
}

void require_levels(const FeatureMap& f, int levels, const char* op) {
  if (levels < 1) throw std::invalid_argument(std::string(op) + ": levels must be >= 1");
  if (levels > f.width) {
    throw std::invalid_argument(std::string(op) + ": level count " + std::to_string(levels) +
                                " exceeds image width " + std::to_string(f.width));
  }
}

// Windowed mean of `plane` (H x W) over a (2r+1)^2 window clipped at borders.
void box_filter(std::vector<double>& plane, int width, int height, int radius,
                std::vector<double>& scratch) {
  if (radius <= 0) return;
  const std::size_t stride = static_cast<std::size_t>(width) + 1;
  scratch.assign(stride * (height + 1), 0.0);
  for (int y = 0; y < height; ++y) {
    double row = 0.0;
    for (int x = 0; x < width; ++x) {
      row += plane[static_cast<std::size_t>(y) * width + x];
      scratch[(y + 1) * stride + x + 1] = scratch[y * stride + x + 1] + row;
    }
  }
  for (int y = 0; y < height; ++y) {
    const int y0 = std::max(0, y - radius);
    const int y1 = std::min(height - 1, y + radius);
    for (int x = 0; x < width; ++x) {
      const int x0 = std::max(0, x - radius);
      const int x1 = std::min(width - 1, x + radius);
      const double sum = scratch[(y1 + 1) * stride + x1 + 1] - scratch[y0 * stride + x1 + 1] -
                         scratch[(y1 + 1) * stride + x0] + scratch[y0 * stride + x0];
      plane[static_cast<std::size_t>(y) * width + x] =
          sum / static_cast<double>((y1 - y0 + 1) * (x1 - x0 + 1));
    }
  }
}

}  // namespace

void MatcherConfig::validate() const {
  if (max_disparity < 1) throw std::invalid_argument("matcher: max disparity must be >= 1");
  if (downsample < 1) throw std::invalid_argument("matcher: downsample factor must be >= 1");
  if (max_disparity % downsample != 0) {
    throw std::invalid_argument("matcher: max disparity must be divisible by the downsample factor");
  }
  if (census_radius < 0) throw std::invalid_argument("matcher: census radius must be >= 0");
  if (groups < 1 || feature_channels() % groups != 0) {
    throw std::invalid_argument("matcher: groups (" + std::to_string(groups) +
                                ") must divide the feature channel count (" +
                                std::to_string(feature_channels()) + ")");
  }
  if (aggregation_radius < 0) throw std::invalid_argument("matcher: aggregation radius must be >= 0");
  if (!(temperature > 0.0)) throw std::invalid_argument("matcher: temperature must be positive");
}

FeatureMap::FeatureMap(int c, int h, int w) : channels(c), height(h), width(w) {
  if (c <= 0 || h <= 0 || w <= 0) throw std::invalid_argument("FeatureMap: dimensions must be positive");
  values.assign(static_cast<std::size_t>(c) * h * w, 0.0);
}

FeatureMap extract_features(const Image& image, int radius, bool normalize) {
  if (radius < 0) throw std::invalid_argument("extract_features: radius must be >= 0");
  const int side = 2 * radius + 1;
  if (side > image.width || side > image.height) {
    throw std::invalid_argument("extract_features: window larger than image");
  }
  FeatureMap out(side * side, image.height, image.width);
  std::vector<double> window(static_cast<std::size_t>(side) * side);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      double mean = 0.0;
      int c = 0;
      for (int dy = -radius; dy <= radius; ++dy) {
        const int sy = std::clamp(y + dy, 0, image.height - 1);
        for (int dx = -radius; dx <= radius; ++dx) {
          const int sx = std::clamp(x + dx, 0, image.width - 1);
          window[c] = image.at(sx, sy);
          mean += window[c++];
        }
      }
      mean /= static_cast<double>(window.size());
      double scale = 1.0;
      if (normalize) {
        double ms = 0.0;
        for (double v : window) ms += (v - mean) * (v - mean);
        ms /= static_cast<double>(window.size());
        scale = ms > kFlatWindow ? 1.0 / std::sqrt(ms) : 0.0;
      }
      for (c = 0; c < out.channels; ++c) out.at(c, x, y) = (window[c] - mean) * scale;
    }
  }
  return out;
}

CostVolume build_concat_volume(const FeatureMap& left, const FeatureMap& right, int levels) {
  require_same_features(left, right, "build_concat_volume");
  require_levels(left, levels, "build_concat_volume");
  const int nc = left.channels;
  CostVolume out(2 * nc, levels, left.height, left.width, 0.0);
  for (int c = 0; c < nc; ++c) {
    for (int d = 0; d < levels; ++d) {
      for (int y = 0; y < left.height; ++y) {
        for (int x = 0; x < left.width; ++x) {
          out.at(c, d, x, y) = left.at(c, x, y);
          if (x - d >= 0) out.at(nc + c, d, x, y) = right.at(c, x - d, y);
        }
      }
    }
  }
  return out;
}

CostVolume build_group_corr_volume(const FeatureMap& left, const FeatureMap& right, int levels,
                                   int groups) {
  require_same_features(left, right, "build_group_corr_volume");
  require_levels(left, levels, "build_group_corr_volume");
  if (groups < 1 || left.channels % groups != 0) {
    throw std::invalid_argument("build_group_corr_volume: groups must divide channel count");
  }
  const int per_group = left.channels / groups;
  const double scale = 1.0 / per_group;
  CostVolume out(groups, levels, left.height, left.width, 0.0);
  for (int g = 0; g < groups; ++g) {
    for (int d = 0; d < levels; ++d) {
      for (int y = 0; y < left.height; ++y) {
        for (int x = d; x < left.width; ++x) {
          double dot = 0.0;
          for (int c = g * per_group; c < (g + 1) * per_group; ++c) {
            dot += left.at(c, x, y) * right.at(c, x - d, y);
          }
          out.at(g, d, x, y) = scale * dot;
        }
      }
    }
  }
  return out;
}

CostVolume fuse_volumes(const CostVolume& correlation, const CostVolume& concat, double weight) {
  if (concat.levels != correlation.levels || concat.height != correlation.height ||
      concat.width != correlation.width || concat.channels % 2 != 0) {
    throw std::invalid_argument("fuse_volumes: volume shapes are incompatible");
  }
  const int nc = concat.channels / 2;
  const int groups = correlation.channels;
  if (nc % groups != 0) throw std::invalid_argument("fuse_volumes: groups must divide channel count");
  if (weight == 0.0) return correlation;
  const int per_group = nc / groups;
  CostVolume out = correlation;
  for (int g = 0; g < groups; ++g) {
    for (int d = 0; d < correlation.levels; ++d) {
      for (int y = 0; y < correlation.height; ++y) {
        for (int x = d; x < correlation.width; ++x) {
          double sq = 0.0;
          for (int c = g * per_group; c < (g + 1) * per_group; ++c) {
            const double diff = concat.at(c, d, x, y) - concat.at(nc + c, d, x, y);
            sq += diff * diff;
          }
          out.at(g, d, x, y) -= weight * 0.5 * sq / per_group;
        }
      }
    }
  }
  return out;
}

Image downsample_image(const Image& image, int factor) {
  if (factor <= 0) throw std::invalid_argument("downsample_image: factor must be positive");
  if (factor == 1) return image;
  const int w = (image.width + factor - 1) / factor;
  const int h = (image.height + factor - 1) / factor;
  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sum = 0.0;
      for (int dy = 0; dy < factor; ++dy) {
        for (int dx = 0; dx < factor; ++dx) {
          sum += image.at(std::min(x * factor + dx, image.width - 1),
                          std::min(y * factor + dy, image.height - 1));
        }
      }
      out.at(x, y) = sum / (factor * factor);
    }
  }
  return out;
}

CostVolume build_base_volume(const ImagePair& pair, const MatcherConfig& config) {
  config.validate();
  if (pair.left.width != pair.right.width || pair.left.height != pair.right.height) {
    throw std::invalid_argument("build_base_volume: left and right images differ in size");
  }
  const Image left = downsample_image(pair.left, config.downsample);
  const Image right = downsample_image(pair.right, config.downsample);
  const FeatureMap fl = extract_features(left, config.census_radius, config.normalize_features);
  const FeatureMap fr = extract_features(right, config.census_radius, config.normalize_features);
  CostVolume corr = build_group_corr_volume(fl, fr, config.levels(), config.groups);
  if (config.concat_weight == 0.0) return corr;
  return fuse_volumes(corr, build_concat_volume(fl, fr, config.levels()), config.concat_weight);
}

ProbabilityVolume aggregate(const CostVolume& volume, const MatcherConfig& config) {
  if (!(config.temperature > 0.0)) throw std::invalid_argument("aggregate: temperature must be positive");
  ProbabilityVolume out(volume.levels, volume.height, volume.width, 0.0);
  const std::size_t plane = out.plane();
  const double inv_channels = 1.0 / volume.channels;
  std::vector<double> level_plane(plane);
  std::vector<double> scratch;
  for (int k = 0; k < volume.levels; ++k) {
    std::fill(level_plane.begin(), level_plane.end(), 0.0);
    for (int c = 0; c < volume.channels; ++c) {
      const double* src = volume.values.data() + volume.index(c, k, 0, 0);
      for (std::size_t i = 0; i < plane; ++i) level_plane[i] += src[i];
    }
    for (double& v : level_plane) v *= inv_channels;
    box_filter(level_plane, volume.width, volume.height, config.aggregation_radius, scratch);
    std::copy(level_plane.begin(), level_plane.end(),
              out.values.begin() + static_cast<std::ptrdiff_t>(k * plane));
  }
  const double inv_t = 1.0 / config.temperature;
  for (std::size_t i = 0; i < plane; ++i) {
    double peak = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < volume.levels; ++k) peak = std::max(peak, out.values[k * plane + i]);
    double sum = 0.0;
    for (int k = 0; k < volume.levels; ++k) {
      double& v = out.values[k * plane + i];
      v = std::exp((v - peak) * inv_t);
      sum += v;
    }
    for (int k = 0; k < volume.levels; ++k) out.values[k * plane + i] /= sum;
  }
  return out;
}

Prediction base_predict(const CostVolume& volume, const MatcherConfig& config) {
  Prediction out;
  out.probabilities = aggregate(volume, config);
  out.disparity = soft_argmin(out.probabilities);
  return out;
}

ClassicalMatcher::ClassicalMatcher(MatcherConfig config) : config_(config) { config_.validate(); }

Prediction ClassicalMatcher::predict(const CostVolume& volume) const {
  return base_predict(volume, config_);
}

}  // namespace diffuvolume
