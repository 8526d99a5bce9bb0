#include "diffuvolume/volume.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace diffuvolume {

DisparityMap::DisparityMap(int w, int h, double fill)
    : width(w), height(h) {
  if (w <= 0 || h <= 0) {
    throw std::invalid_argument("DisparityMap: width and height must be positive");
  }
  values.assign(static_cast<std::size_t>(w) * h, fill);
  mask.assign(values.size(), 1);
}

ProbabilityVolume::ProbabilityVolume(int d, int h, int w, double fill)
    : levels(d), height(h), width(w) {
  if (d <= 0 || h <= 0 || w <= 0) {
    throw std::invalid_argument("ProbabilityVolume: dimensions must be positive");
  }
  values.assign(static_cast<std::size_t>(d) * h * w, fill);
}

std::vector<double> ProbabilityVolume::column(int x, int y) const {
  std::vector<double> out(levels);
  for (int k = 0; k < levels; ++k) out[k] = at(k, x, y);
  return out;
}

CostVolume::CostVolume(int c, int d, int h, int w, double fill)
    : channels(c), levels(d), height(h), width(w) {
  if (c <= 0 || d <= 0 || h <= 0 || w <= 0) {
    throw std::invalid_argument("CostVolume: dimensions must be positive");
  }
  values.assign(static_cast<std::size_t>(c) * d * h * w, fill);
}

ProbabilityVolume discretize_two_hot(const DisparityMap& disparity, int levels) {
  if (levels < 1) throw std::invalid_argument("discretize_two_hot: levels must be >= 1");
  ProbabilityVolume out(levels, disparity.height, disparity.width, 0.0);
  const double uniform = 1.0 / levels;
  const double top = static_cast<double>(levels - 1);
  for (int y = 0; y < disparity.height; ++y) {
    for (int x = 0; x < disparity.width; ++x) {
      if (!disparity.valid(x, y)) {
        for (int k = 0; k < levels; ++k) out.at(k, x, y) = uniform;
        continue;
      }
      const double d = disparity.at(x, y);
      if (!(d >= 0.0 && d <= top)) {
        std::ostringstream msg;
        msg << "discretize_two_hot: disparity " << d << " at pixel (" << x << ", " << y
            << ") outside [0, " << top << "]";
        throw std::out_of_range(msg.str());
      }
      const int lo = static_cast<int>(std::floor(d));
      const double frac = d - lo;
      out.at(lo, x, y) = 1.0 - frac;
      if (frac > 0.0) out.at(lo + 1, x, y) = frac;
    }
  }
  return out;
}

DisparityMap soft_argmin(const ProbabilityVolume& probabilities) {
  DisparityMap out(probabilities.width, probabilities.height, 0.0);
  for (int y = 0; y < probabilities.height; ++y) {
    for (int x = 0; x < probabilities.width; ++x) {
      double sum = 0.0;
      double expect = 0.0;
      for (int k = 0; k < probabilities.levels; ++k) {
        const double p = probabilities.at(k, x, y);
        sum += p;
        expect += k * p;
      }
      if (std::abs(sum - 1.0) > 1e-4) {
        std::ostringstream msg;
        msg << "soft_argmin: column at (" << x << ", " << y << ") sums to " << sum;
        throw std::invalid_argument(msg.str());
      }
      out.at(x, y) = expect;
    }
  }
  return out;
}

ProbabilityVolume rescale_signed(const ProbabilityVolume& unit) {
  ProbabilityVolume out = unit;
  for (double& v : out.values) v = 2.0 * v - 1.0;
  return out;
}

ProbabilityVolume rescale_unit(const ProbabilityVolume& signed_volume) {
  ProbabilityVolume out = signed_volume;
  for (double& v : out.values) v = (v + 1.0) / 2.0;
  return out;
}

double column_entropy(std::span<const double> column) {
  double h = 0.0;
  for (double p : column) {
    if (p < 0.0) throw std::invalid_argument("column_entropy: negative probability");
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

std::vector<double> entropy_map(const ProbabilityVolume& probabilities) {
  std::vector<double> out(probabilities.plane());
  std::vector<double> col(probabilities.levels);
  for (int y = 0; y < probabilities.height; ++y) {
    for (int x = 0; x < probabilities.width; ++x) {
      for (int k = 0; k < probabilities.levels; ++k) col[k] = probabilities.at(k, x, y);
      out[static_cast<std::size_t>(y) * probabilities.width + x] = column_entropy(col);
    }
  }
  return out;
}

ProbabilityVolume to_distribution(const ProbabilityVolume& unit) {
  ProbabilityVolume out = unit;
  const double uniform = 1.0 / unit.levels;
  for (int y = 0; y < unit.height; ++y) {
    for (int x = 0; x < unit.width; ++x) {
      double sum = 0.0;
      for (int k = 0; k < unit.levels; ++k) {
        double& v = out.at(k, x, y);
        v = std::max(v, 0.0);
        sum += v;
      }
      for (int k = 0; k < unit.levels; ++k) {
        double& v = out.at(k, x, y);
        v = sum > 0.0 ? v / sum : uniform;
      }
    }
  }
  return out;
}

CostVolume filter_volume(const CostVolume& base, const ProbabilityVolume& filter,
                         std::span<const double> embedding) {
  if (filter.levels != base.levels || filter.height != base.height ||
      filter.width != base.width) {
    throw std::invalid_argument("filter_volume: filter shape does not match base volume");
  }
  if (embedding.size() != static_cast<std::size_t>(base.levels)) {
    throw std::invalid_argument("filter_volume: embedding length must equal level count");
  }
  CostVolume out = base;
  const std::size_t plane = filter.plane();
  for (int c = 0; c < base.channels; ++c) {
    for (int k = 0; k < base.levels; ++k) {
      const double* f = filter.values.data() + static_cast<std::size_t>(k) * plane;
      double* v = out.values.data() + out.index(c, k, 0, 0);
      const double e = embedding[k];
      for (std::size_t i = 0; i < plane; ++i) v[i] *= f[i] + e;
    }
  }
  return out;
}

DisparityMap downsample_disparity(const DisparityMap& disparity, int factor) {
  if (factor <= 0) throw std::invalid_argument("downsample_disparity: factor must be positive");
  if (factor == 1) return disparity;
  const int w = (disparity.width + factor - 1) / factor;
  const int h = (disparity.height + factor - 1) / factor;
  DisparityMap out(w, h, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int sx = x * factor;
      const int sy = y * factor;
      out.at(x, y) = disparity.at(sx, sy) / factor;
      out.mask[out.index(x, y)] = disparity.mask[disparity.index(sx, sy)];
    }
  }
  return out;
}

DisparityMap upsample_disparity(const DisparityMap& disparity, int factor, int width,
                                int height) {
  if (factor <= 0) throw std::invalid_argument("upsample_disparity: factor must be positive");
  DisparityMap out(width, height, 0.0);
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(y / factor, disparity.height - 1);
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(x / factor, disparity.width - 1);
      out.at(x, y) = disparity.at(sx, sy) * factor;
      out.mask[out.index(x, y)] = disparity.mask[disparity.index(sx, sy)];
    }
  }
  return out;
}

}  // namespace diffuvolume
