#include "diffuvolume/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace diffuvolume {
namespace {

constexpr std::uint64_t kLeftTexture = 1;
constexpr std::uint64_t kFillTexture = 2;
constexpr std::uint64_t kLeftNoise = 3;
constexpr std::uint64_t kRightNoise = 4;

// Index of the topmost region covering integer pixel (x, y), or -1.
int topmost_region(const SceneSpec& spec, int x, int y) {
  for (int r = static_cast<int>(spec.regions.size()) - 1; r >= 0; --r) {
    if (spec.regions[r].contains(x, y)) return r;
  }
  return -1;
}

double left_disparity_at(const SceneSpec& spec, int x, int y) {
  if (spec.model == DisparityModel::kConstant) return spec.constant_disparity;
  return spec.regions[topmost_region(spec, x, y)].disparity(x, y);
}

void add_noise(Image& image, double sigma, const NoiseStream& stream) {
  if (sigma <= 0.0) return;
  for (std::size_t i = 0; i < image.data.size(); ++i) {
    image.data[i] = std::clamp(image.data[i] + sigma * stream.gaussian(i), 0.0, 1.0);
  }
}

}  // namespace

void SceneSpec::validate() const {
  if (width <= 0 || height <= 0) throw std::invalid_argument("scene: width and height must be positive");
  if (max_disparity < 1) throw std::invalid_argument("scene: max disparity must be >= 1");
  if (!(texture_density > 0.0 && texture_density <= 1.0)) {
    throw std::invalid_argument("scene: texture density must lie in (0, 1]");
  }
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("scene: noise sigma must be >= 0");
  if (model == DisparityModel::kPiecewisePlanar) {
    if (regions.empty()) throw std::invalid_argument("scene: piecewise-planar model needs regions");
    for (const auto& r : regions) {
      if (r.x1 <= r.x0 || r.y1 <= r.y0) throw std::invalid_argument("scene: empty region");
      if (!(std::abs(r.a) < 0.5)) throw std::invalid_argument("scene: plane slope |a| must be < 0.5");
    }
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        if (topmost_region(*this, x, y) < 0) {
          std::ostringstream msg;
          msg << "scene: pixel (" << x << ", " << y << ") is not covered by any region";
          throw std::invalid_argument(msg.str());
        }
      }
    }
  }
}

double TextureSpec::sample(std::uint64_t index) const {
  if (density >= 1.0 || stream.uniform(2 * index) < density) return stream.uniform(2 * index + 1);
  return 0.5;
}

DisparityMap analytic_disparity(const SceneSpec& spec) {
  spec.validate();
  DisparityMap out(spec.width, spec.height, 0.0);
  const double top = spec.max_disparity - 1.0;
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const double d = left_disparity_at(spec, x, y);
      if (!(d >= 0.0 && d <= top)) {
        std::ostringstream msg;
        msg << "scene: disparity " << d << " at (" << x << ", " << y << ") outside [0, " << top << "]";
        throw std::out_of_range(msg.str());
      }
      out.at(x, y) = d;
    }
  }
  return out;
}

DisparityMap right_view_disparity(const SceneSpec& spec) {
  spec.validate();
  DisparityMap out(spec.width, spec.height, 0.0);
  const double last = spec.width - 1.0;
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      bool found = false;
      double best = 0.0;
      if (spec.model == DisparityModel::kConstant) {
        best = spec.constant_disparity;
        found = x + best <= last;
      } else {
        for (int r = 0; r < static_cast<int>(spec.regions.size()); ++r) {
          const PlanarRegion& region = spec.regions[r];
          const double d = (region.a * x + region.b * y + region.c) / (1.0 - region.a);
          const double xl = x + d;
          if (d < 0.0 || xl > last || !region.contains(xl, y)) continue;
          const int px = std::clamp(static_cast<int>(std::lround(xl)), 0, spec.width - 1);
          if (topmost_region(spec, px, y) != r) continue;
          if (!found || d > best) best = d;
          found = true;
        }
      }
      out.at(x, y) = best;
      out.mask[out.index(x, y)] = found ? 1 : 0;
    }
  }
  return out;
}

Image warp_with_disparity(const Image& left, const DisparityMap& right_disparity,
                          const TextureSpec& fill) {
  if (right_disparity.width != left.width || right_disparity.height != left.height) {
    throw std::invalid_argument("warp_with_disparity: disparity map and image differ in size");
  }
  Image right(left.width, left.height);
  const double last = left.width - 1.0;
  for (int y = 0; y < left.height; ++y) {
    for (int x = 0; x < left.width; ++x) {
      const double xl = x + right_disparity.at(x, y);
      if (!right_disparity.valid(x, y) || xl < 0.0 || xl > last) {
        right.at(x, y) = fill.sample(static_cast<std::uint64_t>(y) * left.width + x);
        continue;
      }
      const int x0 = static_cast<int>(std::floor(xl));
      const double frac = xl - x0;
      const double v0 = left.at(x0, y);
      right.at(x, y) = frac > 0.0 ? (1.0 - frac) * v0 + frac * left.at(x0 + 1, y) : v0;
    }
  }
  return right;
}

Image warp_with_disparity(const Image& left, const DisparityMap& right_disparity) {
  return warp_with_disparity(left, right_disparity, TextureSpec{1.0, NoiseStream(0, kFillTexture)});
}

Stereogram gen_stereogram(const SceneSpec& spec) {
  Stereogram out;
  out.disparity = analytic_disparity(spec);
  const DisparityMap right_d = right_view_disparity(spec);

  const TextureSpec texture{spec.texture_density, NoiseStream(spec.seed, kLeftTexture)};
  const TextureSpec fill{spec.texture_density, NoiseStream(spec.seed, kFillTexture)};
  Image left(spec.width, spec.height);
  for (std::size_t i = 0; i < left.data.size(); ++i) left.data[i] = texture.sample(i);
  Image right = warp_with_disparity(left, right_d, fill);
  add_noise(left, spec.noise_sigma, NoiseStream(spec.seed, kLeftNoise));
  add_noise(right, spec.noise_sigma, NoiseStream(spec.seed, kRightNoise));
  out.pair = {std::move(left), std::move(right)};

  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      out.disparity.mask[out.disparity.index(x, y)] = x - out.disparity.at(x, y) >= 0.0 ? 1 : 0;
    }
  }
  return out;
}

std::vector<SceneSpec> default_suite(const SuiteSpec& suite) {
  if (suite.count < 0) throw std::invalid_argument("suite: count must be >= 0");
  if (suite.densities.empty()) throw std::invalid_argument("suite: need at least one density");
  if (suite.max_disparity < 8) throw std::invalid_argument("suite: max disparity must be >= 8");
  std::vector<SceneSpec> scenes;
  scenes.reserve(suite.count);
  const NoiseStream params(suite.seed, 99);
  const double top = suite.max_disparity - 1.0;
  for (int i = 0; i < suite.count; ++i) {
    const NoiseStream p = params.derive(static_cast<std::uint64_t>(i));
    auto u = [&](int slot, double lo, double hi) { return lo + (hi - lo) * p.uniform(slot); };

    SceneSpec s;
    s.width = suite.width;
    s.height = suite.height;
    s.max_disparity = suite.max_disparity;
    s.texture_density = suite.densities[i % suite.densities.size()];
    s.noise_sigma = suite.noise_sigma;
    s.seed = NoiseStream(suite.seed, 100 + static_cast<std::uint64_t>(i)).derive(7).stream();

    if (i % 2 == 0) {
      s.model = DisparityModel::kConstant;
      s.constant_disparity = std::floor(u(0, 2.0, 0.8 * top));
    } else {
      s.model = DisparityModel::kPiecewisePlanar;
      const double w = s.width;
      const double h = s.height;
      // Background plane kept within [1, 0.45 top].
      PlanarRegion bg{0, 0, s.width, s.height, u(1, -0.04, 0.04), u(2, -0.04, 0.04), 0.0};
      const double span = std::abs(bg.a) * w + std::abs(bg.b) * h;
      bg.c = u(3, 1.0, std::max(1.5, 0.45 * top - span)) + std::max(0.0, -bg.a * w) +
             std::max(0.0, -bg.b * h);
      s.regions.push_back(bg);
      const int fronts = 1 + static_cast<int>(p.uniform(4) * 2.0);
      for (int r = 0; r < fronts; ++r) {
        const int base = 10 + 10 * r;
        PlanarRegion fg;
        const int rw = static_cast<int>(u(base, 0.25 * w, 0.45 * w));
        const int rh = static_cast<int>(u(base + 1, 0.25 * h, 0.45 * h));
        fg.x0 = static_cast<int>(u(base + 2, 0.2 * w, w - rw));
        fg.y0 = static_cast<int>(u(base + 3, 0.0, h - rh));
        fg.x1 = fg.x0 + rw;
        fg.y1 = fg.y0 + rh;
        fg.a = u(base + 4, -0.03, 0.03);
        fg.b = u(base + 5, -0.03, 0.03);
        const double lo = 0.5 * top;
        const double hi = 0.95 * top;
        // c keeps the plane inside [lo, hi] over the rectangle.
        const double dmin = std::min(fg.a * fg.x0, fg.a * (fg.x1 - 1)) +
                            std::min(fg.b * fg.y0, fg.b * (fg.y1 - 1));
        const double dmax = std::max(fg.a * fg.x0, fg.a * (fg.x1 - 1)) +
                            std::max(fg.b * fg.y0, fg.b * (fg.y1 - 1));
        fg.c = u(base + 6, lo - dmin, std::max(lo - dmin, hi - dmax));
        s.regions.push_back(fg);
      }
    }
    scenes.push_back(std::move(s));
  }
  return scenes;
}

}  // namespace diffuvolume
