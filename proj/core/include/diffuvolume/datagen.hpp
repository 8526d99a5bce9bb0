#pragma once

#include <cstdint>
#include <vector>

#include "diffuvolume/image.hpp"
#include "diffuvolume/random.hpp"
#include "diffuvolume/volume.hpp"

namespace diffuvolume {

/// Axis-aligned rectangle [x0, x1) x [y0, y1) in left-image coordinates
/// carrying the plane d(x, y) = a x + b y + c.
struct PlanarRegion {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double a = 0.0, b = 0.0, c = 0.0;

  bool contains(double x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
  double disparity(double x, int y) const { return a * x + b * y + c; }
  friend bool operator==(const PlanarRegion&, const PlanarRegion&) = default;
};

enum class DisparityModel { kConstant, kPiecewisePlanar };

struct SceneSpec {
  int width = 64;
  int height = 64;
  int max_disparity = 32;
  DisparityModel model = DisparityModel::kConstant;
  double constant_disparity = 0.0;
  /// Later regions occlude earlier ones; together they must cover the frame.
  std::vector<PlanarRegion> regions;
  double texture_density = 1.0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const SceneSpec&, const SceneSpec&) = default;
};

/// Random-dot texture: a pixel carries a dot with probability `density`, dot
/// intensities uniform in [0, 1], background 0.5.
struct TextureSpec {
  double density = 1.0;
  NoiseStream stream;

  double sample(std::uint64_t index) const;
};

/// Analytic left-view disparity. Throws std::out_of_range when any value falls
/// outside [0, max_disparity - 1].
DisparityMap analytic_disparity(const SceneSpec& spec);

/// Right-view disparity: for right pixel x the nearest surface point whose left
/// position x + d is visible. Unmatched pixels (dis-occlusion) are masked out.
DisparityMap right_view_disparity(const SceneSpec& spec);

/// right(x, y) = left(x + d(x, y), y), linearly interpolated. Masked-out pixels
/// and positions outside the frame take fresh texture from `fill`.
Image warp_with_disparity(const Image& left, const DisparityMap& right_disparity,
                          const TextureSpec& fill);
Image warp_with_disparity(const Image& left, const DisparityMap& right_disparity);

struct Stereogram {
  ImagePair pair;
  /// Left-view ground truth; mask marks pixels whose match lies inside the
  /// right frame (x - d >= 0).
  DisparityMap disparity;
};

Stereogram gen_stereogram(const SceneSpec& spec);

struct SuiteSpec {
  int count = 20;
  int width = 64;
  int height = 64;
  int max_disparity = 32;
  std::vector<double> densities = {1.0, 0.5, 0.1};
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;

  friend bool operator==(const SuiteSpec&, const SuiteSpec&) = default;
};

/// Alternates constant and piecewise-planar scenes, cycling through the
/// densities. Deterministic in `suite.seed`.
std::vector<SceneSpec> default_suite(const SuiteSpec& suite = {});

}  // namespace diffuvolume
