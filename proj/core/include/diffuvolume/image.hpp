#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace diffuvolume {

/// Single-channel H x W grid of reals, row-major with row 0 at the top.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, double fill = 0.0) : width(w), height(h) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("Image: width and height must be positive");
    data.assign(static_cast<std::size_t>(w) * h, fill);
  }

  std::size_t size() const { return data.size(); }
  double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

  friend bool operator==(const Image&, const Image&) = default;
};

/// Rectified grayscale stereo pair with intensities in [0, 1].
struct ImagePair {
  Image left;
  Image right;
};

}  // namespace diffuvolume
