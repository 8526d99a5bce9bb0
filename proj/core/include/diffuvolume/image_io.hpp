#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "diffuvolume/image.hpp"
#include "diffuvolume/volume.hpp"

namespace diffuvolume {

/// Malformed, truncated or unsupported file content.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Endian { kLittle, kBig };

/// Grayscale PFM ("Pf"). Rows are stored bottom-up; a negative scale marks a
/// little-endian payload. Color PFM ("PF") is rejected.
Image read_pfm(const std::string& path);
void write_pfm(const std::string& path, const Image& grid, Endian endian = Endian::kLittle);

/// Binary (P5) or ASCII (P2) PGM, 8 or 16 bit. Intensities normalized by maxval.
Image read_pgm(const std::string& path);
/// Writes P5 with maxval 255 or 65535; values are clamped to [0, 1] and rounded.
void write_pgm(const std::string& path, const Image& image, int bit_depth = 8);

/// 8/16-bit grayscale PNG (with or without alpha, alpha ignored).
Image read_png(const std::string& path);

/// Dispatches on extension: .pgm, .png or .pfm (raw values).
Image read_intensity(const std::string& path);

/// Turbo colormap (polynomial approximation): v in [0, 1], clamped, to 8-bit RGB.
void turbo_color(double v, unsigned char rgb[3]);

/// Interleaved 8-bit RGB buffer, row-major, `width * height * 3` bytes.
void write_rgb_png(const std::string& path, int width, int height,
                   const std::vector<unsigned char>& rgb);

/// RGB PNG of `disparity` with 0 -> dark blue and max_disparity -> dark red.
/// Masked-out pixels are drawn black.
void write_disparity_png(const std::string& path, const DisparityMap& disparity,
                         double max_disparity);

DisparityMap to_disparity(const Image& grid);
Image to_image(const DisparityMap& disparity);

}  // namespace diffuvolume
