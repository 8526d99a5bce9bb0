#include "diffuvolume/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <memory>
#include <vector>

namespace diffuvolume {
namespace {

std::vector<unsigned char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Minimal tokenizer over a Netpbm-style header.
class HeaderReader {
 public:
  HeaderReader(const std::vector<unsigned char>& bytes, std::string path)
      : bytes_(bytes), path_(std::move(path)) {}

  std::string token() {
    skip_space_and_comments();
    std::string out;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_])) out.push_back(static_cast<char>(bytes_[pos_++]));
    if (out.empty()) throw FormatError("'" + path_ + "': truncated header");
    return out;
  }

  long integer() {
    const std::string t = token();
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (*end != '\0' || v <= 0) throw FormatError("'" + path_ + "': bad header field '" + t + "'");
    return v;
  }

  double real() {
    const std::string t = token();
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (*end != '\0' || !std::isfinite(v)) throw FormatError("'" + path_ + "': bad header field '" + t + "'");
    return v;
  }

  // Exactly one whitespace byte separates the header from the payload.
  std::size_t payload_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw FormatError("'" + path_ + "': missing header terminator");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

void write_all(const std::string& path, const std::string& header, const void* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path + "'");
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw FormatError("write failed for '" + path + "'");
}

std::string lower_extension(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return {};
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

struct FileCloser {
  void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};

}  // namespace

Image read_pfm(const std::string& path) {
  const auto bytes = slurp(path);
  HeaderReader header(bytes, path);
  const std::string magic = header.token();
  if (magic == "PF") throw FormatError("'" + path + "': color PFM (PF) is not supported");
  if (magic != "Pf") throw FormatError("'" + path + "': not a PFM file");
  const long width = header.integer();
  const long height = header.integer();
  const double scale = header.real();
  if (scale == 0.0) throw FormatError("'" + path + "': zero scale");
  const std::size_t offset = header.payload_offset();
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() < offset + count * 4) throw FormatError("'" + path + "': truncated payload");

  const bool little = scale < 0.0;
  const bool swap = little != (std::endian::native == std::endian::little);
  Image out(static_cast<int>(width), static_cast<int>(height));
  for (long row = 0; row < height; ++row) {
    const long y = height - 1 - row;
    for (long x = 0; x < width; ++x) {
      std::uint32_t bits;
      std::memcpy(&bits, bytes.data() + offset + (static_cast<std::size_t>(row) * width + x) * 4, 4);
      if (swap) bits = __builtin_bswap32(bits);
      out.at(static_cast<int>(x), static_cast<int>(y)) = std::bit_cast<float>(bits);
    }
  }
  return out;
}

void write_pfm(const std::string& path, const Image& grid, Endian endian) {
  const bool little = endian == Endian::kLittle;
  const bool swap = little != (std::endian::native == std::endian::little);
  std::vector<std::uint32_t> payload(grid.size());
  for (int row = 0; row < grid.height; ++row) {
    const int y = grid.height - 1 - row;
    for (int x = 0; x < grid.width; ++x) {
      std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(grid.at(x, y)));
      if (swap) bits = __builtin_bswap32(bits);
      payload[static_cast<std::size_t>(row) * grid.width + x] = bits;
    }
  }
  const std::string header = "Pf\n" + std::to_string(grid.width) + " " +
                             std::to_string(grid.height) + "\n" + (little ? "-1.0" : "1.0") + "\n";
  write_all(path, header, payload.data(), payload.size() * 4);
}

Image read_pgm(const std::string& path) {
  const auto bytes = slurp(path);
  HeaderReader header(bytes, path);
  const std::string magic = header.token();
  if (magic != "P5" && magic != "P2") throw FormatError("'" + path + "': not a grayscale PGM");
  const long width = header.integer();
  const long height = header.integer();
  const long maxval = header.integer();
  if (maxval > 65535) throw FormatError("'" + path + "': unsupported bit depth (maxval > 65535)");
  Image out(static_cast<int>(width), static_cast<int>(height));
  const double scale = 1.0 / static_cast<double>(maxval);
  const std::size_t count = out.size();
  if (magic == "P2") {
    for (std::size_t i = 0; i < count; ++i) {
      const std::string t = header.token();
      char* end = nullptr;
      const long v = std::strtol(t.c_str(), &end, 10);
      if (*end != '\0' || v < 0 || v > maxval) throw FormatError("'" + path + "': bad sample '" + t + "'");
      out.data[i] = v * scale;
    }
    return out;
  }
  const std::size_t offset = header.payload_offset();
  const std::size_t bpp = maxval > 255 ? 2 : 1;
  if (bytes.size() < offset + count * bpp) throw FormatError("'" + path + "': truncated payload");
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned char* p = bytes.data() + offset + i * bpp;
    const unsigned v = bpp == 2 ? (static_cast<unsigned>(p[0]) << 8) | p[1] : p[0];
    out.data[i] = v * scale;
  }
  return out;
}

void write_pgm(const std::string& path, const Image& image, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw std::invalid_argument("write_pgm: bit depth must be 8 or 16");
  const unsigned maxval = bit_depth == 8 ? 255u : 65535u;
  std::vector<unsigned char> payload;
  payload.reserve(image.size() * (bit_depth / 8));
  for (double v : image.data) {
    const auto q = static_cast<unsigned>(std::lround(std::clamp(v, 0.0, 1.0) * maxval));
    if (bit_depth == 16) payload.push_back(static_cast<unsigned char>(q >> 8));
    payload.push_back(static_cast<unsigned char>(q & 0xFF));
  }
  const std::string header = "P5\n" + std::to_string(image.width) + " " +
                             std::to_string(image.height) + "\n" + std::to_string(maxval) + "\n";
  write_all(path, header, payload.data(), payload.size());
}

Image read_png(const std::string& path) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "rb"));
  if (!file) throw FormatError("cannot open '" + path + "'");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw FormatError("'" + path + "': not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("libpng initialisation failed");
  }
  std::vector<unsigned char> buffer;
  std::vector<png_bytep> rows;
  int width = 0, height = 0, depth = 0, color = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("'" + path + "': corrupt PNG data");
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  depth = png_get_bit_depth(png, info);
  color = png_get_color_type(png, info);
  if (color != PNG_COLOR_TYPE_GRAY && color != PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("'" + path + "': color PNG images are not supported");
  }
  if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_strip_alpha(png);
  if (depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
  png_read_update_info(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  buffer.resize(rowbytes * height);
  rows.resize(height);
  for (int y = 0; y < height; ++y) rows[y] = buffer.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Image out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (depth == 16) {
        std::uint16_t v;
        std::memcpy(&v, rows[y] + 2 * x, 2);
        out.at(x, y) = v / 65535.0;
      } else {
        out.at(x, y) = rows[y][x] / 255.0;
      }
    }
  }
  return out;
}

Image read_intensity(const std::string& path) {
  const std::string ext = lower_extension(path);
  if (ext == "pgm") return read_pgm(path);
  if (ext == "png") return read_png(path);
  if (ext == "pfm") return read_pfm(path);
  throw FormatError("'" + path + "': unsupported image extension");
}

void turbo_color(double v, unsigned char rgb[3]) {
  // Polynomial fit of the Turbo palette (Mikhailov, 2019).
  const double x = std::clamp(v, 0.0, 1.0);
  const double x2 = x * x, x3 = x2 * x, x4 = x3 * x, x5 = x4 * x;
  const double r = 0.13572138 + 4.61539260 * x - 42.66032258 * x2 + 132.13108234 * x3 -
                   152.94239396 * x4 + 59.28637943 * x5;
  const double g = 0.09140261 + 2.19418839 * x + 4.84296658 * x2 - 14.18503333 * x3 +
                   4.27729857 * x4 + 2.82956604 * x5;
  const double b = 0.10667330 + 12.64194608 * x - 60.58204836 * x2 + 110.36276771 * x3 -
                   89.90310912 * x4 + 27.34824973 * x5;
  const auto q = [](double c) {
    return static_cast<unsigned char>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0));
  };
  rgb[0] = q(r);
  rgb[1] = q(g);
  rgb[2] = q(b);
}

void write_rgb_png(const std::string& path, int width, int height,
                   const std::vector<unsigned char>& rgb) {
  if (width <= 0 || height <= 0 ||
      rgb.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3) {
    throw std::invalid_argument("write_rgb_png: buffer does not match " + std::to_string(width) +
                                "x" + std::to_string(height) + " RGB");
  }
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, rgb.data(), 0, nullptr)) {
    throw FormatError("cannot write '" + path + "': " + image.message);
  }
}

void write_disparity_png(const std::string& path, const DisparityMap& disparity,
                         double max_disparity) {
  if (!(max_disparity > 0.0)) throw std::invalid_argument("write_disparity_png: max disparity must be positive");
  std::vector<unsigned char> rgb(disparity.size() * 3, 0);
  for (std::size_t i = 0; i < disparity.size(); ++i) {
    if (!disparity.mask[i]) continue;
    turbo_color(disparity.values[i] / max_disparity, &rgb[3 * i]);
  }
  write_rgb_png(path, disparity.width, disparity.height, rgb);
}

DisparityMap to_disparity(const Image& grid) {
  DisparityMap out(grid.width, grid.height, 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = grid.data[i];
    const bool ok = std::isfinite(v) && v >= 0.0;
    out.values[i] = ok ? v : 0.0;
    out.mask[i] = ok ? 1 : 0;
  }
  return out;
}

Image to_image(const DisparityMap& disparity) {
  Image out(disparity.width, disparity.height);
  for (std::size_t i = 0; i < disparity.size(); ++i) {
    out.data[i] = disparity.mask[i] ? disparity.values[i] : std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace diffuvolume
