#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace diffuvolume {

/// Philox4x32-10 block: maps (counter, key) to four independent 32-bit words.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// A stateless random stream addressed by (seed, stream id, element index).
///
/// Every draw is a pure function of its address, so per-element work can be
/// split across threads in any order and still produce identical output.
class NoiseStream {
 public:
  NoiseStream() = default;
  NoiseStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  /// Sub-stream derived from this one; distinct `id` values never overlap.
  NoiseStream derive(std::uint64_t id) const;

  /// Uniform in (0, 1), never exactly 0 or 1.
  double uniform(std::uint64_t index) const;
  /// Standard normal via Box-Muller on one Philox block.
  double gaussian(std::uint64_t index) const;

  void fill_gaussian(std::span<double> out) const;
  void fill_uniform(std::span<double> out) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::array<std::uint32_t, 4> block(std::uint64_t index) const;

  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
};

}  // namespace diffuvolume
