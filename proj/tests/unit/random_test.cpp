#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "diffuvolume/random.hpp"

using namespace diffuvolume;

// Known-answer vectors published with the Random123 reference implementation.
TEST(Philox, KnownAnswerVectors) {
  using W = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}), (W{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (W{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (W{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(NoiseStream, DrawsArePureFunctionsOfAddress) {
  const NoiseStream a(42, 3), b(42, 3);
  for (std::uint64_t i = 0; i < 100; ++i) {
    EXPECT_EQ(a.gaussian(i), b.gaussian(i));
    EXPECT_EQ(a.uniform(i), b.uniform(i));
  }
  std::vector<double> fwd(64), rev(64);
  a.fill_gaussian(fwd);
  for (int i = 63; i >= 0; --i) rev[i] = a.gaussian(static_cast<std::uint64_t>(i));
  EXPECT_EQ(fwd, rev);
}

TEST(NoiseStream, StreamsSeedsAndDerivedStreamsDiffer) {
  const NoiseStream root(1, 0);
  std::set<double> firsts = {root.gaussian(0), NoiseStream(2, 0).gaussian(0),
                             NoiseStream(1, 1).gaussian(0), root.derive(0).gaussian(0),
                             root.derive(1).gaussian(0)};
  EXPECT_EQ(firsts.size(), 5u);
}

TEST(NoiseStream, UniformOpenIntervalAndMoments) {
  const NoiseStream s(9, 9);
  const int n = 200000;
  double mean = 0.0, sq = 0.0, umean = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform(static_cast<std::uint64_t>(i));
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    umean += u;
    const double g = s.gaussian(static_cast<std::uint64_t>(i));
    ASSERT_TRUE(std::isfinite(g));
    mean += g;
    sq += g * g;
  }
  umean /= n;
  mean /= n;
  const double var = sq / n - mean * mean;
  // 5 standard errors.
  EXPECT_NEAR(umean, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(mean, 0.0, 5.0 / std::sqrt(static_cast<double>(n)));
  EXPECT_NEAR(var, 1.0, 5.0 * std::sqrt(2.0 / n));
}
