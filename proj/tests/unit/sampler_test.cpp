#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "diffuvolume/datagen.hpp"
#include "diffuvolume/metrics.hpp"
#include "diffuvolume/sampler.hpp"
#include "test_support.hpp"

using namespace diffuvolume;

namespace {

std::vector<double> normals(std::size_t n, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

struct SmallScene {
  Stereogram stereo;
  MatcherConfig matcher;
  CostVolume base;
  Prediction baseline;
};

SmallScene small_scene(double disparity, std::uint64_t seed) {
  SceneSpec spec;
  spec.width = 40;
  spec.height = 24;
  spec.max_disparity = 12;
  spec.constant_disparity = disparity;
  spec.seed = seed;
  SmallScene s;
  s.stereo = gen_stereogram(spec);
  s.matcher.max_disparity = 12;
  s.base = build_base_volume(s.stereo.pair, s.matcher);
  s.baseline = base_predict(s.base, s.matcher);
  return s;
}

}  // namespace

TEST(TimestepGrid, FiveStepsOverThousand) {
  EXPECT_EQ(timestep_grid(1000, 5), (std::vector<int>{1000, 800, 600, 400, 200}));
  EXPECT_EQ(timestep_grid(1000, 1), (std::vector<int>{1000}));
  EXPECT_THROW(timestep_grid(10, 0), std::invalid_argument);
  EXPECT_THROW(timestep_grid(10, 11), std::invalid_argument);
}

TEST(TimestepGrid, StrictlyDecreasingFromTProperty) {
  for (int T : {1, 7, 100, 1000}) {
    for (int S = 1; S <= std::min(T, 40); ++S) {
      const auto g = timestep_grid(T, S);
      ASSERT_EQ(static_cast<int>(g.size()), S);
      EXPECT_EQ(g.front(), T);
      EXPECT_GE(g.back(), 1);
      for (int i = 1; i < S; ++i) EXPECT_LT(g[i], g[i - 1]) << T << "/" << S;
    }
  }
}

TEST(IntegrationWeights, DefaultsForFiveStepsAndSumProperty) {
  EXPECT_EQ(default_integration_weights(5), (std::vector<double>{0, 0, 0, 0.2, 0.3, 0.5}));
  EXPECT_EQ(default_integration_weights(1), (std::vector<double>{0.5, 0.5}));
  for (int s = 1; s <= 12; ++s) {
    const auto w = default_integration_weights(s);
    ASSERT_EQ(static_cast<int>(w.size()), s + 1);
    double sum = 0.0;
    for (double v : w) {
      EXPECT_GE(v, 0.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(SamplerConfig, Validation) {
  SamplerConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.resolved_weights(), default_integration_weights(5));
  c.weights = {0, 0, 0, 0.2, 0.3, 0.5};
  EXPECT_NO_THROW(c.validate());
  c.weights = {0.5, 0.5};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.weights = {0, 0, 0, 0.2, 0.3, 0.6};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.weights = {0, 0, -0.1, 0.3, 0.3, 0.5};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = SamplerConfig{};
  c.eta = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = SamplerConfig{};
  c.steps = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = SamplerConfig{};
  c.renewal.disparity_threshold = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(RenewalPolicy, DefaultUncertaintyIsHalfLogLevels) {
  RenewalPolicy p;
  EXPECT_DOUBLE_EQ(p.uncertainty_for(64), std::log(64.0) / 2.0);
  p.uncertainty_threshold = 0.3;
  EXPECT_EQ(p.uncertainty_for(64), 0.3);
}

TEST(DdimStep, EtaZeroIsDeterministic) {
  const NoiseSchedule s = cosine_schedule(1000);
  const auto xt = normals(50, 1), x0 = normals(50, 2), eps = normals(50, 3);
  EXPECT_EQ(ddim_sigma(s, 800, 600, 0.0), 0.0);
  const auto a = ddim_step(s, xt, x0, eps, 800, 600, 0.0, NoiseStream(1, 1));
  const auto b = ddim_step(s, xt, x0, eps, 800, 600, 0.0, NoiseStream(99, 5));
  EXPECT_EQ(a, b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i], std::sqrt(s.alpha_bar(600)) * x0[i] + std::sqrt(1.0 - s.alpha_bar(600)) * eps[i],
                1e-15);
  }
}

TEST(DdimStep, FinalStepReturnsCleanEstimateExactly) {
  const NoiseSchedule s = cosine_schedule(1000);
  const auto xt = normals(20, 4), x0 = normals(20, 5), eps = normals(20, 6);
  EXPECT_EQ(ddim_step(s, xt, x0, eps, 200, 0, 0.0, NoiseStream{}), x0);
}

TEST(DdimStep, ExactPairLandsOnCleanSignalProperty) {
  const NoiseSchedule s = cosine_schedule(1000);
  const auto x0 = normals(30, 7), eps = normals(30, 8);
  for (int steps : {1, 2, 5, 10}) {
    const auto grid = timestep_grid(1000, steps);
    auto x = q_sample(s, x0, grid[0], eps);
    for (int i = 0; i < steps; ++i) {
      const int t = grid[i];
      const int t_prev = i + 1 < steps ? grid[i + 1] : 0;
      const auto e = recover_noise(s, x, x0, t);
      x = ddim_step(s, x, x0, e, t, t_prev, 0.0, NoiseStream{});
    }
    for (std::size_t i = 0; i < x0.size(); ++i) EXPECT_NEAR(x[i], x0[i], 1e-9) << "S=" << steps;
  }
}

TEST(DdimStep, SigmaFormulaAndNegativeRadicand) {
  const NoiseSchedule s = cosine_schedule(1000);
  const double ab_t = s.alpha_bar(600), ab_p = s.alpha_bar(400);
  EXPECT_NEAR(ddim_sigma(s, 600, 400, 0.5),
              0.5 * std::sqrt((1 - ab_t / ab_p) * (1 - ab_p) / (1 - ab_t)), 1e-15);
  EXPECT_THROW(ddim_sigma(s, 400, 400, 0.5), std::out_of_range);
  const std::vector<double> v = {0.1};
  EXPECT_THROW(ddim_step(s, v, v, v, 400, 200, 3.0, NoiseStream{}), std::invalid_argument);
}

TEST(DdimStep, EtaOneMeanMatchesDdpmMeanProperty) {
  std::mt19937 rng(31);
  std::uniform_int_distribution<int> pick(2, 1000);
  const NoiseSchedule s = cosine_schedule(1000);
  for (int trial = 0; trial < 200; ++trial) {
    const int t = pick(rng);
    const auto xt = normals(4, 100 + trial), x0 = normals(4, 500 + trial);
    const auto eps = recover_noise(s, xt, x0, t);
    const NoiseStream fresh(3, static_cast<std::uint64_t>(trial));
    const auto step = ddim_step(s, xt, x0, eps, t, t - 1, 1.0, fresh);
    const double sigma = ddim_sigma(s, t, t - 1, 1.0);
    const auto mean = ddpm_mean(s, xt, x0, t);
    for (std::size_t i = 0; i < 4; ++i) {
      ASSERT_NEAR(step[i] - sigma * fresh.gaussian(i), mean[i], 1e-9) << "t=" << t;
    }
    EXPECT_NEAR(sigma, ddpm_sigma(s, t), 1e-12);
  }
}

TEST(DdpmStep, MeanSigmaAndFirstStep) {
  const NoiseSchedule s = cosine_schedule(1000);
  const auto xt = normals(10, 9), x0 = normals(10, 10);
  EXPECT_EQ(ddpm_step(s, xt, x0, 500, NoiseStream(1, 2), false), ddpm_mean(s, xt, x0, 500));
  const auto noisy = ddpm_step(s, xt, x0, 500, NoiseStream(1, 2), true);
  const auto mean = ddpm_mean(s, xt, x0, 500);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_NEAR(noisy[i], mean[i] + ddpm_sigma(s, 500) * NoiseStream(1, 2).gaussian(i), 1e-15);
  }
  // t = 1: coefficient of x0c is beta_1 / (1 - ab_1) = 1, of x_t it is 0.
  const auto first = ddpm_mean(s, xt, x0, 1);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(first[i], x0[i], 1e-12);
  EXPECT_EQ(ddpm_sigma(s, 1), 0.0);
  EXPECT_THROW(ddpm_step(s, xt, x0, 0, NoiseStream{}), std::out_of_range);
}

TEST(VolumeRenewal, NoOutliersLeavesVolumeUnchanged) {
  const DisparityMap pred(3, 2, 4.0);
  ProbabilityVolume prob = discretize_two_hot(pred, 8);
  ProbabilityVolume dv(8, 2, 3);
  dv.values = normals(dv.size(), 11);
  const RenewalResult r = volume_renewal(dv, pred, pred, prob, RenewalPolicy{}, NoiseStream(1, 1));
  EXPECT_EQ(r.count, 0);
  EXPECT_EQ(r.volume.values, dv.values);
}

TEST(VolumeRenewal, SinglePixelTwoPixelsOffIsRenewed) {
  DisparityMap pred(3, 2, 4.0);
  const DisparityMap base(3, 2, 4.0);
  pred.at(2, 1) = 6.0;
  const ProbabilityVolume prob = discretize_two_hot(pred, 8);
  ProbabilityVolume dv(8, 2, 3);
  dv.values = normals(dv.size(), 12);
  const RenewalResult r = volume_renewal(dv, pred, base, prob, RenewalPolicy{}, NoiseStream(1, 1));
  EXPECT_EQ(r.count, 1);
  EXPECT_EQ(std::count(r.outliers.begin(), r.outliers.end(), 1), 1);
  EXPECT_EQ(r.outliers[pred.index(2, 1)], 1);
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 3; ++x) {
      const auto before = dv.column(x, y);
      const auto after = r.volume.column(x, y);
      if (x == 2 && y == 1) {
        EXPECT_NE(before, after);
        EXPECT_DOUBLE_EQ(*std::min_element(after.begin(), after.end()), -1.0);
        EXPECT_DOUBLE_EQ(*std::max_element(after.begin(), after.end()), 1.0);
      } else {
        EXPECT_EQ(before, after);
      }
    }
  }
}

TEST(VolumeRenewal, HighEntropyColumnIsOutlier) {
  const DisparityMap pred(2, 1, 3.0);
  ProbabilityVolume prob = discretize_two_hot(pred, 8);
  for (int k = 0; k < 8; ++k) prob.at(k, 1, 0) = 1.0 / 8;
  ProbabilityVolume dv(8, 1, 2, 0.2);
  const RenewalResult r = volume_renewal(dv, pred, pred, prob, RenewalPolicy{}, NoiseStream(2, 2));
  EXPECT_EQ(r.outliers, (std::vector<std::uint8_t>{0, 1}));
}

TEST(VolumeRenewal, DisabledPolicyIsIdentity) {
  DisparityMap pred(2, 2, 1.0);
  pred.values[0] = 7.0;
  ProbabilityVolume prob(8, 2, 2, 1.0 / 8);
  ProbabilityVolume dv(8, 2, 2);
  dv.values = normals(dv.size(), 13);
  RenewalPolicy off;
  off.enabled = false;
  const RenewalResult r = volume_renewal(dv, pred, DisparityMap(2, 2, 1.0), prob, off, NoiseStream{});
  EXPECT_EQ(r.count, 0);
  EXPECT_EQ(r.volume.values, dv.values);
  EXPECT_EQ(select_outliers(pred, DisparityMap(2, 2, 1.0), prob, off).size(), 4u);
}

TEST(DenseIntegration, WeightedAverageExamples) {
  DisparityMap a(2, 1), b(2, 1), base(2, 1);
  a.values = {1.0, 2.0};
  b.values = {3.0, 4.0};
  base.values = {10.0, 20.0};
  const std::vector<DisparityMap> preds = {a, b};
  const std::vector<double> w = {0.2, 0.3, 0.5};
  EXPECT_EQ(dense_integration(preds, base, w).values,
            (std::vector<double>{0.2 * 1 + 0.3 * 3 + 0.5 * 10, 0.2 * 2 + 0.3 * 4 + 0.5 * 20}));
  const std::vector<double> only_base = {0.0, 0.0, 1.0};
  EXPECT_EQ(dense_integration(preds, base, only_base).values, base.values);
  const std::vector<DisparityMap> same = {a, a};
  EXPECT_EQ(dense_integration(same, a, w).values, a.values);
  const std::vector<double> short_w = {0.5, 0.5};
  EXPECT_THROW(dense_integration(preds, base, short_w), std::invalid_argument);
  const std::vector<double> neg = {-0.5, 0.5, 1.0};
  EXPECT_THROW(dense_integration(preds, base, neg), std::invalid_argument);
}

TEST(TimeEmbedding, ZeroSinusoidalAndInjectivity) {
  for (double v : time_embedding(600, 16, EmbeddingMode::kZero)) EXPECT_EQ(v, 0.0);
  const auto at0 = time_embedding(0, 6, EmbeddingMode::kSinusoidal);
  EXPECT_EQ(at0, (std::vector<double>{0, 0.1, 0, 0.1, 0, 0.1}));
  const auto grid = timestep_grid(1000, 5);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i + 1; j < grid.size(); ++j) {
      EXPECT_NE(time_embedding(grid[i], 32, EmbeddingMode::kSinusoidal),
                time_embedding(grid[j], 32, EmbeddingMode::kSinusoidal));
    }
  }
  EXPECT_THROW(time_embedding(1, 1, EmbeddingMode::kZero), std::invalid_argument);
  EXPECT_EQ(parse_embedding_mode("sinusoidal"), EmbeddingMode::kSinusoidal);
  EXPECT_EQ(to_string(EmbeddingMode::kZero), "zero");
  EXPECT_THROW(parse_embedding_mode("mlp"), std::invalid_argument);
}

TEST(RunReverse, OutputShapeAndCounts) {
  const SmallScene s = small_scene(4.0, 3);
  SamplerConfig cfg;
  cfg.keep_snapshots = true;
  const SamplerOutput out = run_reverse(s.base, ClassicalMatcher(s.matcher), s.baseline.disparity, cfg);
  EXPECT_EQ(out.timesteps, timestep_grid(1000, 5));
  EXPECT_EQ(out.predictions.size(), 5u);
  EXPECT_EQ(out.outlier_counts.size(), 5u);
  EXPECT_EQ(out.mean_entropy.size(), 5u);
  EXPECT_EQ(out.snapshots.size(), 5u);
  for (int c : out.outlier_counts) EXPECT_GE(c, 0);
  EXPECT_EQ(out.final_disparity.width, 40);
  EXPECT_EQ(out.final_disparity.height, 24);
}

TEST(RunReverse, SingleStepWithFullWeightReturnsThatPrediction) {
  const SmallScene s = small_scene(3.0, 4);
  SamplerConfig cfg;
  cfg.steps = 1;
  cfg.weights = {1.0, 0.0};
  const SamplerOutput out = run_reverse(s.base, ClassicalMatcher(s.matcher), s.baseline.disparity, cfg);
  ASSERT_EQ(out.predictions.size(), 1u);
  EXPECT_EQ(out.final_disparity.values, out.predictions[0].values);
}

TEST(RunReverse, SameSeedIsBitIdentical) {
  const SmallScene s = small_scene(5.0, 5);
  for (double eta : {0.0, 1.0}) {
    SamplerConfig cfg;
    cfg.eta = eta;
    cfg.keep_snapshots = true;
    const ClassicalMatcher m(s.matcher);
    const SamplerOutput a = run_reverse(s.base, m, s.baseline.disparity, cfg);
    const SamplerOutput b = run_reverse(s.base, m, s.baseline.disparity, cfg);
    EXPECT_EQ(a.final_disparity.values, b.final_disparity.values);
    EXPECT_EQ(a.outlier_counts, b.outlier_counts);
    EXPECT_EQ(a.mean_entropy, b.mean_entropy);
    for (std::size_t i = 0; i < a.snapshots.size(); ++i) EXPECT_EQ(a.snapshots[i].values, b.snapshots[i].values);
  }
}

TEST(RunReverse, ZeroDisparityScene) {
  const Image left = dvtest::random_image(40, 24, 6);
  MatcherConfig mc;
  mc.max_disparity = 12;
  const CostVolume base = build_base_volume({left, left}, mc);
  const Prediction baseline = base_predict(base, mc);
  const SamplerOutput out = run_reverse(base, ClassicalMatcher(mc), baseline.disparity, SamplerConfig{});
  const DisparityMap gt(40, 24, 0.0);
  EXPECT_LT(epe(out.final_disparity, gt, evaluation_mask(gt)), 0.5);
}

TEST(RunReverse, RenewalDisabledStillCountsOutliers) {
  const SmallScene s = small_scene(6.0, 7);
  SamplerConfig cfg;
  cfg.renewal.enabled = false;
  const SamplerOutput out = run_reverse(s.base, ClassicalMatcher(s.matcher), s.baseline.disparity, cfg);
  EXPECT_EQ(out.outlier_counts.size(), 5u);
  EXPECT_GT(out.outlier_counts[0], 0);
}

TEST(RunReverse, ShapeMismatchThrows) {
  const SmallScene s = small_scene(2.0, 8);
  EXPECT_THROW(run_reverse(s.base, ClassicalMatcher(s.matcher), DisparityMap(3, 3), SamplerConfig{}),
               std::invalid_argument);
  SamplerConfig bad;
  bad.weights = {1.0};
  EXPECT_THROW(run_reverse(s.base, ClassicalMatcher(s.matcher), s.baseline.disparity, bad),
               std::invalid_argument);
}

TEST(FilterEntropy, ReadsSignedFilterAsDistribution) {
  ProbabilityVolume signed_filter(4, 1, 1, -1.0);
  signed_filter.at(2, 0, 0) = 1.0;
  EXPECT_EQ(filter_entropy(signed_filter)[0], 0.0);
  EXPECT_NEAR(filter_entropy(ProbabilityVolume(4, 1, 1, 0.3))[0], std::log(4.0), 1e-12);
}
