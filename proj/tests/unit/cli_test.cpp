#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "diffuvolume/cli.hpp"
#include "diffuvolume/config.hpp"
#include "diffuvolume/image_io.hpp"
#include "diffuvolume/metrics.hpp"
#include "test_support.hpp"

using namespace diffuvolume;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliResult r;
  r.code = cli_run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::vector<std::string> kSmallSuite = {"--count", "2", "--size", "32", "--max-disp", "16"};

std::vector<std::string> with_small_suite(std::vector<std::string> args) {
  args.insert(args.end(), kSmallSuite.begin(), kSmallSuite.end());
  return args;
}

}  // namespace

TEST(Cli, HelpAndUsageErrors) {
  const CliResult help = run_cli({"--help"});
  EXPECT_EQ(help.code, kExitOk);
  EXPECT_NE(help.out.find("demo"), std::string::npos);
  EXPECT_EQ(run_cli({}).code, kExitUsage);
  EXPECT_EQ(run_cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"demo", "--steps", "abc"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"demo", "--renewal", "maybe"}).code, kExitUsage);
  EXPECT_EQ(run_cli(with_small_suite({"demo", "--eta", "1.5"})).code, kExitUsage);
  EXPECT_EQ(run_cli(with_small_suite({"demo", "--steps", "5", "--weights", "0.5,0.5"})).code,
            kExitUsage);
  EXPECT_EQ(run_cli({"eval", "only_one.pfm"}).code, kExitUsage);
  const CliResult bad = run_cli({"gen"});
  EXPECT_EQ(bad.code, kExitUsage);
  EXPECT_NE(bad.err.find("error:"), std::string::npos);
}

TEST(Cli, EvalOnIdenticalMapsIsPerfect) {
  const auto dir = dvtest::scratch_dir("cli_eval");
  DisparityMap d(6, 4, 3.5);
  d.mask[2] = 0;
  write_pfm((dir / "a.pfm").string(), to_image(d));
  const CliResult r = run_cli({"eval", (dir / "a.pfm").string(), (dir / "a.pfm").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out, "epe=0.000000\nbad_1=0.000000\nbad_2=0.000000\nbad_3=0.000000\nd1_all=0.000000\npixels=23\n");
  const CliResult j = run_cli({"eval", (dir / "a.pfm").string(), (dir / "a.pfm").string(),
                               "--format", "json", "--margin", "1"});
  ASSERT_EQ(j.code, kExitOk);
  EXPECT_EQ(MetricReport::from_json(j.out).pixels, 8);
}

TEST(Cli, EvalDataErrors) {
  const auto dir = dvtest::scratch_dir("cli_eval_bad");
  write_pfm((dir / "a.pfm").string(), Image(4, 4));
  write_pfm((dir / "b.pfm").string(), Image(5, 4));
  EXPECT_EQ(run_cli({"eval", (dir / "a.pfm").string(), (dir / "b.pfm").string()}).code, kExitData);
  EXPECT_EQ(run_cli({"eval", (dir / "a.pfm").string(), (dir / "missing.pfm").string()}).code,
            kExitData);
}

TEST(Cli, DemoIsDeterministicAndReportsTheSuite) {
  const auto dir = dvtest::scratch_dir("cli_demo");
  const auto args = with_small_suite({"demo", "--report", (dir / "table.txt").string()});
  const CliResult a = run_cli(args);
  const CliResult b = run_cli(args);
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(slurp(dir / "table.txt"), a.out);
  EXPECT_NE(a.out.find("relative_improvement"), std::string::npos);
  EXPECT_NE(a.out.find("2 scenes"), std::string::npos);
  const CliResult other = run_cli(with_small_suite({"demo", "--seed", "8"}));
  EXPECT_NE(other.out, a.out);
}

TEST(Cli, RunSuiteWritesArtifactsWithCustomWeights) {
  const auto dir = dvtest::scratch_dir("cli_run_suite");
  const CliResult r = run_cli(with_small_suite({"run", "--suite", "--out", dir.string(), "--steps",
                                                "5", "--eta", "0", "--weights",
                                                "0,0,0,0.2,0.3,0.5", "--snapshots"}));
  ASSERT_EQ(r.code, kExitOk) << r.err;
  for (const char* name : {"config.json", "summary.txt", "scene_00/disparity.pfm",
                           "scene_00/baseline.pfm", "scene_00/disparity.png", "scene_00/entropy.txt",
                           "scene_00/metrics.txt", "scene_00/metrics.json", "scene_01/metrics.txt",
                           "scene_00/snapshots/step_5.pfm"}) {
    EXPECT_TRUE(fs::exists(dir / name)) << name;
  }
  const RunConfig written = load_run_config((dir / "config.json").string());
  EXPECT_EQ(written.sampler.weights, (std::vector<double>{0, 0, 0, 0.2, 0.3, 0.5}));
  EXPECT_EQ(written.suite->max_disparity, 16);
  EXPECT_EQ(written.matcher.max_disparity, 16);
  const Image pred = read_pfm((dir / "scene_00/disparity.pfm").string());
  EXPECT_EQ(pred.width, 32);
  const Image snap = read_pfm((dir / "scene_00/snapshots/step_1.pfm").string());
  EXPECT_EQ(snap.height, 16 * 32);
}

TEST(Cli, RunOnPairAndFromConfigFile) {
  const auto dir = dvtest::scratch_dir("cli_run_pair");
  ASSERT_EQ(run_cli({"gen", "--out", (dir / "data").string(), "--count", "1", "--size", "24",
                     "--max-disp", "8", "--format", "pgm"})
                .code,
            kExitOk);
  const fs::path scene = dir / "data" / "scene_00";
  ASSERT_TRUE(fs::exists(scene / "left.pgm"));
  const CliResult r = run_cli({"run", "--left", (scene / "left.pgm").string(), "--right",
                               (scene / "right.pgm").string(), "--gt",
                               (scene / "disparity.pfm").string(), "--max-disp", "8", "--out",
                               (dir / "out").string(), "--no-image"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("epe="), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "out" / "metrics.txt"));
  EXPECT_FALSE(fs::exists(dir / "out" / "disparity.png"));

  RunConfig c;
  c.matcher.max_disparity = 8;
  c.pair = PairInput{(scene / "left.pgm").string(), (scene / "right.pgm").string(), std::nullopt};
  c.output_dir = (dir / "cfg_out").string();
  c.emit.metric_report = false;
  std::ofstream(dir / "run.json") << to_json(c);
  const CliResult f = run_cli({"run", "--config", (dir / "run.json").string()});
  ASSERT_EQ(f.code, kExitOk) << f.err;
  EXPECT_TRUE(fs::exists(dir / "cfg_out" / "disparity.pfm"));
  EXPECT_FALSE(fs::exists(dir / "cfg_out" / "metrics.txt"));
}

TEST(Cli, RunErrorsMapToExitCodes) {
  const auto dir = dvtest::scratch_dir("cli_run_bad");
  EXPECT_EQ(run_cli({"run", "--left", (dir / "nope.pgm").string(), "--right",
                     (dir / "nope2.pgm").string(), "--out", (dir / "o").string()})
                .code,
            kExitData);
  EXPECT_EQ(run_cli({"run", "--left", "l.pgm", "--out", (dir / "o").string()}).code, kExitUsage);
  std::ofstream(dir / "bad.json") << R"({"sampler": {"bogus": 1}})";
  EXPECT_NE(run_cli({"run", "--config", (dir / "bad.json").string()}).code, kExitOk);
}

TEST(Cli, ProbeEntropyPrintsPerStepHistograms) {
  const auto dir = dvtest::scratch_dir("cli_probe");
  const CliResult r = run_cli(with_small_suite({"probe-entropy", "--scene", "1", "--pixel", "20,10",
                                                "--pixel", "5,5", "--plot",
                                                (dir / "hist.png").string()}));
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("pixel x=20 y=10"), std::string::npos);
  EXPECT_NE(r.out.find("pixel x=5 y=5"), std::string::npos);
  std::size_t steps = 0;
  for (std::size_t pos = r.out.find("\nstep="); pos != std::string::npos;
       pos = r.out.find("\nstep=", pos + 1)) {
    ++steps;
  }
  EXPECT_EQ(steps, 10u);
  EXPECT_TRUE(fs::exists(dir / "hist.png"));
  EXPECT_EQ(run_cli(with_small_suite({"probe-entropy", "--pixel", "99,1"})).code, kExitUsage);
  EXPECT_EQ(run_cli(with_small_suite({"probe-entropy", "--pixel", "3"})).code, kExitUsage);
  EXPECT_EQ(run_cli(with_small_suite({"probe-entropy", "--scene", "5"})).code, kExitUsage);
}

TEST(Cli, GenWritesLoadableScenes) {
  const auto dir = dvtest::scratch_dir("cli_gen");
  const CliResult r = run_cli({"gen", "--out", dir.string(), "--count", "3", "--size", "20"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(suite_spec_from_json(slurp(dir / "suite.json")).count, 3);
  for (int i = 0; i < 3; ++i) {
    const fs::path sd = dir / ("scene_0" + std::to_string(i));
    const SceneSpec spec = scene_spec_from_json(slurp(sd / "scene.json"));
    const Stereogram st = gen_stereogram(spec);
    EXPECT_EQ(read_pfm((sd / "left.pfm").string()).data.size(), st.pair.left.data.size());
    EXPECT_EQ(to_disparity(read_pfm((sd / "disparity.pfm").string())).mask, st.disparity.mask);
  }
}
