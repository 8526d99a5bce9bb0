#include "diffuvolume/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "diffuvolume/config.hpp"
#include "diffuvolume/image_io.hpp"
#include "diffuvolume/pipeline.hpp"

namespace diffuvolume {
namespace {

namespace fs = std::filesystem;

// Bad flag values or combinations; maps to kExitUsage.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string printf_string(const char* format, ...) __attribute__((format(printf, 1, 2)));

std::string printf_string(const char* format, ...) {
  va_list args;
  va_start(args, format);
  va_list copy;
  va_copy(copy, args);
  const int n = std::vsnprintf(nullptr, 0, format, copy);
  va_end(copy);
  std::string out(static_cast<std::size_t>(std::max(n, 0)) + 1, '\0');
  std::vsnprintf(out.data(), out.size(), format, args);
  va_end(args);
  out.resize(static_cast<std::size_t>(std::max(n, 0)));
  return out;
}

// Matcher and sampler flags shared by demo, run and probe-entropy. Only flags
// given on the command line override the base configuration.
struct Knobs {
  int steps = 0, timesteps = 0, max_disp = 0, downsample = 0, groups = 0;
  int census_radius = 0, aggregation_radius = 0;
  double eta = 0, disp_threshold = 0, entropy_threshold = 0, temp = 0, concat_weight = 0;
  std::uint64_t seed = 0;
  std::vector<double> weights;
  std::string renewal, embedding;
  std::map<std::string, CLI::Option*> opts;

  void add(CLI::App* app) {
    opts["steps"] = app->add_option("--steps", steps, "Sampling steps S");
    opts["timesteps"] = app->add_option("--timesteps", timesteps, "Diffusion timesteps T");
    opts["eta"] = app->add_option("--eta", eta, "DDIM eta in [0, 1]");
    opts["seed"] = app->add_option("--seed", seed, "Sampler seed");
    opts["weights"] = app->add_option("--weights", weights,
                                      "Integration weights w_1..w_S,baseline (comma separated)")
                          ->delimiter(',');
    opts["renewal"] = app->add_option("--renewal", renewal, "Volume renewal on/off")
                          ->check(CLI::IsMember({"on", "off"}));
    opts["disp-threshold"] =
        app->add_option("--disp-threshold", disp_threshold, "Renewal disparity threshold (px)");
    opts["entropy-threshold"] = app->add_option("--entropy-threshold", entropy_threshold,
                                                "Renewal entropy threshold (nats, default ln(D)/2)");
    opts["embedding"] = app->add_option("--embedding", embedding, "Time embedding zero/sinusoidal")
                            ->check(CLI::IsMember({"zero", "sinusoidal"}));
    opts["max-disp"] = app->add_option("--max-disp", max_disp, "Maximum disparity D_max");
    opts["downsample"] = app->add_option("--downsample", downsample, "Matcher downsample factor");
    opts["groups"] = app->add_option("--groups", groups, "Correlation groups N_g");
    opts["census-radius"] = app->add_option("--census-radius", census_radius, "Feature window radius");
    opts["agg-radius"] =
        app->add_option("--agg-radius", aggregation_radius, "Aggregation box radius");
    opts["temp"] = app->add_option("--temp", temp, "Softmax temperature");
    opts["concat-weight"] =
        app->add_option("--concat-weight", concat_weight, "Concatenation volume fusion weight");
  }

  bool given(const char* name) const { return opts.at(name)->count() > 0; }

  void apply(MatcherConfig& m, SamplerConfig& s) const {
    if (given("steps")) s.steps = steps;
    if (given("timesteps")) s.timesteps = timesteps;
    if (given("eta")) s.eta = eta;
    if (given("seed")) s.seed = seed;
    if (given("weights")) s.weights = weights;
    if (given("renewal")) s.renewal.enabled = renewal == "on";
    if (given("disp-threshold")) s.renewal.disparity_threshold = disp_threshold;
    if (given("entropy-threshold")) s.renewal.uncertainty_threshold = entropy_threshold;
    if (given("embedding")) s.embedding = parse_embedding_mode(embedding);
    if (given("max-disp")) m.max_disparity = max_disp;
    if (given("downsample")) m.downsample = downsample;
    if (given("groups")) m.groups = groups;
    if (given("census-radius")) m.census_radius = census_radius;
    if (given("agg-radius")) m.aggregation_radius = aggregation_radius;
    if (given("temp")) m.temperature = temp;
    if (given("concat-weight")) m.concat_weight = concat_weight;
  }
};

struct SuiteKnobs {
  std::uint64_t seed = 0;
  int count = 0, size = 0;
  double noise = 0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* count_opt = nullptr;
  CLI::Option* size_opt = nullptr;
  CLI::Option* noise_opt = nullptr;

  void add(CLI::App* app) {
    seed_opt = app->add_option("--suite-seed", seed, "Synthetic suite seed");
    count_opt = app->add_option("--count", count, "Number of synthetic scenes");
    size_opt = app->add_option("--size", size, "Synthetic scene width and height");
    noise_opt = app->add_option("--noise", noise, "Image noise sigma of synthetic scenes");
  }

  void apply(SuiteSpec& suite) const {
    if (seed_opt->count()) suite.seed = seed;
    if (count_opt->count()) suite.count = count;
    if (size_opt->count()) suite.width = suite.height = size;
    if (noise_opt->count()) suite.noise_sigma = noise;
  }
};

void validate_configs(const MatcherConfig& m, const SamplerConfig& s) {
  try {
    m.validate();
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

// Suite runs match the matcher range to the suite unless --max-disp is given,
// in which case the suite follows the flag.
void sync_max_disparity(const Knobs& knobs, MatcherConfig& m, SuiteSpec& suite) {
  if (knobs.given("max-disp")) {
    suite.max_disparity = m.max_disparity;
  } else {
    m.max_disparity = suite.max_disparity;
  }
}

const char* model_label(DisparityModel model) {
  return model == DisparityModel::kConstant ? "constant" : "planar";
}

std::string suite_table(const std::vector<SceneSpec>& scenes,
                        const std::vector<SceneResult>& results, const MatcherConfig& m,
                        const SamplerConfig& s) {
  std::ostringstream out;
  out << printf_string("# %zu scenes, D=%d, steps=%d, eta=%g, seed=%llu, renewal=%s\n",
                       scenes.size(), m.max_disparity, s.steps, s.eta,
                       static_cast<unsigned long long>(s.seed), s.renewal.enabled ? "on" : "off");
  out << printf_string("%-6s %-9s %-8s %-10s %-10s %-10s %-10s %-10s %s\n", "scene", "model",
                       "density", "base_epe", "dv_epe", "base_bad1", "dv_bad1", "base_d1", "dv_d1");
  double sum_base = 0.0, sum_dv = 0.0, sum_bb = 0.0, sum_db = 0.0, sum_bd = 0.0, sum_dd = 0.0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const MetricReport& b = *results[i].baseline_report;
    const MetricReport& d = *results[i].diffuvolume_report;
    out << printf_string("%-6zu %-9s %-8.2f %-10.6f %-10.6f %-10.6f %-10.6f %-10.6f %.6f\n", i,
                         model_label(scenes[i].model), scenes[i].texture_density, b.epe, d.epe,
                         b.bad_1, d.bad_1, b.d1_all, d.d1_all);
    sum_base += b.epe;
    sum_dv += d.epe;
    sum_bb += b.bad_1;
    sum_db += d.bad_1;
    sum_bd += b.d1_all;
    sum_dd += d.d1_all;
  }
  const double n = static_cast<double>(results.size());
  out << printf_string("%-6s %-9s %-8s %-10.6f %-10.6f %-10.6f %-10.6f %-10.6f %.6f\n", "mean",
                       "-", "-", sum_base / n, sum_dv / n, sum_bb / n, sum_db / n, sum_bd / n,
                       sum_dd / n);
  const double rel = sum_base > 0.0 ? (sum_base - sum_dv) / sum_base : 0.0;
  out << printf_string("relative_improvement %.6f\n", rel);

  out << printf_string("%-5s %-6s %-10s %s\n", "step", "t", "outliers", "mean_entropy");
  const std::size_t steps = results.empty() ? 0 : results[0].sampler.timesteps.size();
  for (std::size_t k = 0; k < steps; ++k) {
    long long outliers = 0;
    double entropy = 0.0;
    for (const auto& r : results) {
      outliers += r.sampler.outlier_counts[k];
      entropy += r.sampler.mean_entropy[k];
    }
    out << printf_string("%-5zu %-6d %-10lld %.6f\n", k + 1, results[0].sampler.timesteps[k],
                         outliers, entropy / n);
  }
  return out.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw std::runtime_error("cannot create output directory '" + dir.string() + "'");
  }
  const fs::path probe = dir / ".write_probe";
  {
    std::ofstream f(probe);
    if (!f) throw std::runtime_error("output directory '" + dir.string() + "' is not writable");
  }
  fs::remove(probe, ec);
}

std::string entropy_trace(const SamplerOutput& s) {
  std::string text = "step t mean_entropy outliers\n";
  for (std::size_t k = 0; k < s.timesteps.size(); ++k) {
    text += printf_string("%zu %d %.9f %d\n", k + 1, s.timesteps[k], s.mean_entropy[k],
                          s.outlier_counts[k]);
  }
  return text;
}

void write_scene_outputs(const fs::path& dir, const SceneResult& result, const RunConfig& config) {
  prepare_dir(dir);
  write_pfm((dir / "disparity.pfm").string(), to_image(result.diffuvolume));
  write_pfm((dir / "baseline.pfm").string(), to_image(result.baseline));
  if (config.emit.disparity_image) {
    write_disparity_png((dir / "disparity.png").string(), result.diffuvolume,
                        config.matcher.max_disparity);
    write_disparity_png((dir / "baseline.png").string(), result.baseline,
                        config.matcher.max_disparity);
  }
  if (config.emit.entropy_trace) write_text(dir / "entropy.txt", entropy_trace(result.sampler));
  if (config.emit.metric_report && result.diffuvolume_report) {
    write_text(dir / "metrics.txt", result.diffuvolume_report->to_key_value());
    write_text(dir / "metrics.json", result.diffuvolume_report->to_json());
    write_text(dir / "baseline_metrics.txt", result.baseline_report->to_key_value());
  }
  if (config.emit.snapshots) {
    const fs::path snaps = dir / "snapshots";
    prepare_dir(snaps);
    for (std::size_t k = 0; k < result.sampler.snapshots.size(); ++k) {
      const ProbabilityVolume& v = result.sampler.snapshots[k];
      // Levels stacked vertically: a (D * H) x W grid.
      Image grid(v.width, v.levels * v.height);
      grid.data = v.values;
      write_pfm((snaps / printf_string("step_%zu.pfm", k + 1)).string(), grid);
      Image pred = to_image(result.sampler.predictions[k]);
      write_pfm((snaps / printf_string("prediction_%zu.pfm", k + 1)).string(), pred);
    }
  }
}

ImagePair read_pair(const PairInput& input) {
  ImagePair pair{read_intensity(input.left), read_intensity(input.right)};
  if (pair.left.width != pair.right.width || pair.left.height != pair.right.height) {
    throw FormatError("left and right images differ in size");
  }
  return pair;
}

std::optional<DisparityMap> read_ground_truth(const std::optional<std::string>& path,
                                              const Image& reference) {
  if (!path) return std::nullopt;
  DisparityMap gt = to_disparity(read_pfm(*path));
  if (gt.width != reference.width || gt.height != reference.height) {
    throw FormatError("ground truth '" + *path + "' does not match the image size");
  }
  return gt;
}

std::pair<int, int> parse_pixel(const std::string& text) {
  const auto comma = text.find(',');
  try {
    if (comma == std::string::npos) throw std::invalid_argument(text);
    std::size_t used = 0;
    const int x = std::stoi(text.substr(0, comma), &used);
    if (used != comma) throw std::invalid_argument(text);
    const std::string rest = text.substr(comma + 1);
    const int y = std::stoi(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(text);
    return {x, y};
  } catch (const std::logic_error&) {
    throw UsageError("--pixel expects x,y but got '" + text + "'");
  }
}

// One panel per probed pixel, one row of D bars per step.
void write_histogram_plot(const std::string& path, const std::vector<std::vector<std::vector<double>>>& hist,
                          int levels) {
  constexpr int kBar = 4, kRow = 48, kGap = 4;
  const int panel = levels * kBar + 2 * kGap;
  const int rows = hist.empty() ? 0 : static_cast<int>(hist[0].size());
  const int width = std::max(1, static_cast<int>(hist.size()) * panel);
  const int height = std::max(1, rows * (kRow + kGap));
  std::vector<unsigned char> rgb(static_cast<std::size_t>(width) * height * 3, 24);
  for (std::size_t p = 0; p < hist.size(); ++p) {
    for (int r = 0; r < rows; ++r) {
      const auto& column = hist[p][r];
      const double peak = *std::max_element(column.begin(), column.end());
      unsigned char color[3];
      turbo_color(rows > 1 ? static_cast<double>(r) / (rows - 1) : 1.0, color);
      for (int k = 0; k < levels; ++k) {
        const int bar = peak > 0.0 ? static_cast<int>(std::lround(column[k] / peak * (kRow - 2))) : 0;
        const int bottom = (r + 1) * (kRow + kGap) - kGap - 1;
        for (int y = bottom; y > bottom - bar; --y) {
          for (int x = 0; x < kBar - 1; ++x) {
            const int px = static_cast<int>(p) * panel + kGap + k * kBar + x;
            std::copy(color, color + 3, &rgb[(static_cast<std::size_t>(y) * width + px) * 3]);
          }
        }
      }
    }
  }
  write_rgb_png(path, width, height, rgb);
}

int cmd_demo(const Knobs& knobs, const SuiteKnobs& suite_knobs, int threads,
             const std::string& report, std::ostream& out) {
  SuiteSpec suite;
  suite_knobs.apply(suite);
  MatcherConfig m;
  SamplerConfig s;
  knobs.apply(m, s);
  sync_max_disparity(knobs, m, suite);
  validate_configs(m, s);
  std::vector<SceneSpec> scenes;
  try {
    scenes = default_suite(suite);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto results = run_suite(scenes, m, s, threads);
  const std::string table = suite_table(scenes, results, m, s);
  out << table;
  if (!report.empty()) write_text(report, table);
  return kExitOk;
}

int cmd_run(RunConfig config, std::ostream& out) {
  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  config.sampler.keep_snapshots = config.emit.snapshots;
  const fs::path dir(config.output_dir);
  prepare_dir(dir);
  write_text(dir / "config.json", to_json(config));

  if (config.pair) {
    const ImagePair pair = read_pair(*config.pair);
    const auto gt = read_ground_truth(config.pair->ground_truth, pair.left);
    const SceneResult result = run_scene(pair, gt, config.matcher, config.sampler);
    write_scene_outputs(dir, result, config);
    out << entropy_trace(result.sampler);
    if (result.diffuvolume_report) out << result.diffuvolume_report->to_key_value();
    out << "wrote " << dir.string() << "\n";
    return kExitOk;
  }

  const std::vector<SceneSpec> scenes = default_suite(*config.suite);
  const auto results = run_suite(scenes, config.matcher, config.sampler, config.threads);
  for (std::size_t i = 0; i < results.size(); ++i) {
    write_scene_outputs(dir / printf_string("scene_%02zu", i), results[i], config);
  }
  const std::string table = suite_table(scenes, results, config.matcher, config.sampler);
  write_text(dir / "summary.txt", table);
  out << table << "wrote " << dir.string() << "\n";
  return kExitOk;
}

int cmd_eval(const std::string& pred_path, const std::string& gt_path, const std::string& format,
             int margin, std::ostream& out) {
  const DisparityMap pred = to_disparity(read_pfm(pred_path));
  const DisparityMap gt = to_disparity(read_pfm(gt_path));
  if (pred.width != gt.width || pred.height != gt.height) {
    throw FormatError(printf_string("prediction is %dx%d but ground truth is %dx%d", pred.width,
                                    pred.height, gt.width, gt.height));
  }
  std::vector<std::uint8_t> mask;
  if (margin > 0) {
    mask = evaluation_mask(gt, interior_mask(gt.width, gt.height, margin));
  } else {
    mask = evaluation_mask(gt);
  }
  const MetricReport report = evaluate(pred, gt, mask);
  out << (format == "json" ? report.to_json() : report.to_key_value());
  return kExitOk;
}

int cmd_probe(const Knobs& knobs, const SuiteKnobs& suite_knobs, const PairInput& pair_input,
              int scene_index, const std::vector<std::string>& pixel_text, const std::string& plot,
              std::ostream& out) {
  MatcherConfig m;
  SamplerConfig s;
  knobs.apply(m, s);
  s.keep_snapshots = true;

  ImagePair pair;
  std::optional<DisparityMap> gt;
  std::string source;
  if (!pair_input.left.empty() || !pair_input.right.empty()) {
    if (pair_input.left.empty() || pair_input.right.empty()) {
      throw UsageError("probe-entropy needs both --left and --right");
    }
    validate_configs(m, s);
    pair = read_pair(pair_input);
    gt = read_ground_truth(pair_input.ground_truth, pair.left);
    source = pair_input.left;
  } else {
    SuiteSpec suite;
    suite_knobs.apply(suite);
    sync_max_disparity(knobs, m, suite);
    validate_configs(m, s);
    std::vector<SceneSpec> scenes;
    try {
      scenes = default_suite(suite);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (scene_index < 0 || scene_index >= static_cast<int>(scenes.size())) {
      throw UsageError(printf_string("--scene %d outside the suite of %zu scenes", scene_index,
                                     scenes.size()));
    }
    const Stereogram st = gen_stereogram(scenes[scene_index]);
    pair = st.pair;
    gt = st.disparity;
    source = printf_string("suite scene %d", scene_index);
  }

  std::vector<std::pair<int, int>> pixels;
  for (const auto& p : pixel_text) pixels.push_back(parse_pixel(p));
  if (pixels.empty()) pixels.emplace_back(pair.left.width / 2, pair.left.height / 2);
  for (const auto& [x, y] : pixels) {
    if (x < 0 || y < 0 || x >= pair.left.width || y >= pair.left.height) {
      throw UsageError(printf_string("pixel %d,%d lies outside the %dx%d image", x, y,
                                     pair.left.width, pair.left.height));
    }
  }

  const SceneResult result = run_scene(pair, std::nullopt, m, s);
  const SamplerOutput& trace = result.sampler;
  out << printf_string("# probe-entropy: %s, levels=%d, steps=%d\n", source.c_str(),
                       m.levels(), s.steps);
  for (std::size_t k = 0; k < trace.timesteps.size(); ++k) {
    out << printf_string("mean_entropy step=%zu t=%d value=%.6f\n", k + 1, trace.timesteps[k],
                         trace.mean_entropy[k]);
  }

  std::vector<std::vector<std::vector<double>>> hist;
  for (const auto& [x, y] : pixels) {
    const int lx = x / m.downsample;
    const int ly = y / m.downsample;
    std::string gt_text = "none";
    if (gt && gt->valid(x, y)) gt_text = printf_string("%.6f", gt->at(x, y));
    out << printf_string("pixel x=%d y=%d gt=%s baseline=%.6f final=%.6f\n", x, y, gt_text.c_str(),
                         result.baseline.at(x, y), result.diffuvolume.at(x, y));
    auto& rows = hist.emplace_back();
    for (std::size_t k = 0; k < trace.snapshots.size(); ++k) {
      const ProbabilityVolume dist = to_distribution(rescale_unit(trace.snapshots[k]));
      std::vector<double> column = dist.column(lx, ly);
      const double h = column_entropy(column);
      const auto peak = std::max_element(column.begin(), column.end()) - column.begin();
      std::string values;
      for (std::size_t i = 0; i < column.size(); ++i) {
        values += printf_string(i ? ",%.6f" : "%.6f", column[i]);
      }
      out << printf_string("step=%zu t=%d entropy=%.6f argmax=%td pred=%.6f p=%s\n", k + 1,
                           trace.timesteps[k], h, peak,
                           trace.predictions[k].at(lx, ly), values.c_str());
      rows.push_back(std::move(column));
    }
  }
  if (!plot.empty()) write_histogram_plot(plot, hist, m.levels());
  return kExitOk;
}

int cmd_gen(const SuiteKnobs& suite_knobs, int max_disp, bool max_disp_given,
            const std::string& dir_text, const std::string& format, std::ostream& out) {
  SuiteSpec suite;
  suite_knobs.apply(suite);
  if (max_disp_given) suite.max_disparity = max_disp;
  std::vector<SceneSpec> scenes;
  try {
    scenes = default_suite(suite);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const fs::path dir(dir_text);
  prepare_dir(dir);
  write_text(dir / "suite.json", to_json(suite));
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const fs::path sd = dir / printf_string("scene_%02zu", i);
    prepare_dir(sd);
    const Stereogram st = gen_stereogram(scenes[i]);
    if (format == "pgm") {
      write_pgm((sd / "left.pgm").string(), st.pair.left, 16);
      write_pgm((sd / "right.pgm").string(), st.pair.right, 16);
    } else {
      write_pfm((sd / "left.pfm").string(), st.pair.left);
      write_pfm((sd / "right.pfm").string(), st.pair.right);
    }
    write_pfm((sd / "disparity.pfm").string(), to_image(st.disparity));
    write_text(sd / "scene.json", to_json(scenes[i]));
  }
  out << printf_string("wrote %zu scenes to %s\n", scenes.size(), dir.string().c_str());
  return kExitOk;
}

}  // namespace

int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diffusion-filtered cost volumes for stereo matching", "diffuvolume"};
  app.require_subcommand(1);

  int threads = 0;
  const auto add_threads = [&](CLI::App* sub) {
    sub->add_option("--threads", threads, "Worker threads for suite runs (0 = all cores)");
  };

  Knobs demo_knobs;
  SuiteKnobs demo_suite;
  std::string demo_report;
  CLI::App* demo = app.add_subcommand("demo", "Run the synthetic suite and compare against the baseline");
  demo_knobs.add(demo);
  demo_suite.add(demo);
  add_threads(demo);
  demo->add_option("--report", demo_report, "Also write the table to this file");

  Knobs run_knobs;
  SuiteKnobs run_suite_knobs;
  std::string config_path, out_dir;
  PairInput run_pair;
  std::string run_gt;
  bool use_suite = false, no_image = false, no_entropy = false, no_report = false, snapshots = false;
  CLI::App* run = app.add_subcommand("run", "Run on an image pair or a synthetic suite and write artifacts");
  run->add_option("--config", config_path, "JSON run configuration");
  run_knobs.add(run);
  run_suite_knobs.add(run);
  add_threads(run);
  CLI::Option* left_opt = run->add_option("--left", run_pair.left, "Left image (.pgm, .png, .pfm)");
  CLI::Option* right_opt = run->add_option("--right", run_pair.right, "Right image");
  CLI::Option* gt_opt = run->add_option("--gt", run_gt, "Ground-truth disparity (.pfm)");
  CLI::Option* suite_opt = run->add_flag("--suite", use_suite, "Use the synthetic suite as input");
  CLI::Option* out_opt = run->add_option("--out", out_dir, "Output directory");
  run->add_flag("--no-image", no_image, "Skip colormapped disparity PNGs");
  run->add_flag("--no-entropy", no_entropy, "Skip the entropy trace");
  run->add_flag("--no-report", no_report, "Skip metric reports");
  run->add_flag("--snapshots", snapshots, "Write per-step filter volumes");

  std::string eval_pred, eval_gt, eval_format = "kv";
  int eval_margin = 0;
  CLI::App* eval = app.add_subcommand("eval", "Metrics between a predicted and a ground-truth PFM");
  eval->add_option("pred", eval_pred, "Predicted disparity (.pfm)")->required();
  eval->add_option("gt", eval_gt, "Ground-truth disparity (.pfm, inf marks invalid)")->required();
  eval->add_option("--format", eval_format, "kv or json")->check(CLI::IsMember({"kv", "json"}));
  eval->add_option("--margin", eval_margin, "Ignore a frame of this many pixels")
      ->check(CLI::NonNegativeNumber);

  Knobs probe_knobs;
  SuiteKnobs probe_suite;
  PairInput probe_pair;
  std::string probe_gt, probe_plot;
  int probe_scene = 0;
  std::vector<std::string> probe_pixels;
  CLI::App* probe = app.add_subcommand("probe-entropy", "Per-step filter histograms and entropy at pixels");
  probe_knobs.add(probe);
  probe_suite.add(probe);
  probe->add_option("--scene", probe_scene, "Suite scene index");
  probe->add_option("--left", probe_pair.left, "Left image instead of a suite scene");
  probe->add_option("--right", probe_pair.right, "Right image");
  CLI::Option* probe_gt_opt = probe->add_option("--gt", probe_gt, "Ground-truth disparity (.pfm)");
  probe->add_option("--pixel", probe_pixels, "Pixel x,y (repeatable; default image centre)");
  probe->add_option("--plot", probe_plot, "Write the histograms as a PNG");

  SuiteKnobs gen_suite;
  std::string gen_out, gen_format = "pfm";
  int gen_max_disp = 0;
  CLI::App* gen = app.add_subcommand("gen", "Write a synthetic suite to disk");
  gen_suite.add(gen);
  CLI::Option* gen_max_opt = gen->add_option("--max-disp", gen_max_disp, "Maximum disparity");
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--format", gen_format, "Image format pfm or pgm")
      ->check(CLI::IsMember({"pfm", "pgm"}));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help(app.get_name()));
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\nrun with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (demo->parsed()) return cmd_demo(demo_knobs, demo_suite, threads, demo_report, out);
    if (run->parsed()) {
      RunConfig config;
      if (!config_path.empty()) config = load_run_config(config_path);
      MatcherConfig& m = config.matcher;
      SamplerConfig& s = config.sampler;
      run_knobs.apply(m, s);
      if (left_opt->count() || right_opt->count() || gt_opt->count()) {
        PairInput pair = config.pair.value_or(PairInput{});
        if (left_opt->count()) pair.left = run_pair.left;
        if (right_opt->count()) pair.right = run_pair.right;
        if (gt_opt->count()) pair.ground_truth = run_gt;
        config.pair = pair;
      }
      if (suite_opt->count() || (!config.pair && !config.suite)) {
        SuiteSpec suite = config.suite.value_or(SuiteSpec{});
        run_suite_knobs.apply(suite);
        if (!config.suite) sync_max_disparity(run_knobs, m, suite);
        config.suite = suite;
      } else if (config.suite) {
        run_suite_knobs.apply(*config.suite);
      }
      if (out_opt->count()) config.output_dir = out_dir;
      if (threads) config.threads = threads;
      if (no_image) config.emit.disparity_image = false;
      if (no_entropy) config.emit.entropy_trace = false;
      if (no_report) config.emit.metric_report = false;
      if (snapshots) config.emit.snapshots = true;
      return cmd_run(config, out);
    }
    if (eval->parsed()) return cmd_eval(eval_pred, eval_gt, eval_format, eval_margin, out);
    if (probe->parsed()) {
      if (probe_gt_opt->count()) probe_pair.ground_truth = probe_gt;
      return cmd_probe(probe_knobs, probe_suite, probe_pair, probe_scene, probe_pixels, probe_plot,
                       out);
    }
    if (gen->parsed()) {
      return cmd_gen(gen_suite, gen_max_disp, gen_max_opt->count() > 0, gen_out, gen_format, out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  err << "error: no subcommand\n";
  return kExitUsage;
}

}  // namespace diffuvolume
