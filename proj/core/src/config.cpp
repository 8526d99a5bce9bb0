#include "diffuvolume/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace diffuvolume {
namespace {

using Json = nlohmann::ordered_json;

// Pulls typed fields out of one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const Json& object, std::string where) : object_(object), where_(std::move(where)) {
    if (!object_.is_object()) throw ConfigError(where_ + ": expected a JSON object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = object_.find(key);
    if (it == object_.end()) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw ConfigError("expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) throw ConfigError("expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (it->is_number_integer() && !it->is_number_unsigned()) {
            throw ConfigError("expected a non-negative integer");
          }
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw ConfigError("expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) throw ConfigError("expected a string");
      }
      out = it->template get<T>();
    } catch (const ConfigError& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  const Json* child(const char* key) {
    seen_.insert(key);
    const auto it = object_.find(key);
    if (it == object_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  std::string path(const char* key) const { return where_ + "." + key; }

  void finish() const {
    for (const auto& item : object_.items()) {
      if (!seen_.count(item.key())) throw ConfigError(where_ + ": unknown key '" + item.key() + "'");
    }
  }

 private:
  const Json& object_;
  std::string where_;
  std::set<std::string> seen_;
};

Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

const char* model_name(DisparityModel model) {
  return model == DisparityModel::kConstant ? "constant" : "planar";
}

DisparityModel parse_model(const std::string& name) {
  if (name == "constant") return DisparityModel::kConstant;
  if (name == "planar") return DisparityModel::kPiecewisePlanar;
  throw ConfigError("unknown disparity model '" + name + "' (expected constant or planar)");
}

Json matcher_json(const MatcherConfig& c) {
  Json j;
  j["max_disparity"] = c.max_disparity;
  j["downsample"] = c.downsample;
  j["census_radius"] = c.census_radius;
  j["groups"] = c.groups;
  j["aggregation_radius"] = c.aggregation_radius;
  j["temperature"] = c.temperature;
  j["concat_weight"] = c.concat_weight;
  j["normalize_features"] = c.normalize_features;
  return j;
}

MatcherConfig read_matcher(const Json& j, const std::string& where) {
  MatcherConfig c;
  ObjectReader r(j, where);
  r.get("max_disparity", c.max_disparity);
  r.get("downsample", c.downsample);
  r.get("census_radius", c.census_radius);
  r.get("groups", c.groups);
  r.get("aggregation_radius", c.aggregation_radius);
  r.get("temperature", c.temperature);
  r.get("concat_weight", c.concat_weight);
  r.get("normalize_features", c.normalize_features);
  r.finish();
  return c;
}

Json sampler_json(const SamplerConfig& c) {
  Json j;
  j["timesteps"] = c.timesteps;
  j["steps"] = c.steps;
  j["eta"] = c.eta;
  j["weights"] = c.weights;
  j["seed"] = c.seed;
  j["embedding"] = to_string(c.embedding);
  j["keep_snapshots"] = c.keep_snapshots;
  Json renewal;
  renewal["enabled"] = c.renewal.enabled;
  renewal["disparity_threshold"] = c.renewal.disparity_threshold;
  if (c.renewal.uncertainty_threshold) {
    renewal["uncertainty_threshold"] = *c.renewal.uncertainty_threshold;
  } else {
    renewal["uncertainty_threshold"] = nullptr;
  }
  j["renewal"] = renewal;
  return j;
}

SamplerConfig read_sampler(const Json& j, const std::string& where) {
  SamplerConfig c;
  ObjectReader r(j, where);
  r.get("timesteps", c.timesteps);
  r.get("steps", c.steps);
  r.get("eta", c.eta);
  r.get("seed", c.seed);
  r.get("keep_snapshots", c.keep_snapshots);
  if (const Json* w = r.child("weights")) {
    if (!w->is_array()) throw ConfigError(r.path("weights") + ": expected an array of numbers");
    for (const auto& v : *w) {
      if (!v.is_number()) throw ConfigError(r.path("weights") + ": expected an array of numbers");
      c.weights.push_back(v.get<double>());
    }
  }
  std::string embedding = to_string(c.embedding);
  r.get("embedding", embedding);
  try {
    c.embedding = parse_embedding_mode(embedding);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(r.path("embedding") + ": " + e.what());
  }
  if (const Json* renewal = r.child("renewal")) {
    ObjectReader rr(*renewal, r.path("renewal"));
    rr.get("enabled", c.renewal.enabled);
    rr.get("disparity_threshold", c.renewal.disparity_threshold);
    if (rr.child("uncertainty_threshold")) {
      double u = 0.0;
      rr.get("uncertainty_threshold", u);
      c.renewal.uncertainty_threshold = u;
    }
    rr.finish();
  }
  r.finish();
  return c;
}

Json scene_json(const SceneSpec& s) {
  Json j;
  j["width"] = s.width;
  j["height"] = s.height;
  j["max_disparity"] = s.max_disparity;
  j["model"] = model_name(s.model);
  j["constant_disparity"] = s.constant_disparity;
  Json regions = Json::array();
  for (const auto& p : s.regions) {
    Json rj;
    rj["x0"] = p.x0;
    rj["y0"] = p.y0;
    rj["x1"] = p.x1;
    rj["y1"] = p.y1;
    rj["a"] = p.a;
    rj["b"] = p.b;
    rj["c"] = p.c;
    regions.push_back(rj);
  }
  j["regions"] = regions;
  j["texture_density"] = s.texture_density;
  j["noise_sigma"] = s.noise_sigma;
  j["seed"] = s.seed;
  return j;
}

SceneSpec read_scene(const Json& j, const std::string& where) {
  SceneSpec s;
  ObjectReader r(j, where);
  r.get("width", s.width);
  r.get("height", s.height);
  r.get("max_disparity", s.max_disparity);
  std::string model = model_name(s.model);
  r.get("model", model);
  s.model = parse_model(model);
  r.get("constant_disparity", s.constant_disparity);
  if (const Json* regions = r.child("regions")) {
    if (!regions->is_array()) throw ConfigError(r.path("regions") + ": expected an array");
    for (std::size_t i = 0; i < regions->size(); ++i) {
      PlanarRegion p;
      ObjectReader rr((*regions)[i], r.path("regions") + "[" + std::to_string(i) + "]");
      rr.get("x0", p.x0);
      rr.get("y0", p.y0);
      rr.get("x1", p.x1);
      rr.get("y1", p.y1);
      rr.get("a", p.a);
      rr.get("b", p.b);
      rr.get("c", p.c);
      rr.finish();
      s.regions.push_back(p);
    }
  }
  r.get("texture_density", s.texture_density);
  r.get("noise_sigma", s.noise_sigma);
  r.get("seed", s.seed);
  r.finish();
  return s;
}

Json suite_json(const SuiteSpec& s) {
  Json j;
  j["count"] = s.count;
  j["width"] = s.width;
  j["height"] = s.height;
  j["max_disparity"] = s.max_disparity;
  j["densities"] = s.densities;
  j["noise_sigma"] = s.noise_sigma;
  j["seed"] = s.seed;
  return j;
}

SuiteSpec read_suite(const Json& j, const std::string& where) {
  SuiteSpec s;
  ObjectReader r(j, where);
  r.get("count", s.count);
  r.get("width", s.width);
  r.get("height", s.height);
  r.get("max_disparity", s.max_disparity);
  if (const Json* d = r.child("densities")) {
    if (!d->is_array()) throw ConfigError(r.path("densities") + ": expected an array of numbers");
    s.densities.clear();
    for (const auto& v : *d) {
      if (!v.is_number()) throw ConfigError(r.path("densities") + ": expected an array of numbers");
      s.densities.push_back(v.get<double>());
    }
  }
  r.get("noise_sigma", s.noise_sigma);
  r.get("seed", s.seed);
  r.finish();
  return s;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace

void RunConfig::validate() const {
  if (pair.has_value() == suite.has_value()) {
    throw ConfigError("run config: exactly one input source (pair or suite) is required");
  }
  if (pair && (pair->left.empty() || pair->right.empty())) {
    throw ConfigError("run config: pair input needs both left and right paths");
  }
  if (suite && (suite->count < 1 || suite->densities.empty())) {
    throw ConfigError("run config: suite needs count >= 1 and at least one density");
  }
  if (output_dir.empty()) throw ConfigError("run config: output_dir must not be empty");
  if (threads < 0) throw ConfigError("run config: threads must be >= 0");
  try {
    matcher.validate();
    sampler.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
}

std::string to_json(const MatcherConfig& config) { return dump(matcher_json(config)); }
std::string to_json(const SamplerConfig& config) { return dump(sampler_json(config)); }
std::string to_json(const SceneSpec& spec) { return dump(scene_json(spec)); }
std::string to_json(const SuiteSpec& spec) { return dump(suite_json(spec)); }

std::string to_json(const RunConfig& config) {
  Json j;
  j["matcher"] = matcher_json(config.matcher);
  j["sampler"] = sampler_json(config.sampler);
  if (config.pair) {
    Json p;
    p["left"] = config.pair->left;
    p["right"] = config.pair->right;
    if (config.pair->ground_truth) p["ground_truth"] = *config.pair->ground_truth;
    j["pair"] = p;
  }
  if (config.suite) j["suite"] = suite_json(*config.suite);
  j["output_dir"] = config.output_dir;
  Json emit;
  emit["disparity_image"] = config.emit.disparity_image;
  emit["entropy_trace"] = config.emit.entropy_trace;
  emit["metric_report"] = config.emit.metric_report;
  emit["snapshots"] = config.emit.snapshots;
  j["emit"] = emit;
  j["threads"] = config.threads;
  return dump(j);
}

MatcherConfig matcher_config_from_json(const std::string& text) {
  return read_matcher(parse(text), "matcher");
}

SamplerConfig sampler_config_from_json(const std::string& text) {
  return read_sampler(parse(text), "sampler");
}

SceneSpec scene_spec_from_json(const std::string& text) { return read_scene(parse(text), "scene"); }

SuiteSpec suite_spec_from_json(const std::string& text) { return read_suite(parse(text), "suite"); }

RunConfig run_config_from_json(const std::string& text) {
  const Json j = parse(text);
  RunConfig c;
  ObjectReader r(j, "config");
  if (const Json* m = r.child("matcher")) c.matcher = read_matcher(*m, "config.matcher");
  if (const Json* s = r.child("sampler")) c.sampler = read_sampler(*s, "config.sampler");
  if (const Json* p = r.child("pair")) {
    PairInput pair;
    ObjectReader pr(*p, "config.pair");
    pr.get("left", pair.left);
    pr.get("right", pair.right);
    if (pr.child("ground_truth")) {
      std::string gt;
      pr.get("ground_truth", gt);
      pair.ground_truth = gt;
    }
    pr.finish();
    c.pair = pair;
  }
  if (const Json* s = r.child("suite")) c.suite = read_suite(*s, "config.suite");
  r.get("output_dir", c.output_dir);
  if (const Json* e = r.child("emit")) {
    ObjectReader er(*e, "config.emit");
    er.get("disparity_image", c.emit.disparity_image);
    er.get("entropy_trace", c.emit.entropy_trace);
    er.get("metric_report", c.emit.metric_report);
    er.get("snapshots", c.emit.snapshots);
    er.finish();
  }
  r.get("threads", c.threads);
  r.finish();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return run_config_from_json(text.str());
}

}  // namespace diffuvolume
