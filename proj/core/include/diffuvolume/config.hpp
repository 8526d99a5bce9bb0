#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "diffuvolume/datagen.hpp"
#include "diffuvolume/matcher.hpp"
#include "diffuvolume/sampler.hpp"

namespace diffuvolume {

/// Invalid or inconsistent configuration text.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Left/right intensity images (.pgm, .png or .pfm) with optional PFM ground truth.
struct PairInput {
  std::string left;
  std::string right;
  std::optional<std::string> ground_truth;

  friend bool operator==(const PairInput&, const PairInput&) = default;
};

struct EmitFlags {
  bool disparity_image = true;
  bool entropy_trace = true;
  bool metric_report = true;
  bool snapshots = false;

  friend bool operator==(const EmitFlags&, const EmitFlags&) = default;
};

struct RunConfig {
  MatcherConfig matcher;
  SamplerConfig sampler;
  std::optional<PairInput> pair;
  std::optional<SuiteSpec> suite;
  std::string output_dir = "out";
  EmitFlags emit;
  /// Worker threads for suite runs; 0 uses the hardware concurrency.
  int threads = 0;

  /// Exactly one input source, plus matcher and sampler validation.
  /// Throws ConfigError.
  void validate() const;
};

/// JSON text for each configuration block. Parsers reject unknown keys and
/// wrong value types with ConfigError; missing keys keep their defaults.
std::string to_json(const MatcherConfig& config);
std::string to_json(const SamplerConfig& config);
std::string to_json(const SceneSpec& spec);
std::string to_json(const SuiteSpec& spec);
std::string to_json(const RunConfig& config);

MatcherConfig matcher_config_from_json(const std::string& text);
SamplerConfig sampler_config_from_json(const std::string& text);
SceneSpec scene_spec_from_json(const std::string& text);
SuiteSpec suite_spec_from_json(const std::string& text);
RunConfig run_config_from_json(const std::string& text);

/// Reads and parses a RunConfig file. Throws ConfigError on I/O failure too.
RunConfig load_run_config(const std::string& path);

}  // namespace diffuvolume
