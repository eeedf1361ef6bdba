#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypercp/engine.hpp"

namespace hypercp {

/// A whole experiment: the base run plus the sweep dimensions and outputs.
struct ExperimentSpec {
  RunConfig base;
  std::vector<double> periods{1.0};
  int replications = 20;
  bool run_ideal = true;
  bool run_estimated = true;
  std::string out_dir = "results";
  bool trace = false;
  int threads = 0;  ///< 0 = hardware concurrency
  std::string preset;
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(std::vector<std::string> violations);
  std::vector<std::string> violations;
};

/// Applies a flat sectioned key=value config file on top of spec.
/// Unknown sections or keys and malformed values throw ConfigError naming
/// the offender. Lines starting with '#' or ';' are comments.
void apply_config_file(ExperimentSpec& spec, const std::string& path);

/// Parses config text (same format as apply_config_file).
void apply_config_text(ExperimentSpec& spec, const std::string& text,
                       const std::string& origin = "<config>");

/// Known presets: "paper-fig4-7" (the full sweep over sensing periods
/// 0.01..5 s, both knowledge variants). Throws ConfigError otherwise.
void apply_preset(ExperimentSpec& spec, const std::string& name);

/// All consistency violations, empty when the spec is runnable.
std::vector<std::string> validate_spec(const ExperimentSpec& spec);

/// Renders the fully resolved configuration in the accepted file format;
/// feeding the output back reproduces the same spec.
std::string render_effective_config(const ExperimentSpec& spec);

/// FNV-1a hash of the rendered effective config, for run manifests.
std::uint64_t config_hash(const ExperimentSpec& spec);

std::vector<Variant> spec_variants(const ExperimentSpec& spec);

}  // namespace hypercp
