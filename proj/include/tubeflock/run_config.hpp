#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tubeflock/initial_data.hpp"
#include "tubeflock/integrator.hpp"
#include "tubeflock/model.hpp"

namespace tubeflock {

struct StudyConfig {
  std::vector<int> nladder{40, 80, 160};
  double k = 10.0;
  double T = 1.0;
  double stride = 0.05;
  double bound_factor = 10.0;  // bounds-check spread limit
};

struct FlockConfig {
  std::size_t N = 50;
  double beta = 0.25;
  double lambda = 1.0;
  double T = 50.0;
  double stride = 1.0;
  double sigma_x = 1.0;
  double sigma_v = 1.0;
  double v_tol = 1e-3;  // velocity threshold relative to the initial diameter
  double x_bound = 50.0;
};

struct OutputConfig {
  std::string dir = "out";
  std::vector<std::string> formats{"csv", "json", "jsonl"};

  bool wants(const std::string& format) const;
};

/// Where the sampler seed came from.
enum class SeedSource { File, Env, Flag };

struct RunConfig {
  ModelParams params;
  IntegratorConfig integrator;
  SamplerSpec sampler;
  StudyConfig study;
  FlockConfig flock;
  OutputConfig output;
  std::string init_snapshot;  // input.snapshot; empty means sample
  SeedSource seed_source = SeedSource::File;
  nlohmann::json resolved;  // every key, defaults filled in
};

/// All keys with their default values.
nlohmann::json default_config_json();

/// Parses "section.key=value". The value is read as JSON when it parses,
/// otherwise as a string.
std::pair<std::string, nlohmann::json> parse_override(const std::string& assignment);

/// Layers, lowest precedence first: defaults, the document, TUBEFLOCK_SEED
/// (when `env_seed` is set), then the overrides. A manifest document is
/// accepted in place of a config. Throws InvalidParameter or ParseError.
RunConfig resolve_config(const nlohmann::json& document, const std::vector<std::string>& overrides,
                         const std::optional<std::string>& env_seed);

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides,
                      const std::optional<std::string>& env_seed);

std::string seed_source_name(SeedSource s);

}  // namespace tubeflock
