#include "tubeflock/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "tubeflock/errors.hpp"
#include "tubeflock/json_io.hpp"

namespace tubeflock {

namespace {

using nlohmann::json;

bool same_kind(const json& expected, const json& given) {
  if (expected.is_null()) return given.is_null() || given.is_number_unsigned();
  if (expected.is_number()) return given.is_number();
  if (expected.is_boolean()) return given.is_boolean();
  if (expected.is_string()) return given.is_string();
  if (expected.is_array()) return given.is_array();
  return false;
}

void set_key(json& doc, const std::string& section, const std::string& key, const json& value,
             const std::string& origin) {
  const json defaults = default_config_json();
  if (!defaults.contains(section)) throw InvalidParameter(origin + ": unknown section '" + section + "'");
  if (!defaults[section].contains(key)) {
    throw InvalidParameter(origin + ": unknown key '" + section + "." + key + "'");
  }
  if (!same_kind(defaults[section][key], value)) {
    throw InvalidParameter(origin + ": wrong type for '" + section + "." + key + "': " + value.dump());
  }
  doc[section][key] = value;
}

void merge_document(json& doc, const json& input, const std::string& origin) {
  if (!input.is_object()) throw InvalidParameter(origin + ": top level must be an object");
  for (const auto& [section, body] : input.items()) {
    if (!doc.contains(section)) throw InvalidParameter(origin + ": unknown section '" + section + "'");
    if (!body.is_object()) {
      throw InvalidParameter(origin + ": section '" + section + "' must be an object");
    }
    for (const auto& [key, value] : body.items()) set_key(doc, section, key, value, origin);
  }
}

template <typename T>
T get(const json& doc, const char* section, const char* key) {
  try {
    return doc.at(section).at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidParameter(std::string(section) + "." + key + ": " + e.what());
  }
}

RunConfig typed(const json& doc) {
  RunConfig rc;
  auto& geo = rc.params.geometry;
  geo.axis = vec3_from_json(doc["geometry"]["axis"]);
  geo.radius = get<double>(doc, "geometry", "L");
  geo.wall_onset = get<double>(doc, "geometry", "h");
  geo.wall_exponent = get<double>(doc, "geometry", "gamma");
  geo.wall_amplitude = get<double>(doc, "geometry", "theta0");

  auto& ker = rc.params.kernel;
  ker.family = kernel_family_from_name(get<std::string>(doc, "kernel", "family"));
  ker.amplitude = get<double>(doc, "kernel", "K0");
  ker.exponent = get<double>(doc, "kernel", "beta");
  ker.support = get<double>(doc, "kernel", "rbar");

  auto& pot = rc.params.potential;
  pot.amplitude = get<double>(doc, "potential", "a");
  pot.exponent = get<double>(doc, "potential", "b");
  pot.support = ker.support;
  pot.taper_start = get<double>(doc, "potential", "s0");
  pot.core_value = get<double>(doc, "potential", "u0");

  auto& ic = rc.integrator;
  ic.rtol = get<double>(doc, "integrator", "rtol");
  ic.atol = get<double>(doc, "integrator", "atol");
  ic.initial_step = get<double>(doc, "integrator", "initial_step");
  ic.max_step = get<double>(doc, "integrator", "max_step");
  ic.eta = get<double>(doc, "integrator", "eta");
  const double max_steps = get<double>(doc, "integrator", "max_steps");
  if (!(max_steps >= 1.0)) throw InvalidParameter("integrator.max_steps must be >= 1");
  ic.max_steps = static_cast<std::size_t>(max_steps);

  auto& s = rc.sampler;
  s.seed = get<std::uint64_t>(doc, "sampler", "seed");
  s.density = get<double>(doc, "sampler", "rho");
  s.velocity_scale = get<double>(doc, "sampler", "sigma");
  s.half_span = 0.5 * get<double>(doc, "sampler", "span");
  s.min_separation = get<double>(doc, "sampler", "dmin");
  s.log_growth = get<bool>(doc, "sampler", "loggrowth");
  s.transverse_cap = get<double>(doc, "sampler", "c");
  if (!doc["sampler"]["count"].is_null()) s.count = get<std::size_t>(doc, "sampler", "count");

  auto& st = rc.study;
  st.nladder = get<std::vector<int>>(doc, "study", "nladder");
  st.k = get<double>(doc, "study", "k");
  st.T = get<double>(doc, "study", "T");
  st.stride = get<double>(doc, "study", "stride");
  st.bound_factor = get<double>(doc, "study", "bound_factor");

  auto& fl = rc.flock;
  const double n = get<double>(doc, "flock", "N");
  if (!(n >= 2.0) || n != static_cast<double>(static_cast<std::size_t>(n))) {
    throw InvalidParameter("flock.N must be an integer >= 2");
  }
  fl.N = static_cast<std::size_t>(n);
  fl.beta = get<double>(doc, "flock", "beta");
  fl.lambda = get<double>(doc, "flock", "lambda");
  fl.T = get<double>(doc, "flock", "T");
  fl.stride = get<double>(doc, "flock", "stride");
  fl.sigma_x = get<double>(doc, "flock", "sigma_x");
  fl.sigma_v = get<double>(doc, "flock", "sigma_v");
  fl.v_tol = get<double>(doc, "flock", "v_tol");
  fl.x_bound = get<double>(doc, "flock", "x_bound");

  rc.output.dir = get<std::string>(doc, "output", "dir");
  rc.output.formats = get<std::vector<std::string>>(doc, "output", "formats");
  rc.init_snapshot = get<std::string>(doc, "input", "snapshot");
  return rc;
}

void validate(const RunConfig& rc) {
  rc.params.validate();
  rc.integrator.validate();
  rc.sampler.validate(rc.params.geometry);
  const auto& st = rc.study;
  if (st.nladder.empty()) throw InvalidParameter("study.nladder must not be empty");
  for (std::size_t j = 0; j < st.nladder.size(); ++j) {
    if (st.nladder[j] < 1 || (j > 0 && st.nladder[j] <= st.nladder[j - 1])) {
      throw InvalidParameter("study.nladder must be positive and strictly increasing");
    }
  }
  if (!(st.k >= 0.0)) throw InvalidParameter("study.k must be non-negative");
  if (!(st.T >= 0.0)) throw InvalidParameter("study.T must be non-negative");
  if (!(st.stride > 0.0)) throw InvalidParameter("study.stride must be positive");
  if (!(st.bound_factor >= 1.0)) throw InvalidParameter("study.bound_factor must be >= 1");
  const auto& fl = rc.flock;
  if (!(fl.beta > 0.0)) throw InvalidParameter("flock.beta must be positive");
  if (!(fl.lambda >= 0.0)) throw InvalidParameter("flock.lambda must be non-negative");
  if (!(fl.T >= 0.0) || !(fl.stride > 0.0)) throw InvalidParameter("flock.T and flock.stride must be valid");
  if (!(fl.sigma_x >= 0.0) || !(fl.sigma_v >= 0.0)) throw InvalidParameter("flock sigmas must be non-negative");
  if (!(fl.v_tol >= 0.0) || !(fl.x_bound > 0.0)) throw InvalidParameter("flock thresholds must be valid");
  static const std::vector<std::string> known{"csv", "json", "jsonl"};
  for (const auto& f : rc.output.formats) {
    if (std::find(known.begin(), known.end(), f) == known.end()) {
      throw InvalidParameter("output.formats: unknown format '" + f + "'");
    }
  }
  if (rc.output.dir.empty()) throw InvalidParameter("output.dir must not be empty");
}

}  // namespace

bool OutputConfig::wants(const std::string& format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

json default_config_json() {
  const ModelParams p;
  const IntegratorConfig ic;
  const SamplerSpec s;
  const StudyConfig st;
  const FlockConfig fl;
  const OutputConfig out;
  json doc;
  doc["geometry"] = to_json(p.geometry);
  doc["kernel"] = to_json(p.kernel);
  doc["potential"] = {{"a", p.potential.amplitude},
                      {"b", p.potential.exponent},
                      {"s0", p.potential.taper_start},
                      {"u0", p.potential.core_value}};
  doc["integrator"] = {{"rtol", ic.rtol},
                       {"atol", ic.atol},
                       {"initial_step", ic.initial_step},
                       {"max_step", ic.max_step},
                       {"eta", ic.eta},
                       {"max_steps", ic.max_steps}};
  doc["sampler"] = {{"seed", s.seed},
                    {"rho", s.density},
                    {"sigma", s.velocity_scale},
                    {"span", 2.0 * s.half_span},
                    {"dmin", s.min_separation},
                    {"loggrowth", s.log_growth},
                    {"c", s.transverse_cap},
                    {"count", nullptr}};
  doc["study"] = {
      {"nladder", st.nladder}, {"k", st.k}, {"T", st.T}, {"stride", st.stride}, {"bound_factor", st.bound_factor}};
  doc["flock"] = {{"N", fl.N},           {"beta", fl.beta},       {"lambda", fl.lambda},
                  {"T", fl.T},           {"stride", fl.stride},   {"sigma_x", fl.sigma_x},
                  {"sigma_v", fl.sigma_v}, {"v_tol", fl.v_tol},   {"x_bound", fl.x_bound}};
  doc["output"] = {{"dir", out.dir}, {"formats", out.formats}};
  doc["input"] = {{"snapshot", ""}};
  return doc;
}

std::pair<std::string, json> parse_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw InvalidParameter("--set expects key=value, got '" + assignment + "'");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  return {key, value};
}

RunConfig resolve_config(const json& document, const std::vector<std::string>& overrides,
                         const std::optional<std::string>& env_seed) {
  json doc = default_config_json();
  const bool is_manifest = document.is_object() && document.contains("manifest_version");
  merge_document(doc, is_manifest ? document.at("config") : document, "config");

  SeedSource source = SeedSource::File;
  if (env_seed) {
    std::uint64_t seed = 0;
    std::istringstream in(*env_seed);
    if (!(in >> seed) || !in.eof()) throw InvalidParameter("TUBEFLOCK_SEED must be an unsigned integer");
    doc["sampler"]["seed"] = seed;
    source = SeedSource::Env;
  }
  for (const auto& assignment : overrides) {
    const auto [key, value] = parse_override(assignment);
    const auto dot = key.find('.');
    if (dot == std::string::npos) throw InvalidParameter("--set key must be section.key, got '" + key + "'");
    set_key(doc, key.substr(0, dot), key.substr(dot + 1), value, "--set");
    if (key == "sampler.seed") source = SeedSource::Flag;
  }

  RunConfig rc = typed(doc);
  validate(rc);
  rc.seed_source = source;
  rc.resolved = std::move(doc);
  return rc;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides,
                      const std::optional<std::string>& env_seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidParameter("cannot open config file '" + path.string() + "'");
  json document;
  try {
    document = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
  return resolve_config(document, overrides, env_seed);
}

std::string seed_source_name(SeedSource s) {
  switch (s) {
    case SeedSource::File:
      return "file";
    case SeedSource::Env:
      return "env";
    case SeedSource::Flag:
      return "flag";
  }
  return "file";
}

}  // namespace tubeflock
