#include "tubeflock/json_io.hpp"

#include <cstdint>
#include <cstdio>

#include "tubeflock/errors.hpp"

namespace tubeflock {

using nlohmann::json;

json to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw InvalidParameter("expected a 3-vector");
  for (const auto& c : j) {
    if (!c.is_number()) throw InvalidParameter("expected a numeric 3-vector");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json to_json(const TubeGeometry& g) {
  return {{"axis", to_json(g.axis)},
          {"L", g.radius},
          {"h", g.wall_onset},
          {"gamma", g.wall_exponent},
          {"theta0", g.wall_amplitude}};
}

json to_json(const CommKernel& k) {
  return {{"family", std::string(kernel_family_name(k.family))},
          {"K0", k.amplitude},
          {"beta", k.exponent},
          {"rbar", k.support}};
}

json to_json(const PairPotential& p) {
  return {{"a", p.amplitude}, {"b", p.exponent}, {"rbar", p.support}, {"s0", p.taper_start}, {"u0", p.core_value}};
}

json to_json(const ModelParams& p) {
  return {{"geometry", to_json(p.geometry)}, {"kernel", to_json(p.kernel)}, {"potential", to_json(p.potential)}};
}

TubeGeometry geometry_from_json(const json& j) {
  TubeGeometry g;
  g.axis = vec3_from_json(j.at("axis"));
  g.radius = j.at("L").get<double>();
  g.wall_onset = j.at("h").get<double>();
  g.wall_exponent = j.at("gamma").get<double>();
  g.wall_amplitude = j.at("theta0").get<double>();
  return g;
}

std::string_view kernel_family_name(KernelFamily family) {
  return family == KernelFamily::TaperedCosine ? "tapered_cosine" : "inverse_power";
}

KernelFamily kernel_family_from_name(std::string_view name) {
  if (name == "tapered_cosine") return KernelFamily::TaperedCosine;
  if (name == "inverse_power") return KernelFamily::InversePower;
  throw InvalidParameter("unknown kernel family '" + std::string(name) + "'");
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace tubeflock
