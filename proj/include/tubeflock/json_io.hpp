#pragma once

#include <string_view>

#include <json.hpp>

#include "tubeflock/model.hpp"

namespace tubeflock {

nlohmann::json to_json(const Vec3& v);
Vec3 vec3_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TubeGeometry& g);
nlohmann::json to_json(const CommKernel& k);
nlohmann::json to_json(const PairPotential& p);
nlohmann::json to_json(const ModelParams& p);

TubeGeometry geometry_from_json(const nlohmann::json& j);

std::string_view kernel_family_name(KernelFamily family);
KernelFamily kernel_family_from_name(std::string_view name);

/// 64-bit FNV-1a, lowercase hex.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace tubeflock
