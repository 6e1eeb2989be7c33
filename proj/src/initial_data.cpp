#include "tubeflock/initial_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "tubeflock/dynamics.hpp"
#include "tubeflock/errors.hpp"
#include "tubeflock/functionals.hpp"
#include "tubeflock/json_io.hpp"

namespace tubeflock {

namespace {

using nlohmann::json;

constexpr std::size_t kMaxAttempts = 1'000'000;

enum Stream : std::uint64_t {
  kCountGap = 1,
  kAxial = 2,
  kRadius = 3,
  kAngle = 4,
  kVelocity = 8,  // 8..13, two variates per component
};

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double gaussian(std::uint64_t seed, std::uint64_t index, std::uint64_t component) {
  const double u1 = keyed_uniform(seed, index, kVelocity + 2 * component);
  const double u2 = keyed_uniform(seed, index, kVelocity + 2 * component + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Orthonormal pair spanning the plane perpendicular to the axis.
std::pair<Vec3, Vec3> transverse_basis(const Vec3& axis) {
  Vec3 helper{1.0, 0.0, 0.0};
  if (std::abs(axis.y) <= std::abs(axis.x) && std::abs(axis.y) <= std::abs(axis.z)) {
    helper = {0.0, 1.0, 0.0};
  } else if (std::abs(axis.z) <= std::abs(axis.x)) {
    helper = {0.0, 0.0, 1.0};
  }
  Vec3 e1 = cross(axis, helper);
  e1 *= 1.0 / norm(e1);
  return {e1, cross(axis, e1)};
}

std::size_t poisson_count(const SamplerSpec& spec) {
  const double mass = spec.density * 2.0 * spec.half_span;
  double arrival = 0.0;
  std::size_t n = 0;
  while (true) {
    arrival += -std::log(keyed_uniform(spec.seed, n, kCountGap));
    if (arrival > mass) return n;
    ++n;
  }
}

}  // namespace

void SamplerSpec::validate(const TubeGeometry& geometry) const {
  if (!(density > 0.0)) throw InvalidParameter("sampler: rho must be positive");
  if (!(velocity_scale >= 0.0)) throw InvalidParameter("sampler: sigma must be non-negative");
  if (!(half_span > 0.0)) throw InvalidParameter("sampler: span must be positive");
  if (!(min_separation > 0.0)) throw InvalidParameter("sampler: dmin must be positive");
  if (!(min_separation < 1.0 / density)) throw InvalidParameter("sampler: dmin must be below 1/rho");
  if (!(transverse_cap > 0.0 && transverse_cap < 1.0)) throw InvalidParameter("sampler: c must lie in (0, 1)");
  (void)geometry;
}

double keyed_uniform(std::uint64_t seed, std::uint64_t index, std::uint64_t stream, std::uint64_t attempt) {
  const std::uint64_t h = splitmix(seed ^ splitmix(index ^ splitmix(stream ^ splitmix(attempt))));
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

Configuration sample_configuration(const SamplerSpec& spec, const ModelParams& params) {
  const auto& geo = params.geometry;
  geo.validate();
  spec.validate(geo);
  const std::size_t n = spec.count ? *spec.count : poisson_count(spec);
  const auto [e1, e2] = transverse_basis(geo.axis);
  const double disk = spec.transverse_cap * geo.radius;
  const double bin = spec.min_separation;

  std::vector<ParticleState> placed;
  placed.reserve(n);
  std::unordered_map<std::int64_t, std::vector<std::size_t>> bins;
  std::size_t attempts = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::uint64_t a = 0;; ++a) {
      if (++attempts > kMaxAttempts) {
        throw InfeasibleDensity("sampler: could not place " + std::to_string(n) + " particles with dmin=" +
                                std::to_string(spec.min_separation));
      }
      const double axial = spec.half_span * (2.0 * keyed_uniform(spec.seed, i, kAxial, a) - 1.0);
      const double r = disk * std::sqrt(keyed_uniform(spec.seed, i, kRadius, a));
      const double phi = 2.0 * std::numbers::pi * keyed_uniform(spec.seed, i, kAngle, a);
      const Vec3 x = geo.axis * axial + e1 * (r * std::cos(phi)) + e2 * (r * std::sin(phi));
      const auto b = static_cast<std::int64_t>(std::floor(axial / bin));
      bool clear = true;
      for (std::int64_t nb = b - 1; nb <= b + 1 && clear; ++nb) {
        auto it = bins.find(nb);
        if (it == bins.end()) continue;
        for (std::size_t j : it->second) {
          if (norm(placed[j].x - x) < spec.min_separation) {
            clear = false;
            break;
          }
        }
      }
      if (!clear) continue;

      Vec3 v;
      if (spec.velocity_scale > 0.0) {
        double scale = spec.velocity_scale;
        if (spec.log_growth) scale *= std::sqrt(std::log(std::numbers::e + std::abs(axial)));
        v = {scale * gaussian(spec.seed, i, 0), scale * gaussian(spec.seed, i, 1), scale * gaussian(spec.seed, i, 2)};
      }
      bins[b].push_back(placed.size());
      placed.push_back({0, x, v});
      break;
    }
  }

  std::stable_sort(placed.begin(), placed.end(), [&](const ParticleState& a, const ParticleState& b) {
    return geo.axial(a.x) < geo.axial(b.x);
  });
  Configuration config;
  config.particles = std::move(placed);
  for (std::size_t i = 0; i < config.size(); ++i) config.particles[i].id = static_cast<std::int64_t>(i);
  return config;
}

bool MembershipReport::finite() const {
  return std::isfinite(sup_q) && std::isfinite(max_wall_energy) && std::isfinite(max_speed) &&
         (count < 2 || std::isfinite(min_pair_separation));
}

MembershipReport verify_membership(const Configuration& config, const ModelParams& params) {
  MembershipReport r;
  r.count = config.size();
  const auto est = sup_Q(config, params);
  r.sup_q = est.value;
  r.sup_q_center = est.center;
  r.sup_q_half_width = est.half_width;
  r.min_pair_separation = diagnostics(config, params.geometry).min_pair_distance;
  for (const auto& p : config.particles) {
    r.max_wall_energy = std::max(r.max_wall_energy, confinement(params.geometry, p.x).energy);
    r.max_speed = std::max(r.max_speed, norm(p.v));
  }
  return r;
}

std::string params_digest(const ModelParams& params) { return fnv1a_hex(to_json(params).dump()); }

void save_snapshot(const Configuration& config, const ModelParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  const json header = {{"format_version", kSnapshotFormatVersion},
                       {"time", config.time},
                       {"count", config.size()},
                       {"geometry", to_json(params.geometry)},
                       {"params_digest", params_digest(params)}};
  out << header.dump() << '\n';
  for (const auto& p : config.particles) {
    out << json{{"id", p.id}, {"x", to_json(p.x)}, {"v", to_json(p.v)}}.dump() << '\n';
  }
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

Snapshot load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  const std::string where = path.string();
  auto fail = [&](std::size_t line, const std::string& why) -> ParseError {
    return ParseError(where + ":" + std::to_string(line) + ": " + why, line);
  };

  std::string text;
  std::size_t line_no = 0;
  if (!std::getline(in, text)) throw fail(1, "missing header");
  ++line_no;
  Snapshot snap;
  std::size_t expected = 0;
  try {
    const json header = json::parse(text);
    const int version = header.at("format_version").get<int>();
    if (version != kSnapshotFormatVersion) {
      throw VersionError(where + ": snapshot format_version " + std::to_string(version) + " is not supported (expected " +
                         std::to_string(kSnapshotFormatVersion) + ")");
    }
    snap.config.time = header.at("time").get<double>();
    expected = header.at("count").get<std::size_t>();
    snap.geometry = geometry_from_json(header.at("geometry"));
    snap.params_digest = header.at("params_digest").get<std::string>();
  } catch (const VersionError&) {
    throw;
  } catch (const std::exception& e) {
    throw fail(line_no, std::string("malformed header: ") + e.what());
  }

  snap.config.particles.reserve(expected);
  while (std::getline(in, text)) {
    ++line_no;
    if (text.empty() && in.peek() == std::char_traits<char>::eof()) break;
    try {
      const json row = json::parse(text);
      snap.config.particles.push_back(
          {row.at("id").get<std::int64_t>(), vec3_from_json(row.at("x")), vec3_from_json(row.at("v"))});
    } catch (const std::exception& e) {
      throw fail(line_no, std::string("malformed particle record: ") + e.what());
    }
  }
  if (snap.config.size() != expected) {
    throw fail(line_no + 1, "expected " + std::to_string(expected) + " particle records, found " +
                                std::to_string(snap.config.size()));
  }
  return snap;
}

}  // namespace tubeflock
