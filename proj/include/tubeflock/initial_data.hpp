#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "tubeflock/model.hpp"

namespace tubeflock {

/// Finite truncation of a random locally finite configuration: Poisson
/// axial positions on [-S, S], uniform transverse positions in the disk of
/// radius c L, hard-core rejection at d_min, Gaussian velocities.
struct SamplerSpec {
  std::uint64_t seed = 1;
  double density = 1.0;         // rho
  double velocity_scale = 0.5;  // sigma
  double half_span = 200.0;     // S
  double min_separation = 0.3;  // d_min
  bool log_growth = false;      // scale velocities by sqrt(log(e + |x.n|))
  double transverse_cap = 0.5;  // c
  // Conditions the Poisson process on a fixed particle count when set.
  std::optional<std::size_t> count;

  void validate(const TubeGeometry& geometry) const;
};

/// Counter-based uniform variate in (0, 1) keyed by (seed, index, stream, attempt).
double keyed_uniform(std::uint64_t seed, std::uint64_t index, std::uint64_t stream, std::uint64_t attempt = 0);

/// Ids are assigned 0..N-1 in ascending axial order.
Configuration sample_configuration(const SamplerSpec& spec, const ModelParams& params);

struct MembershipReport {
  std::size_t count = 0;
  double sup_q = 0.0;
  double sup_q_center = 0.0;
  double sup_q_half_width = 0.0;
  double min_pair_separation = 0.0;  // +inf for fewer than two particles
  double max_wall_energy = 0.0;
  double max_speed = 0.0;

  bool finite() const;
};

MembershipReport verify_membership(const Configuration& config, const ModelParams& params);

/// Hex FNV-1a digest of the canonical JSON form of the parameters.
std::string params_digest(const ModelParams& params);

constexpr int kSnapshotFormatVersion = 1;

struct Snapshot {
  Configuration config;
  TubeGeometry geometry;
  std::string params_digest;
};

/// JSON-lines: a header object, then one {id, x, v} object per particle.
void save_snapshot(const Configuration& config, const ModelParams& params, const std::filesystem::path& path);
Snapshot load_snapshot(const std::filesystem::path& path);

}  // namespace tubeflock
