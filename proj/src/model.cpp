#include "tubeflock/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_set>

#include "tubeflock/errors.hpp"

namespace tubeflock {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw InvalidParameter(what);
}

// Taper S(q) and dS/dq.
std::pair<double, double> taper(double q, double s0) {
  if (q <= s0) return {1.0, 0.0};
  if (q >= 1.0) return {0.0, 0.0};
  const double width = 1.0 - s0;
  const double t = (q - s0) / width;
  return {1.0 - smoothstep5(t), -smoothstep5_derivative(t) / width};
}

}  // namespace

double smoothstep5(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

double smoothstep5_derivative(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double u = t * (1.0 - t);
  return 30.0 * u * u;
}

void TubeGeometry::validate() const {
  require(std::abs(norm(axis) - 1.0) <= 1e-12, "geometry: axis must be a unit vector");
  require(radius > 0.0, "geometry: L must be positive");
  require(wall_onset > 0.0 && wall_onset < radius, "geometry: h must lie in (0, L)");
  require(wall_exponent > 0.0, "geometry: gamma must be positive");
  // theta0 = 0 switches the wall off entirely.
  require(wall_amplitude >= 0.0, "geometry: theta0 must be non-negative");
}

void CommKernel::validate() const {
  require(amplitude >= 0.0, "kernel: K0 must be non-negative");
  if (family == KernelFamily::TaperedCosine) {
    require(support > 0.0, "kernel: rbar must be positive");
  } else {
    require(exponent > 0.0, "kernel: beta must be positive");
  }
}

void PairPotential::validate() const {
  require(amplitude >= 0.0, "potential: a must be non-negative");
  require(exponent > 0.0, "potential: b must be positive");
  require(support > 0.0, "potential: rbar must be positive");
  require(taper_start > 0.0 && taper_start < 1.0, "potential: s0 must lie in (0, 1)");
  // u0 = 0 with a = 0 disables the pair potential.
  require(core_value >= 0.0, "potential: u0 must be non-negative");
}

double ModelParams::interaction_range() const { return potential.support; }

void ModelParams::validate() const {
  geometry.validate();
  kernel.validate();
  potential.validate();
  require(kernel.family == KernelFamily::TaperedCosine,
          "tube dynamics needs a compactly supported kernel (tapered_cosine)");
  require(kernel.support == potential.support, "kernel and potential must share rbar");
}

void validate_configuration(const Configuration& config, const TubeGeometry& geometry) {
  std::unordered_set<std::int64_t> ids;
  ids.reserve(config.size());
  for (const auto& p : config.particles) {
    if (!ids.insert(p.id).second) {
      throw InvalidParameter("configuration: duplicate particle id " + std::to_string(p.id));
    }
    if (norm(geometry.transverse(p.x)) >= geometry.radius) {
      throw OutOfDomain("configuration: particle " + std::to_string(p.id) + " outside the tube");
    }
  }
  // Coincident points: sort by axial coordinate and compare equal-axial runs.
  std::vector<std::size_t> order(config.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return geometry.axial(config.particles[a].x) < geometry.axial(config.particles[b].x);
  });
  for (std::size_t a = 0; a + 1 < order.size(); ++a) {
    const auto& pa = config.particles[order[a]];
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      const auto& pb = config.particles[order[b]];
      if (geometry.axial(pb.x) != geometry.axial(pa.x)) break;
      if (pa.x == pb.x) {
        std::ostringstream msg;
        msg << "configuration: particles " << pa.id << " and " << pb.id << " coincide";
        throw SingularConfiguration(msg.str());
      }
    }
  }
}

double comm_rate(const CommKernel& kernel, double u) {
  u = std::abs(u);
  switch (kernel.family) {
    case KernelFamily::TaperedCosine:
      if (u >= kernel.support) return 0.0;
      return kernel.amplitude * 0.5 * (1.0 + std::cos(std::numbers::pi * u / kernel.support));
    case KernelFamily::InversePower:
      return kernel.amplitude / std::pow(1.0 + u, kernel.exponent);
  }
  return 0.0;
}

EnergyForce pair_interaction(const PairPotential& potential, const Vec3& d) {
  const double r = norm(d);
  if (r == 0.0) throw SingularConfiguration("pair_interaction: zero separation");
  if (r >= potential.support) return {};

  const auto [s, ds_dq] = taper(r / potential.support, potential.taper_start);
  double energy;
  double du_dr;
  if (potential.amplitude > 0.0) {
    const double core = potential.amplitude * std::pow(r, -potential.exponent);
    energy = core * s;
    du_dr = core * (-potential.exponent * s / r + ds_dq / potential.support);
  } else {
    energy = potential.core_value * s;
    du_dr = potential.core_value * ds_dq / potential.support;
  }
  return {energy, d * (-du_dr / r)};
}

EnergyForce confinement(const TubeGeometry& geometry, const Vec3& x) {
  const Vec3 perp = geometry.transverse(x);
  const double s = norm(perp);
  if (s >= geometry.radius) throw OutOfDomain("confinement: position outside the tube");
  if (s <= geometry.wall_onset || geometry.wall_amplitude == 0.0) return {};

  const double span = geometry.radius - geometry.wall_onset;
  const double ramp = (s - geometry.wall_onset) / span;
  const double theta = geometry.wall_amplitude * ramp * ramp * ramp;
  const double dtheta = 3.0 * geometry.wall_amplitude * ramp * ramp / span;
  const double gap = geometry.radius - s;
  const double inv = std::pow(gap, -geometry.wall_exponent);
  const double energy = theta * inv;
  const double dtheta_ds = dtheta * inv + geometry.wall_exponent * energy / gap;
  return {energy, perp * (-dtheta_ds / s)};
}

}  // namespace tubeflock
