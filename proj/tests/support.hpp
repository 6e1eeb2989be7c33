#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "tubeflock/model.hpp"

namespace tubeflock::testing {

inline ModelParams make_params(double rbar, double k0, double a, double b = 2.0, double s0 = 0.5, double u0 = 1.0) {
  ModelParams p;
  p.kernel.support = rbar;
  p.kernel.amplitude = k0;
  p.potential.support = rbar;
  p.potential.amplitude = a;
  p.potential.exponent = b;
  p.potential.taper_start = s0;
  p.potential.core_value = u0;
  return p;
}

/// All pair interactions off; the wall stays on.
inline ModelParams free_params(double rbar = 2.0) { return make_params(rbar, 0.0, 0.0, 2.0, 0.5, 0.0); }

inline ParticleState particle(std::int64_t id, Vec3 x, Vec3 v = {}) { return {id, x, v}; }

inline Configuration config_of(std::vector<ParticleState> ps, double time = 0.0) {
  Configuration c;
  c.time = time;
  c.particles = std::move(ps);
  return c;
}

/// Points inside the tube of radius `radius` with axial coordinate in [0, span),
/// rejecting pairs closer than `dmin`.
inline Configuration random_tube_config(std::mt19937_64& rng, std::size_t n, double span, double radius,
                                        double dmin, double vscale) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Configuration c;
  while (c.size() < n) {
    const double r = radius * std::sqrt(unit(rng));
    const double phi = 6.283185307179586 * unit(rng);
    const Vec3 x{span * unit(rng), r * std::cos(phi), r * std::sin(phi)};
    bool ok = true;
    for (const auto& p : c.particles) ok = ok && norm(p.x - x) >= dmin;
    if (!ok) continue;
    const Vec3 v{vscale * gauss(rng), vscale * gauss(rng), vscale * gauss(rng)};
    c.particles.push_back({static_cast<std::int64_t>(c.size()), x, v});
  }
  return c;
}

}  // namespace tubeflock::testing
