#pragma once

#include <cstdint>
#include <vector>

#include "tubeflock/vec3.hpp"

namespace tubeflock {

/// Infinite tube |x - (x.n)n| < L with a soft confining wall that switches
/// on at transverse distance h and diverges as (L - s)^-gamma at the wall.
struct TubeGeometry {
  Vec3 axis{1.0, 0.0, 0.0};
  double radius = 1.0;       // L
  double wall_onset = 0.5;   // h
  double wall_exponent = 2.0;
  double wall_amplitude = 1.0;

  void validate() const;

  double axial(const Vec3& x) const { return dot(x, axis); }
  Vec3 transverse(const Vec3& x) const { return x - axis * dot(x, axis); }
};

enum class KernelFamily { TaperedCosine, InversePower };

/// Alignment communication rate psi(u).
struct CommKernel {
  KernelFamily family = KernelFamily::TaperedCosine;
  double amplitude = 1.0;  // K0
  double exponent = 0.5;   // beta, InversePower only
  double support = 4.5;    // rbar, TaperedCosine only

  void validate() const;
};

/// U(x) = a |x|^-b S(|x|/rbar), or u0 S(|x|/rbar) when a = 0. S is a C2
/// quintic taper: 1 on [0, s0], 0 on [1, inf).
struct PairPotential {
  double amplitude = 0.5;    // a
  double exponent = 2.0;     // b
  double support = 4.5;      // rbar, shared with the kernel
  double taper_start = 0.5;  // s0
  double core_value = 1.0;   // u0, used when a = 0

  void validate() const;
};

struct ModelParams {
  TubeGeometry geometry;
  CommKernel kernel;
  PairPotential potential;

  // Largest distance at which psi or U can be non-zero.
  double interaction_range() const;
  void validate() const;
};

struct ParticleState {
  std::int64_t id = 0;
  Vec3 x;
  Vec3 v;

  friend bool operator==(const ParticleState&, const ParticleState&) = default;
};

/// Finite particle collection at time `time`. Geometry lives in ModelParams.
struct Configuration {
  double time = 0.0;
  std::vector<ParticleState> particles;

  std::size_t size() const { return particles.size(); }
  bool empty() const { return particles.empty(); }
  friend bool operator==(const Configuration&, const Configuration&) = default;
};

/// Throws if ids repeat, a particle is outside the tube or two coincide.
void validate_configuration(const Configuration& config, const TubeGeometry& geometry);

struct EnergyForce {
  double energy = 0.0;
  Vec3 force;
};

double comm_rate(const CommKernel& kernel, double u);

/// Energy U(d) and force -grad U(d) on the particle at displacement d from its partner.
EnergyForce pair_interaction(const PairPotential& potential, const Vec3& d);

/// Wall energy Theta(x) and force -grad Theta(x).
EnergyForce confinement(const TubeGeometry& geometry, const Vec3& x);

// Quintic smoothstep 6t^5 - 15t^4 + 10t^3 on [0,1], clamped outside.
double smoothstep5(double t);
double smoothstep5_derivative(double t);

}  // namespace tubeflock
