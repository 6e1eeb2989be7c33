#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tubeflock/integrator.hpp"
#include "tubeflock/model.hpp"

namespace tubeflock {

/// Per-particle right-hand side of the velocity equation.
struct RhsOutput {
  std::vector<Vec3> acceleration;  // alignment + force
  std::vector<Vec3> alignment;     // sum_j psi_ij (v_j - v_i)
  std::vector<Vec3> force;         // -sum_j grad U(x_i - x_j) - grad Theta(x_i)
};

struct Trajectory {
  std::vector<Configuration> snapshots;
  IntegratorStats stats;

  bool empty() const { return snapshots.empty(); }
  const Configuration& initial() const { return snapshots.front(); }
  const Configuration& final() const { return snapshots.back(); }
};

struct StepOutcome {
  Configuration config;
  double dt = 0.0;
  double error = 0.0;
};

/// Tube system X -> (v, a) on the packed state [x0 v0 x1 v1 ...].
class TubeSystem : public OdeSystem {
 public:
  TubeSystem(const ModelParams& params, std::size_t particle_count);

  std::size_t dimension() const override { return 6 * count_; }
  bool derivative(std::span<const double> y, std::span<double> dydt) override;
  bool step_admissible(std::span<const double> from, std::span<const double> to, double eta) override;
  std::string diagnose(std::span<const double> y) const override;

 private:
  void unpack(std::span<const double> y);

  ModelParams params_;
  std::size_t count_;
  double cell_width_;
  std::vector<Vec3> x_;
  std::vector<Vec3> v_;
  std::vector<Vec3> acc_;
  std::vector<std::size_t> buf_;
};

std::vector<double> pack_state(const Configuration& config);
/// Copies positions/velocities from `y` into a configuration shaped like `like`.
Configuration unpack_state(std::span<const double> y, const Configuration& like, double time);

RhsOutput total_rhs(const Configuration& config, const ModelParams& params);

/// One accepted adaptive step starting from icfg.initial_step.
StepOutcome step_adaptive(const Configuration& config, const ModelParams& params, const IntegratorConfig& icfg);

/// Snapshot times 0, stride, 2 stride, ... and T (always last).
std::vector<double> snapshot_times(double T, double stride);

Trajectory simulate(const Configuration& initial, const ModelParams& params, const IntegratorConfig& icfg,
                    double T, double stride);

/// Integrates several independent configurations as one system so that all
/// of them take the same steps. With a single input this is simulate().
std::vector<Trajectory> simulate_lockstep(std::span<const Configuration> initials, const ModelParams& params,
                                          const IntegratorConfig& icfg, double T, double stride);

/// v_i^2/2 + (1/2) sum_{j != i} U(x_i - x_j) + Theta(x_i), per particle.
std::vector<double> particle_energies(const Configuration& config, const ModelParams& params);
double energy(const Configuration& config, const ModelParams& params);
/// dE/dt = -(1/2) sum_{i != j} psi_ij |v_i - v_j|^2.
double dissipation_rate(const Configuration& config, const ModelParams& params);

struct ConfigDiagnostics {
  double axial_momentum = 0.0;
  double min_pair_distance = 0.0;  // +inf with fewer than two particles
  double wall_margin = 0.0;        // min_i (L - |x_i^perp|), +inf when empty
  std::int64_t closest_a = -1;
  std::int64_t closest_b = -1;
};

ConfigDiagnostics diagnostics(const Configuration& config, const TubeGeometry& geometry);

}  // namespace tubeflock
