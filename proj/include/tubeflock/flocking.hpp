#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "tubeflock/dynamics.hpp"
#include "tubeflock/integrator.hpp"
#include "tubeflock/model.hpp"

namespace tubeflock {

/// Mean position and mean velocity.
std::pair<Vec3, Vec3> center_of_mass(const Configuration& config);

/// Classical Cucker-Smale system in free space: all pairs aligned with
/// psi(u) = K0 / (1 + u)^beta, no potentials.
class ClassicalSystem : public OdeSystem {
 public:
  ClassicalSystem(std::size_t particle_count, double beta, double k0);

  std::size_t dimension() const override { return 6 * count_; }
  bool derivative(std::span<const double> y, std::span<double> dydt) override;

 private:
  std::size_t count_;
  CommKernel kernel_;
};

/// Gaussian positions and velocities with per-component standard deviations
/// sigma_x and sigma_v.
Configuration classical_initial_data(std::size_t n, std::uint64_t seed, double sigma_x = 1.0, double sigma_v = 1.0);

/// Integrates `initial` with mean-field amplitude K0 = lambda / N.
Trajectory simulate_classical(const Configuration& initial, double beta, double lambda, double T,
                              const IntegratorConfig& icfg, double stride);
Trajectory simulate_classical(std::size_t n, double beta, double lambda, std::uint64_t seed, double T,
                              const IntegratorConfig& icfg, double stride);

/// max_i |v_i - v_c|
double velocity_diameter(const Configuration& config);
/// max_i |x_i - x_c|
double position_spread(const Configuration& config);

struct FlockSeries {
  std::vector<double> times;
  std::vector<double> velocity_diameter;
  std::vector<double> position_spread;
};

FlockSeries flock_series(const Trajectory& traj);

struct FlockVerdict {
  double velocity_diameter = 0.0;  // at the final time
  double position_spread = 0.0;    // max over the run
  double v_threshold = 0.0;
  double x_bound = 0.0;
  bool flocking = false;
  // -d/dt log(velocity diameter), least squares over the last half of the
  // run; empty when the diameter vanishes.
  std::optional<double> decay_rate;
};

FlockVerdict flocking_verdict(const Trajectory& traj, double v_threshold, double x_bound);

}  // namespace tubeflock
