#include "tubeflock/flocking.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tubeflock/errors.hpp"
#include "tubeflock/initial_data.hpp"

namespace tubeflock {

namespace {

constexpr std::uint64_t kPositionStream = 32;
constexpr std::uint64_t kVelocityStream = 48;

double gaussian(std::uint64_t seed, std::uint64_t index, std::uint64_t stream) {
  const double u1 = keyed_uniform(seed, index, stream);
  const double u2 = keyed_uniform(seed, index, stream + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

std::pair<Vec3, Vec3> center_of_mass(const Configuration& config) {
  if (config.empty()) throw InvalidParameter("center_of_mass: empty configuration");
  Vec3 xc;
  Vec3 vc;
  for (const auto& p : config.particles) {
    xc += p.x;
    vc += p.v;
  }
  const double inv = 1.0 / static_cast<double>(config.size());
  return {xc * inv, vc * inv};
}

ClassicalSystem::ClassicalSystem(std::size_t particle_count, double beta, double k0) : count_(particle_count) {
  kernel_.family = KernelFamily::InversePower;
  kernel_.amplitude = k0;
  kernel_.exponent = beta;
}

bool ClassicalSystem::derivative(std::span<const double> y, std::span<double> dydt) {
  for (std::size_t i = 0; i < count_; ++i) {
    const double* pi = y.data() + 6 * i;
    double* d = dydt.data() + 6 * i;
    const Vec3 xi{pi[0], pi[1], pi[2]};
    const Vec3 vi{pi[3], pi[4], pi[5]};
    Vec3 a;
    for (std::size_t j = 0; j < count_; ++j) {
      if (j == i) continue;
      const double* pj = y.data() + 6 * j;
      const Vec3 xj{pj[0], pj[1], pj[2]};
      const Vec3 vj{pj[3], pj[4], pj[5]};
      a += (vj - vi) * comm_rate(kernel_, norm(xi - xj));
    }
    d[0] = vi.x;
    d[1] = vi.y;
    d[2] = vi.z;
    d[3] = a.x;
    d[4] = a.y;
    d[5] = a.z;
  }
  return true;
}

Configuration classical_initial_data(std::size_t n, std::uint64_t seed, double sigma_x, double sigma_v) {
  Configuration c;
  c.particles.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& p = c.particles[i];
    p.id = static_cast<std::int64_t>(i);
    p.x = Vec3{gaussian(seed, i, kPositionStream), gaussian(seed, i, kPositionStream + 2),
               gaussian(seed, i, kPositionStream + 4)} *
          sigma_x;
    p.v = Vec3{gaussian(seed, i, kVelocityStream), gaussian(seed, i, kVelocityStream + 2),
               gaussian(seed, i, kVelocityStream + 4)} *
          sigma_v;
  }
  return c;
}

Trajectory simulate_classical(const Configuration& initial, double beta, double lambda, double T,
                              const IntegratorConfig& icfg, double stride) {
  if (initial.size() < 2) throw InvalidParameter("simulate_classical: need at least two particles");
  if (!(beta > 0.0)) throw InvalidParameter("simulate_classical: beta must be positive");
  if (!(lambda >= 0.0)) throw InvalidParameter("simulate_classical: lambda must be non-negative");
  icfg.validate();
  const auto times = snapshot_times(T, stride);

  Trajectory traj;
  Configuration first = initial;
  first.time = 0.0;
  traj.snapshots.push_back(first);
  if (times.size() == 1) return traj;

  ClassicalSystem system(initial.size(), beta, lambda / static_cast<double>(initial.size()));
  const auto y0 = pack_state(initial);
  DormandPrince45 stepper(system, icfg, y0, 0.0);
  for (std::size_t s = 1; s < times.size(); ++s) {
    stepper.advance_to(times[s]);
    traj.snapshots.push_back(unpack_state(stepper.state(), initial, times[s]));
  }
  traj.stats = stepper.stats();
  return traj;
}

Trajectory simulate_classical(std::size_t n, double beta, double lambda, std::uint64_t seed, double T,
                              const IntegratorConfig& icfg, double stride) {
  return simulate_classical(classical_initial_data(n, seed), beta, lambda, T, icfg, stride);
}

double velocity_diameter(const Configuration& config) {
  const Vec3 vc = center_of_mass(config).second;
  double d = 0.0;
  for (const auto& p : config.particles) d = std::max(d, norm(p.v - vc));
  return d;
}

double position_spread(const Configuration& config) {
  const Vec3 xc = center_of_mass(config).first;
  double d = 0.0;
  for (const auto& p : config.particles) d = std::max(d, norm(p.x - xc));
  return d;
}

FlockSeries flock_series(const Trajectory& traj) {
  FlockSeries s;
  for (const auto& snap : traj.snapshots) {
    s.times.push_back(snap.time);
    s.velocity_diameter.push_back(velocity_diameter(snap));
    s.position_spread.push_back(position_spread(snap));
  }
  return s;
}

FlockVerdict flocking_verdict(const Trajectory& traj, double v_threshold, double x_bound) {
  if (traj.empty()) throw InvalidParameter("flocking_verdict: empty trajectory");
  const auto series = flock_series(traj);
  FlockVerdict v;
  v.v_threshold = v_threshold;
  v.x_bound = x_bound;
  v.velocity_diameter = series.velocity_diameter.back();
  v.position_spread = *std::max_element(series.position_spread.begin(), series.position_spread.end());
  v.flocking = v.velocity_diameter <= v_threshold && v.position_spread <= x_bound;

  const double t_half = 0.5 * series.times.back();
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t s = 0; s < series.times.size(); ++s) {
    const double d = series.velocity_diameter[s];
    if (series.times[s] < t_half || !(d > 0.0)) continue;
    const double x = series.times[s];
    const double y = std::log(d);
    n += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (n >= 2 && denom > 0.0) v.decay_rate = -(n * sxy - sx * sy) / denom;
  return v;
}

}  // namespace tubeflock
