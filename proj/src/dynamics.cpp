#include "tubeflock/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "tubeflock/errors.hpp"
#include "tubeflock/neighbor_index.hpp"

namespace tubeflock {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class EvalStatus { Ok, Singular, OutOfDomain };

// Accumulates the right-hand side in ascending neighbor order. `align` and
// `force` may be empty when only the total acceleration is wanted.
EvalStatus evaluate(std::span<const Vec3> x, std::span<const Vec3> v, const ModelParams& params,
                    double cell_width, std::span<Vec3> acc, std::span<Vec3> align, std::span<Vec3> force,
                    std::vector<std::size_t>& buf) {
  const auto& geo = params.geometry;
  for (const auto& xi : x) {
    if (!(norm(geo.transverse(xi)) < geo.radius)) return EvalStatus::OutOfDomain;
  }
  const AxialCellIndex index(x, geo.axis, cell_width, params.interaction_range());
  const bool split = !align.empty();
  for (std::size_t i = 0; i < x.size(); ++i) {
    Vec3 a_align;
    Vec3 a_force;
    index.neighbors(i, buf);
    for (std::size_t j : buf) {
      const Vec3 d = x[i] - x[j];
      const double r = norm(d);
      if (r == 0.0) return EvalStatus::Singular;
      a_align += (v[j] - v[i]) * comm_rate(params.kernel, r);
      a_force += pair_interaction(params.potential, d).force;
    }
    a_force += confinement(geo, x[i]).force;
    acc[i] = a_align + a_force;
    if (split) {
      align[i] = a_align;
      force[i] = a_force;
    }
  }
  return EvalStatus::Ok;
}

std::vector<Vec3> positions_of(const Configuration& config) {
  std::vector<Vec3> x;
  x.reserve(config.size());
  for (const auto& p : config.particles) x.push_back(p.x);
  return x;
}

// Smallest pair distance among pairs within the interaction range, capped at the range.
double guarded_min_distance(std::span<const Vec3> x, const ModelParams& params, double cell_width) {
  const double range = params.interaction_range();
  double dmin = range;
  const AxialCellIndex index(x, params.geometry.axis, cell_width, range);
  index.for_each_pair([&](std::size_t i, std::size_t j) { dmin = std::min(dmin, norm(x[i] - x[j])); });
  return dmin;
}

// Integration driver shared by simulate() and simulate_lockstep().
class LockstepSystem : public OdeSystem {
 public:
  LockstepSystem(const ModelParams& params, std::span<const Configuration> configs) {
    std::size_t offset = 0;
    for (const auto& c : configs) {
      parts_.emplace_back(params, c.size());
      offsets_.push_back(offset);
      offset += 6 * c.size();
    }
    dimension_ = offset;
  }

  std::size_t dimension() const override { return dimension_; }

  bool derivative(std::span<const double> y, std::span<double> dydt) override {
    for (std::size_t k = 0; k < parts_.size(); ++k) {
      const std::size_t n = parts_[k].dimension();
      if (!parts_[k].derivative(y.subspan(offsets_[k], n), dydt.subspan(offsets_[k], n))) return false;
    }
    return true;
  }

  bool step_admissible(std::span<const double> from, std::span<const double> to, double eta) override {
    for (std::size_t k = 0; k < parts_.size(); ++k) {
      const std::size_t n = parts_[k].dimension();
      if (!parts_[k].step_admissible(from.subspan(offsets_[k], n), to.subspan(offsets_[k], n), eta)) {
        return false;
      }
    }
    return true;
  }

  std::string diagnose(std::span<const double> y) const override {
    std::string out;
    for (std::size_t k = 0; k < parts_.size(); ++k) {
      const std::string d = parts_[k].diagnose(y.subspan(offsets_[k], parts_[k].dimension()));
      if (d.empty()) continue;
      if (!out.empty()) out += "; ";
      if (parts_.size() > 1) out += "run " + std::to_string(k) + ": ";
      out += d;
    }
    return out;
  }

  std::size_t offset(std::size_t k) const { return offsets_[k]; }

 private:
  std::vector<TubeSystem> parts_;
  std::vector<std::size_t> offsets_;
  std::size_t dimension_ = 0;
};

}  // namespace

TubeSystem::TubeSystem(const ModelParams& params, std::size_t particle_count)
    : params_(params),
      count_(particle_count),
      cell_width_(default_cell_width(params)),
      x_(particle_count),
      v_(particle_count),
      acc_(particle_count) {}

void TubeSystem::unpack(std::span<const double> y) {
  for (std::size_t i = 0; i < count_; ++i) {
    const double* p = y.data() + 6 * i;
    x_[i] = {p[0], p[1], p[2]};
    v_[i] = {p[3], p[4], p[5]};
  }
}

bool TubeSystem::derivative(std::span<const double> y, std::span<double> dydt) {
  unpack(y);
  if (evaluate(x_, v_, params_, cell_width_, acc_, {}, {}, buf_) != EvalStatus::Ok) return false;
  for (std::size_t i = 0; i < count_; ++i) {
    double* d = dydt.data() + 6 * i;
    d[0] = v_[i].x;
    d[1] = v_[i].y;
    d[2] = v_[i].z;
    d[3] = acc_[i].x;
    d[4] = acc_[i].y;
    d[5] = acc_[i].z;
  }
  return true;
}

bool TubeSystem::step_admissible(std::span<const double> from, std::span<const double> to, double eta) {
  if (count_ == 0) return true;
  unpack(from);
  const double limit = eta * guarded_min_distance(x_, params_, cell_width_);
  for (std::size_t i = 0; i < count_; ++i) {
    const double* a = from.data() + 6 * i;
    const double* b = to.data() + 6 * i;
    const Vec3 dx{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
    if (!(norm(dx) <= limit)) return false;
  }
  // Wall crossing is caught by derivative() on the new state.
  return true;
}

std::string TubeSystem::diagnose(std::span<const double> y) const {
  Configuration c;
  c.particles.resize(count_);
  for (std::size_t i = 0; i < count_; ++i) {
    const double* p = y.data() + 6 * i;
    c.particles[i] = {static_cast<std::int64_t>(i), {p[0], p[1], p[2]}, {p[3], p[4], p[5]}};
  }
  const auto diag = diagnostics(c, params_.geometry);
  std::ostringstream out;
  out << "closest pair (" << diag.closest_a << "," << diag.closest_b << ") at distance "
      << diag.min_pair_distance << ", wall margin " << diag.wall_margin;
  return out.str();
}

std::vector<double> pack_state(const Configuration& config) {
  std::vector<double> y;
  y.reserve(6 * config.size());
  for (const auto& p : config.particles) {
    y.insert(y.end(), {p.x.x, p.x.y, p.x.z, p.v.x, p.v.y, p.v.z});
  }
  return y;
}

Configuration unpack_state(std::span<const double> y, const Configuration& like, double time) {
  Configuration c;
  c.time = time;
  c.particles.resize(like.size());
  for (std::size_t i = 0; i < like.size(); ++i) {
    const double* p = y.data() + 6 * i;
    c.particles[i] = {like.particles[i].id, {p[0], p[1], p[2]}, {p[3], p[4], p[5]}};
  }
  return c;
}

RhsOutput total_rhs(const Configuration& config, const ModelParams& params) {
  const std::size_t n = config.size();
  std::vector<Vec3> x = positions_of(config);
  std::vector<Vec3> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = config.particles[i].v;
  RhsOutput out{std::vector<Vec3>(n), std::vector<Vec3>(n), std::vector<Vec3>(n)};
  std::vector<std::size_t> buf;
  switch (evaluate(x, v, params, default_cell_width(params), out.acceleration, out.alignment, out.force, buf)) {
    case EvalStatus::Ok:
      return out;
    case EvalStatus::Singular:
      throw SingularConfiguration("total_rhs: overlapping particles");
    case EvalStatus::OutOfDomain:
      throw OutOfDomain("total_rhs: particle outside the tube");
  }
  return out;
}

StepOutcome step_adaptive(const Configuration& config, const ModelParams& params, const IntegratorConfig& icfg) {
  TubeSystem system(params, config.size());
  const auto y0 = pack_state(config);
  DormandPrince45 stepper(system, icfg, y0, config.time);
  const auto report = stepper.step(kInf);
  return {unpack_state(stepper.state(), config, stepper.time()), report.dt, report.error};
}

std::vector<double> snapshot_times(double T, double stride) {
  if (!(T >= 0.0)) throw InvalidParameter("simulate: T must be non-negative");
  if (!(stride > 0.0)) throw InvalidParameter("simulate: stride must be positive");
  std::vector<double> times{0.0};
  if (T == 0.0) return times;
  for (std::size_t k = 1;; ++k) {
    const double t = static_cast<double>(k) * stride;
    if (t >= T * (1.0 - 1e-12)) break;
    times.push_back(t);
  }
  times.push_back(T);
  return times;
}

std::vector<Trajectory> simulate_lockstep(std::span<const Configuration> initials, const ModelParams& params,
                                          const IntegratorConfig& icfg, double T, double stride) {
  params.validate();
  icfg.validate();
  const auto times = snapshot_times(T, stride);
  std::vector<Trajectory> out(initials.size());
  for (std::size_t k = 0; k < initials.size(); ++k) {
    validate_configuration(initials[k], params.geometry);
    Configuration first = initials[k];
    first.time = 0.0;
    out[k].snapshots.push_back(std::move(first));
  }
  if (times.size() == 1) return out;

  LockstepSystem system(params, initials);
  std::vector<double> y0;
  y0.reserve(system.dimension());
  for (const auto& c : initials) {
    const auto y = pack_state(c);
    y0.insert(y0.end(), y.begin(), y.end());
  }
  DormandPrince45 stepper(system, icfg, y0, 0.0);
  for (std::size_t s = 1; s < times.size(); ++s) {
    stepper.advance_to(times[s]);
    for (std::size_t k = 0; k < initials.size(); ++k) {
      out[k].snapshots.push_back(
          unpack_state(stepper.state().subspan(system.offset(k)), initials[k], times[s]));
    }
  }
  for (auto& traj : out) traj.stats = stepper.stats();
  return out;
}

Trajectory simulate(const Configuration& initial, const ModelParams& params, const IntegratorConfig& icfg,
                    double T, double stride) {
  return std::move(simulate_lockstep(std::span(&initial, 1), params, icfg, T, stride).front());
}

std::vector<double> particle_energies(const Configuration& config, const ModelParams& params) {
  const std::size_t n = config.size();
  const auto x = positions_of(config);
  std::vector<double> e(n);
  if (n == 0) return e;
  const AxialCellIndex index(x, params.geometry.axis, default_cell_width(params), params.interaction_range());
  std::vector<std::size_t> buf;
  for (std::size_t i = 0; i < n; ++i) {
    double pair = 0.0;
    index.neighbors(i, buf);
    for (std::size_t j : buf) pair += pair_interaction(params.potential, x[i] - x[j]).energy;
    e[i] = 0.5 * norm2(config.particles[i].v) + 0.5 * pair + confinement(params.geometry, x[i]).energy;
  }
  return e;
}

double energy(const Configuration& config, const ModelParams& params) {
  const auto e = particle_energies(config, params);
  return std::accumulate(e.begin(), e.end(), 0.0);
}

double dissipation_rate(const Configuration& config, const ModelParams& params) {
  const auto x = positions_of(config);
  if (x.empty()) return 0.0;
  const AxialCellIndex index(x, params.geometry.axis, default_cell_width(params), params.interaction_range());
  double sum = 0.0;
  std::vector<std::size_t> buf;
  for (std::size_t i = 0; i < x.size(); ++i) {
    index.neighbors(i, buf);
    for (std::size_t j : buf) {
      sum += comm_rate(params.kernel, norm(x[i] - x[j])) *
             norm2(config.particles[i].v - config.particles[j].v);
    }
  }
  return -0.5 * sum;
}

ConfigDiagnostics diagnostics(const Configuration& config, const TubeGeometry& geometry) {
  ConfigDiagnostics d;
  d.min_pair_distance = kInf;
  d.wall_margin = kInf;
  const std::size_t n = config.size();
  for (const auto& p : config.particles) {
    d.axial_momentum += geometry.axial(p.v);
    d.wall_margin = std::min(d.wall_margin, geometry.radius - norm(geometry.transverse(p.x)));
  }
  // Sweep in axial order; the axial gap bounds the 3D distance from below.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> axial(n);
  for (std::size_t i = 0; i < n; ++i) axial[i] = geometry.axial(config.particles[i].x);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return axial[a] < axial[b]; });
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (axial[order[b]] - axial[order[a]] >= d.min_pair_distance) break;
      const double r = norm(config.particles[order[a]].x - config.particles[order[b]].x);
      if (r < d.min_pair_distance) {
        d.min_pair_distance = r;
        d.closest_a = config.particles[order[a]].id;
        d.closest_b = config.particles[order[b]].id;
      }
    }
  }
  return d;
}

}  // namespace tubeflock
