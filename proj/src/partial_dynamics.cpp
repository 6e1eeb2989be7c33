#include "tubeflock/partial_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "tubeflock/errors.hpp"
#include "tubeflock/functionals.hpp"

namespace tubeflock {

namespace {

using IdIndex = std::unordered_map<std::int64_t, std::size_t>;

IdIndex index_ids(const Configuration& c) {
  IdIndex map;
  map.reserve(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) map.emplace(c.particles[i].id, i);
  return map;
}

std::size_t snapshot_at(const Trajectory& traj, double t) {
  for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
    if (traj.snapshots[s].time == t) return s;
  }
  std::ostringstream msg;
  msg << "time " << t << " is not on the snapshot grid";
  throw InvalidParameter(msg.str());
}

double state_distance(const ParticleState& a, const ParticleState& b) { return norm(a.x - b.x) + norm(a.v - b.v); }

// Largest speed over all snapshots with time <= t.
double max_speed_until(const Trajectory& traj, double t) {
  double v = 0.0;
  for (const auto& snap : traj.snapshots) {
    if (snap.time > t) break;
    for (const auto& p : snap.particles) v = std::max(v, norm(p.v));
  }
  return v;
}

// Window sup of discrepancies over ids in `window`, at snapshot s of both runs.
double window_sup_at(const Trajectory& a, const Trajectory& b, const IdIndex& in_a, const IdIndex& in_b,
                     std::span<const std::int64_t> window, std::size_t s) {
  double sup = 0.0;
  for (std::int64_t id : window) {
    sup = std::max(sup, state_distance(a.snapshots[s].particles[in_a.at(id)], b.snapshots[s].particles[in_b.at(id)]));
  }
  return sup;
}

std::vector<std::int64_t> window_ids(const Configuration& initial, const TubeGeometry& geometry, double k) {
  std::vector<std::int64_t> ids;
  for (const auto& p : initial.particles) {
    if (std::abs(geometry.axial(p.x)) <= k) ids.push_back(p.id);
  }
  return ids;
}

}  // namespace

Configuration select_In(const Configuration& full, const TubeGeometry& geometry, int n) {
  if (n < 1) throw InvalidParameter("select_In: n must be >= 1");
  Configuration out;
  out.time = full.time;
  for (const auto& p : full.particles) {
    if (std::abs(geometry.axial(p.x)) <= static_cast<double>(n)) out.particles.push_back(p);
  }
  return out;
}

std::vector<PartialRun> run_ladder(const Configuration& full, std::span<const int> levels, const ModelParams& params,
                                   const IntegratorConfig& icfg, double T, double stride) {
  if (levels.empty()) throw InvalidParameter("run_ladder: empty ladder");
  for (std::size_t j = 0; j < levels.size(); ++j) {
    if (levels[j] < 1 || (j > 0 && levels[j] <= levels[j - 1])) {
      throw InvalidParameter("run_ladder: levels must be positive and strictly increasing");
    }
  }
  std::vector<Configuration> initials;
  for (int n : levels) initials.push_back(select_In(full, params.geometry, n));
  auto trajectories = simulate_lockstep(initials, params, icfg, T, stride);

  std::vector<PartialRun> runs(levels.size());
  for (std::size_t j = 0; j < levels.size(); ++j) {
    runs[j].n = levels[j];
    for (const auto& p : initials[j].particles) runs[j].ids.push_back(p.id);
    runs[j].trajectory = std::move(trajectories[j]);
  }
  return runs;
}

double discrepancy(const PartialRun& run_n, const PartialRun& run_m, std::int64_t id, double t) {
  const auto& a = run_n.trajectory.snapshots[snapshot_at(run_n.trajectory, t)];
  const auto& b = run_m.trajectory.snapshots[snapshot_at(run_m.trajectory, t)];
  auto find = [&](const Configuration& c, int level) -> const ParticleState& {
    for (const auto& p : c.particles) {
      if (p.id == id) return p;
    }
    throw MembershipError("particle " + std::to_string(id) + " is not in I_" + std::to_string(level));
  };
  return state_distance(find(a, run_n.n), find(b, run_m.n));
}

WindowSup uk(const PartialRun& run_n, const PartialRun& run_m, const TubeGeometry& geometry, double k, double t) {
  const auto ids = window_ids(run_n.trajectory.initial(), geometry, k);
  if (ids.empty()) return {0.0, true};
  const auto in_n = index_ids(run_n.trajectory.initial());
  const auto in_m = index_ids(run_m.trajectory.initial());
  for (std::int64_t id : ids) {
    if (!in_m.contains(id)) {
      throw MembershipError("particle " + std::to_string(id) + " is not in I_" + std::to_string(run_m.n));
    }
  }
  const std::size_t sn = snapshot_at(run_n.trajectory, t);
  const std::size_t sm = snapshot_at(run_m.trajectory, t);
  if (sn != sm) throw InvalidParameter("uk: runs have different snapshot grids");
  return {window_sup_at(run_n.trajectory, run_m.trajectory, in_n, in_m, ids, sn), false};
}

double horizon(double v_max, double t, double rbar) {
  if (!(v_max >= 0.0)) throw InvalidParameter("horizon: speed must be non-negative");
  return rbar + 2.0 * t * v_max;
}

ConvergenceReport convergence_study(const Configuration& full, std::span<const int> levels, double k,
                                    const ModelParams& params, const IntegratorConfig& icfg, double T,
                                    double stride) {
  if (levels.size() < 2) throw InvalidParameter("convergence_study: need at least two ladder levels");
  if (T > 0.0 && stride > 0.05 * T * (1.0 + 1e-12)) {
    throw InvalidParameter("convergence_study: snapshot stride must not exceed 0.05 T");
  }
  const double rbar = params.interaction_range();
  const auto runs = run_ladder(full, levels, params, icfg, T, stride);

  ConvergenceReport rep;
  rep.levels.assign(levels.begin(), levels.end());
  rep.k = k;
  rep.T = T;
  for (const auto& run : runs) rep.v_max = std::max(rep.v_max, max_speed_until(run.trajectory, T));
  rep.horizon = horizon(rep.v_max, T, rbar);
  if (!(k + rep.horizon < static_cast<double>(levels.front()))) {
    std::ostringstream msg;
    msg << "k + horizon = " << k + rep.horizon << " is not below the smallest level " << levels.front()
        << "; use a larger ladder";
    throw HorizonTooLarge(msg.str());
  }
  for (int n : levels) {
    if (static_cast<double>(n) > rbar + k + rep.horizon) {
      rep.n_of_k = n;
      break;
    }
  }

  const auto& grid = runs.front().trajectory.snapshots;
  std::vector<double> prev_u(grid.size(), 0.0);
  for (std::size_t j = 0; j + 1 < runs.size(); ++j) {
    const auto ids = window_ids(runs[j].trajectory.initial(), params.geometry, k);
    const auto in_a = index_ids(runs[j + 1].trajectory.initial());
    const auto in_b = index_ids(runs[j].trajectory.initial());
    for (std::size_t s = 0; s < grid.size(); ++s) {
      ConvergenceRow row;
      row.n_low = levels[j];
      row.n_high = levels[j + 1];
      row.k = k;
      row.t = grid[s].time;
      row.empty_window = ids.empty();
      row.u_k = ids.empty() ? 0.0 : window_sup_at(runs[j + 1].trajectory, runs[j].trajectory, in_a, in_b, ids, s);
      if (j > 0 && prev_u[s] > 0.0) row.ratio = row.u_k / prev_u[s];
      double v = 0.0;
      for (const auto& run : runs) v = std::max(v, max_speed_until(run.trajectory, row.t));
      row.horizon = horizon(v, row.t, rbar);
      prev_u[s] = row.u_k;
      rep.rows.push_back(row);
    }
    rep.final_u.push_back(prev_u.back());
  }

  rep.all_zero = std::all_of(rep.final_u.begin(), rep.final_u.end(), [](double u) { return u == 0.0; });
  for (std::size_t j = 1; j < rep.final_u.size(); ++j) {
    const double prev = rep.final_u[j - 1];
    rep.final_ratios.push_back(prev > 0.0 ? rep.final_u[j] / prev : (rep.final_u[j] == 0.0 ? 0.0 : INFINITY));
  }

  // Zeros (exact agreement) enter the fit at the smallest normal double.
  {
    const double floor = std::numeric_limits<double>::min();
    const std::size_t m = rep.final_u.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t j = 0; j < m; ++j) {
      const double x = levels[j];
      const double y = std::log(std::max(rep.final_u[j], floor));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double denom = m * sxx - sx * sx;
    rep.decay_slope = denom > 0.0 ? (m * sxy - sx * sy) / denom : 0.0;
  }

  if (rep.all_zero) {
    rep.verdict = true;
  } else {
    bool ok = rep.decay_slope < 0.0;
    for (std::size_t j = 1; j < rep.final_u.size(); ++j) ok = ok && rep.final_u[j] < rep.final_u[j - 1];
    if (!rep.final_ratios.empty()) ok = ok && rep.final_ratios.back() < 0.1;
    for (std::size_t j = 1; j < rep.final_ratios.size(); ++j) {
      const double a = rep.final_ratios[j - 1];
      const double b = rep.final_ratios[j];
      ok = ok && (b < a || (a == 0.0 && b == 0.0));
    }
    rep.verdict = ok;
  }
  return rep;
}

LocalityResult twin_run_discrepancy(const Configuration& full, int n, std::int64_t perturb_id,
                                    const PhaseOffset& offset, double window_k, const ModelParams& params,
                                    const IntegratorConfig& icfg, double T, double stride) {
  const Configuration base = select_In(full, params.geometry, n);
  Configuration shifted = base;
  auto it = std::find_if(shifted.particles.begin(), shifted.particles.end(),
                         [&](const ParticleState& p) { return p.id == perturb_id; });
  if (it == shifted.particles.end()) return {0.0, 0.0, false};
  it->x += offset.dx;
  it->v += offset.dv;

  const Configuration pair[] = {base, shifted};
  const auto trajs = simulate_lockstep(pair, params, icfg, T, stride);
  LocalityResult res;
  res.horizon = horizon(max_speed_until(trajs[0], T), T, params.interaction_range());
  const auto ids = window_ids(base, params.geometry, window_k);
  const auto in_a = index_ids(base);
  for (std::size_t s = 0; s < trajs[0].snapshots.size(); ++s) {
    res.max_discrepancy = std::max(res.max_discrepancy, window_sup_at(trajs[0], trajs[1], in_a, in_a, ids, s));
  }
  return res;
}

LocalityResult locality_probe(const Configuration& full, int n, std::int64_t perturb_id, const PhaseOffset& offset,
                              double window_k, const ModelParams& params, const IntegratorConfig& icfg, double T,
                              double stride) {
  auto res = twin_run_discrepancy(full, n, perturb_id, offset, window_k, params, icfg, T, stride);
  if (!res.simulated) return res;
  double axial = 0.0;
  for (const auto& p : full.particles) {
    if (p.id == perturb_id) axial = params.geometry.axial(p.x);
  }
  if (!(std::abs(axial) > window_k + res.horizon)) {
    std::ostringstream msg;
    msg << "locality_probe: perturbed particle at axial " << axial << " is within window_k + horizon = "
        << window_k + res.horizon;
    throw InvalidParameter(msg.str());
  }
  return res;
}

}  // namespace tubeflock
