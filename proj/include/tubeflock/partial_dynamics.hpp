#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tubeflock/dynamics.hpp"
#include "tubeflock/model.hpp"

namespace tubeflock {

/// n-partial run: particles initially within |x.n| <= n evolved in isolation.
struct PartialRun {
  int n = 0;
  std::vector<std::int64_t> ids;  // I_n, in configuration order
  Trajectory trajectory;
};

Configuration select_In(const Configuration& full, const TubeGeometry& geometry, int n);

/// One run per level. All levels share one step sequence and snapshot grid.
std::vector<PartialRun> run_ladder(const Configuration& full, std::span<const int> levels, const ModelParams& params,
                                   const IntegratorConfig& icfg, double T, double stride);

/// |x^(n)_id(t) - x^(m)_id(t)| + |v^(n)_id(t) - v^(m)_id(t)|.
double discrepancy(const PartialRun& run_n, const PartialRun& run_m, std::int64_t id, double t);

struct WindowSup {
  double value = 0.0;
  bool empty = false;  // no particle in I_k
};

/// sup of discrepancy over ids with initial |x.n| <= k.
WindowSup uk(const PartialRun& run_n, const PartialRun& run_m, const TubeGeometry& geometry, double k, double t);

/// rbar + 2 t V_max.
double horizon(double v_max, double t, double rbar);

struct ConvergenceRow {
  int n_low = 0;
  int n_high = 0;
  double k = 0.0;
  double t = 0.0;
  double u_k = 0.0;
  std::optional<double> ratio;  // u_k over the previous ladder pair at the same t
  double horizon = 0.0;
  bool empty_window = false;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  std::vector<int> levels;
  double k = 0.0;
  double T = 0.0;
  double v_max = 0.0;
  double horizon = 0.0;
  std::optional<int> n_of_k;  // smallest level with n > rbar + k + horizon
  std::vector<double> final_u;       // u_k at T per consecutive pair
  std::vector<double> final_ratios;  // consecutive ratios of final_u
  double decay_slope = 0.0;          // least squares slope of log u_k vs n_low
  bool all_zero = false;
  bool verdict = false;
};

/// Requires stride <= 0.05 T.
ConvergenceReport convergence_study(const Configuration& full, std::span<const int> levels, double k,
                                    const ModelParams& params, const IntegratorConfig& icfg, double T,
                                    double stride);

/// Position and velocity shift applied to one particle.
struct PhaseOffset {
  Vec3 dx;
  Vec3 dv;
};

struct LocalityResult {
  double max_discrepancy = 0.0;
  double horizon = 0.0;
  bool simulated = true;
};

/// Runs level n twice, as given and with one particle shifted, in lockstep;
/// returns the largest discrepancy over I_k and snapshot times. No distance
/// precondition.
LocalityResult twin_run_discrepancy(const Configuration& full, int n, std::int64_t perturb_id,
                                    const PhaseOffset& offset, double window_k, const ModelParams& params,
                                    const IntegratorConfig& icfg, double T, double stride);

/// twin_run_discrepancy with the precondition that the shifted particle
/// starts farther than window_k + horizon from the axis origin, the horizon
/// measured on the unperturbed run.
LocalityResult locality_probe(const Configuration& full, int n, std::int64_t perturb_id, const PhaseOffset& offset,
                              double window_k, const ModelParams& params, const IntegratorConfig& icfg, double T,
                              double stride);

}  // namespace tubeflock
