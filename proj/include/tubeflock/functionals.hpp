#pragma once

#include <span>
#include <vector>

#include "tubeflock/dynamics.hpp"
#include "tubeflock/model.hpp"

namespace tubeflock {

/// Axial window |x.n - center| <= half_width.
struct Window {
  double center = 0.0;
  double half_width = 1.0;

  void validate() const;
};

/// Smooth cutoff: 1 on [0, 1], quintic descent on [1, 2], 0 beyond.
double mollifier(double r);
double mollifier_derivative(double r);

/// Sum over particles in the window of v^2/2 + (1/2) sum_j U + Theta + 1;
/// the pair sum runs over all particles, windowed or not.
double local_Q(const Configuration& config, const ModelParams& params, const Window& window);
/// Same summand weighted by f(|x.n - center| / half_width).
double mollified_W(const Configuration& config, const ModelParams& params, const Window& window);

/// Sorted axial coordinates with prefix sums of the local-Q summand, for
/// O(log N) window queries.
class LocalEnergyProfile {
 public:
  LocalEnergyProfile(const Configuration& config, const ModelParams& params);

  double window_sum(double center, double half_width) const;
  bool empty() const { return axial_.empty(); }
  double min_axial() const { return axial_.front(); }
  double max_axial() const { return axial_.back(); }

 private:
  std::vector<double> axial_;
  std::vector<double> prefix_;
};

/// Centers k * step (k integer) covering [lo - pad, hi + pad].
std::vector<double> center_grid(double lo, double hi, double pad, double step);

struct SupQOptions {
  int resolution = 1;  // mu step rbar / (4 res), R factor 1.25^(1/res)
  // Half-widths tried in addition to the geometric grid, wherever admissible.
  std::vector<double> extra_half_widths;
};

struct SupQEstimate {
  double value = 0.0;
  double center = 0.0;
  double half_width = 0.0;
};

/// Grid lower estimate of sup_mu sup_{R > log(e + |mu|)} Q(mu, R) / (2R).
SupQEstimate sup_Q(const Configuration& config, const ModelParams& params, const SupQOptions& options = {});

struct GrowthEnvelope {
  std::vector<double> times;
  std::vector<double> max_speed;    // V_n(t), running max
  std::vector<double> speed_bound;  // M_n(t) = 1 + V_n(t)^2
  std::vector<double> radius;       // R_n(t), trapezoid rule

  std::size_t size() const { return times.size(); }
};

/// Requires snapshot gaps of at most 0.05.
GrowthEnvelope growth_envelope(const Trajectory& traj, int n, double rbar);

struct Lemma1Series {
  std::vector<double> times;
  std::vector<double> window_sup;  // sup_mu Q(X(t); mu, R_n(t))
  std::vector<double> ratio;       // window_sup / (Q0 R_n(t))

  double max_ratio() const;
};

Lemma1Series lemma1_check(const Trajectory& traj, int n, const ModelParams& params, double q0);

/// V_n(t) / sqrt(log(e + n)) on the snapshot grid.
std::vector<double> corollary1_check(const Trajectory& traj, int n);

}  // namespace tubeflock
