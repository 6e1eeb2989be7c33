#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tubeflock {

struct IntegratorConfig {
  double rtol = 1e-8;
  double atol = 1e-10;
  double initial_step = 1e-3;
  double max_step = 0.1;
  double eta = 0.2;  // displacement safety factor
  std::size_t max_steps = 10'000'000;

  void validate() const;
};

struct IntegratorStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  double min_step = 0.0;  // smallest accepted step; 0 before the first step

  friend bool operator==(const IntegratorStats&, const IntegratorStats&) = default;
};

/// First-order system dy/dt = f(y) seen by the integrator.
class OdeSystem {
 public:
  virtual ~OdeSystem() = default;

  virtual std::size_t dimension() const = 0;
  /// Writes f(y). Returns false when y lies outside the admissible domain
  /// (the step that produced it is then rejected).
  virtual bool derivative(std::span<const double> y, std::span<double> dydt) = 0;
  /// Step guard beyond the error test; default accepts everything.
  virtual bool step_admissible(std::span<const double> /*from*/, std::span<const double> /*to*/,
                               double /*eta*/) {
    return true;
  }
  /// Human-readable state summary attached to integration failures.
  virtual std::string diagnose(std::span<const double> /*y*/) const { return {}; }
};

struct StepReport {
  double dt = 0.0;
  double error = 0.0;  // scaled error norm of the accepted step, <= 1
};

/// Dormand-Prince 5(4) with FSAL, max-norm error control and step halving
/// on rejection. The 5th order solution is propagated.
class DormandPrince45 {
 public:
  DormandPrince45(OdeSystem& system, const IntegratorConfig& config, std::span<const double> y0,
                  double t0 = 0.0);

  /// One accepted step of length at most `h_limit`. When the limit is hit
  /// exactly the returned dt equals h_limit bit for bit.
  StepReport step(double h_limit);
  /// Steps until time() == t_end exactly.
  void advance_to(double t_end);

  double time() const { return t_; }
  std::span<const double> state() const { return y_; }
  const IntegratorStats& stats() const { return stats_; }

 private:
  bool attempt(double h, double& err);

  OdeSystem& system_;
  IntegratorConfig config_;
  double t_;
  double h_;
  std::vector<double> y_;
  std::vector<double> y_new_;
  std::vector<double> stage_;
  std::vector<std::vector<double>> k_;
  IntegratorStats stats_;
};

/// Fixed-step propagation with the 5th order Dormand-Prince weights; throws
/// if the system leaves its domain. Used for convergence-order studies.
std::vector<double> integrate_fixed_step(OdeSystem& system, std::span<const double> y0, double h,
                                         std::size_t steps);

}  // namespace tubeflock
