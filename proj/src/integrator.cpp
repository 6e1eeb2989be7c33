#include "tubeflock/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tubeflock/errors.hpp"

namespace tubeflock {

namespace {

constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                 b6 = 11.0 / 84.0;
// 5th minus embedded 4th order weights.
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

constexpr double kUnderflowFraction = 1e-14;

// Stages 2..6 and the 5th order solution. k[0] must hold f(y).
bool dp_stages(OdeSystem& sys, std::span<const double> y, double h, std::vector<std::vector<double>>& k,
               std::vector<double>& stage, std::vector<double>& y_new) {
  const std::size_t n = y.size();
  for (std::size_t i = 0; i < n; ++i) stage[i] = y[i] + h * a21 * k[0][i];
  if (!sys.derivative(stage, k[1])) return false;
  for (std::size_t i = 0; i < n; ++i) stage[i] = y[i] + h * (a31 * k[0][i] + a32 * k[1][i]);
  if (!sys.derivative(stage, k[2])) return false;
  for (std::size_t i = 0; i < n; ++i) stage[i] = y[i] + h * (a41 * k[0][i] + a42 * k[1][i] + a43 * k[2][i]);
  if (!sys.derivative(stage, k[3])) return false;
  for (std::size_t i = 0; i < n; ++i) {
    stage[i] = y[i] + h * (a51 * k[0][i] + a52 * k[1][i] + a53 * k[2][i] + a54 * k[3][i]);
  }
  if (!sys.derivative(stage, k[4])) return false;
  for (std::size_t i = 0; i < n; ++i) {
    stage[i] = y[i] + h * (a61 * k[0][i] + a62 * k[1][i] + a63 * k[2][i] + a64 * k[3][i] + a65 * k[4][i]);
  }
  if (!sys.derivative(stage, k[5])) return false;
  for (std::size_t i = 0; i < n; ++i) {
    y_new[i] = y[i] + h * (b1 * k[0][i] + b3 * k[2][i] + b4 * k[3][i] + b5 * k[4][i] + b6 * k[5][i]);
  }
  return true;
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rtol > 0.0) || !(atol > 0.0)) throw InvalidParameter("integrator: tolerances must be positive");
  if (!(initial_step > 0.0) || !(max_step > 0.0)) throw InvalidParameter("integrator: steps must be positive");
  if (!(eta > 0.0 && eta < 1.0)) throw InvalidParameter("integrator: eta must lie in (0, 1)");
  if (max_steps == 0) throw InvalidParameter("integrator: max_steps must be positive");
}

DormandPrince45::DormandPrince45(OdeSystem& system, const IntegratorConfig& config,
                                 std::span<const double> y0, double t0)
    : system_(system),
      config_(config),
      t_(t0),
      h_(std::min(config.initial_step, config.max_step)),
      y_(y0.begin(), y0.end()),
      y_new_(y0.size()),
      stage_(y0.size()),
      k_(7, std::vector<double>(y0.size())) {
  config_.validate();
  if (!system_.derivative(y_, k_[0])) {
    throw OutOfDomain("integrator: initial state outside the admissible domain");
  }
}

bool DormandPrince45::attempt(double h, double& err) {
  if (!dp_stages(system_, y_, h, k_, stage_, y_new_)) return false;
  if (!system_.derivative(y_new_, k_[6])) return false;
  err = 0.0;
  for (std::size_t i = 0; i < y_.size(); ++i) {
    const double e = h * (e1 * k_[0][i] + e3 * k_[2][i] + e4 * k_[3][i] + e5 * k_[4][i] + e6 * k_[5][i] +
                          e7 * k_[6][i]);
    const double scale = config_.atol + config_.rtol * std::max(std::abs(y_[i]), std::abs(y_new_[i]));
    err = std::max(err, std::abs(e) / scale);
  }
  if (!(err <= 1.0)) return false;
  return system_.step_admissible(y_, y_new_, config_.eta);
}

StepReport DormandPrince45::step(double h_limit) {
  if (stats_.accepted >= config_.max_steps) {
    throw StiffnessFailure("integrator: step budget exhausted at t=" + std::to_string(t_), t_);
  }
  const double floor = std::max(kUnderflowFraction * config_.initial_step,
                                16.0 * std::numeric_limits<double>::epsilon() * std::abs(t_));
  double h = std::min({h_, config_.max_step, h_limit});
  bool rejected_once = false;
  double err = 0.0;
  while (!attempt(h, err)) {
    ++stats_.rejected;
    rejected_once = true;
    h *= 0.5;
    if (h < floor) {
      std::ostringstream msg;
      msg << "integrator: step size underflow at t=" << t_ << " (h=" << h << ")";
      const std::string diag = system_.diagnose(y_);
      if (!diag.empty()) msg << "; " << diag;
      throw StiffnessFailure(msg.str(), t_);
    }
  }

  const bool hit_limit = (h == h_limit);
  t_ += h;
  std::swap(y_, y_new_);
  std::swap(k_[0], k_[6]);
  ++stats_.accepted;
  stats_.min_step = stats_.accepted == 1 ? h : std::min(stats_.min_step, h);

  double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
  if (rejected_once) factor = std::min(factor, 1.0);
  const double proposal = h * factor;
  // After a step clipped to a target, keep the larger of the proposal and the pre-clip size.
  h_ = hit_limit && !rejected_once ? std::max(proposal, h_) : proposal;
  h_ = std::min(h_, config_.max_step);
  return {h, err};
}

void DormandPrince45::advance_to(double t_end) {
  while (t_ < t_end) {
    const double remaining = t_end - t_;
    if (step(remaining).dt == remaining) t_ = t_end;
  }
}

std::vector<double> integrate_fixed_step(OdeSystem& system, std::span<const double> y0, double h,
                                         std::size_t steps) {
  const std::size_t n = y0.size();
  std::vector<double> y(y0.begin(), y0.end()), y_new(n), stage(n);
  std::vector<std::vector<double>> k(6, std::vector<double>(n));
  for (std::size_t s = 0; s < steps; ++s) {
    if (!system.derivative(y, k[0]) || !dp_stages(system, y, h, k, stage, y_new)) {
      throw OutOfDomain("fixed-step integration left the admissible domain");
    }
    std::swap(y, y_new);
  }
  return y;
}

}  // namespace tubeflock
