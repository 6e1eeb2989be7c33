#include "tubeflock/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "tubeflock/errors.hpp"

namespace tubeflock {

namespace {

constexpr double kMuStepFraction = 0.25;
constexpr double kRadiusFactor = 1.25;
constexpr double kStrictMargin = 1e-9;
constexpr double kMaxEnvelopeStride = 0.05;

double log_e_plus(double x) { return std::log(std::numbers::e + x); }

}  // namespace

void Window::validate() const {
  if (!(half_width > 0.0)) throw InvalidParameter("window: half-width must be positive");
}

double mollifier(double r) {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  return 1.0 - smoothstep5(r - 1.0);
}

double mollifier_derivative(double r) { return -smoothstep5_derivative(r - 1.0); }

double local_Q(const Configuration& config, const ModelParams& params, const Window& window) {
  window.validate();
  const auto e = particle_energies(config, params);
  double q = 0.0;
  for (std::size_t i = 0; i < config.size(); ++i) {
    if (std::abs(params.geometry.axial(config.particles[i].x) - window.center) <= window.half_width) {
      q += e[i] + 1.0;
    }
  }
  return q;
}

double mollified_W(const Configuration& config, const ModelParams& params, const Window& window) {
  window.validate();
  const auto e = particle_energies(config, params);
  double w = 0.0;
  for (std::size_t i = 0; i < config.size(); ++i) {
    const double y = std::abs(params.geometry.axial(config.particles[i].x) - window.center);
    w += mollifier(y / window.half_width) * (e[i] + 1.0);
  }
  return w;
}

LocalEnergyProfile::LocalEnergyProfile(const Configuration& config, const ModelParams& params) {
  const auto e = particle_energies(config, params);
  std::vector<std::size_t> order(config.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  axial_.resize(config.size());
  std::vector<double> axial(config.size());
  for (std::size_t i = 0; i < config.size(); ++i) axial[i] = params.geometry.axial(config.particles[i].x);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return axial[a] < axial[b]; });
  prefix_.assign(config.size() + 1, 0.0);
  for (std::size_t k = 0; k < order.size(); ++k) {
    axial_[k] = axial[order[k]];
    prefix_[k + 1] = prefix_[k] + e[order[k]] + 1.0;
  }
}

double LocalEnergyProfile::window_sum(double center, double half_width) const {
  const auto lo = std::lower_bound(axial_.begin(), axial_.end(), center - half_width);
  const auto hi = std::upper_bound(axial_.begin(), axial_.end(), center + half_width);
  if (hi <= lo) return 0.0;
  return prefix_[static_cast<std::size_t>(hi - axial_.begin())] -
         prefix_[static_cast<std::size_t>(lo - axial_.begin())];
}

std::vector<double> center_grid(double lo, double hi, double pad, double step) {
  const auto first = static_cast<long long>(std::floor((lo - pad) / step));
  const auto last = static_cast<long long>(std::ceil((hi + pad) / step));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(last - first + 1));
  for (long long k = first; k <= last; ++k) grid.push_back(static_cast<double>(k) * step);
  return grid;
}

SupQEstimate sup_Q(const Configuration& config, const ModelParams& params, const SupQOptions& options) {
  if (options.resolution < 1) throw InvalidParameter("sup_Q: resolution must be >= 1");
  SupQEstimate best;
  if (config.empty()) return best;

  const LocalEnergyProfile profile(config, params);
  const double rbar = params.interaction_range();
  const double step = kMuStepFraction * rbar / options.resolution;
  const double factor = std::pow(kRadiusFactor, 1.0 / options.resolution);
  const double span = profile.max_axial() - profile.min_axial() + 2.0 * rbar;

  auto consider = [&](double mu, double R) {
    const double value = profile.window_sum(mu, R) / (2.0 * R);
    if (value > best.value) best = {value, mu, R};
  };
  for (double mu : center_grid(profile.min_axial(), profile.max_axial(), rbar, step)) {
    const double r_min = log_e_plus(std::abs(mu)) * (1.0 + kStrictMargin);
    const double r_max = std::max(span, r_min);
    for (int j = 0;; ++j) {
      const double R = r_min * std::pow(factor, j);
      if (R > r_max) break;
      consider(mu, R);
    }
    for (double R : options.extra_half_widths) {
      if (R >= r_min) consider(mu, R);
    }
  }
  return best;
}

GrowthEnvelope growth_envelope(const Trajectory& traj, int n, double rbar) {
  if (traj.empty()) throw InvalidParameter("growth_envelope: empty trajectory");
  for (std::size_t s = 1; s < traj.snapshots.size(); ++s) {
    if (traj.snapshots[s].time - traj.snapshots[s - 1].time > kMaxEnvelopeStride * (1.0 + 1e-9)) {
      throw InvalidParameter("growth_envelope: snapshot stride must not exceed 0.05");
    }
  }
  GrowthEnvelope env;
  double v = 0.0;
  for (const auto& snap : traj.snapshots) {
    for (const auto& p : snap.particles) v = std::max(v, norm(p.v));
    const double m = 1.0 + v * v;
    double r;
    if (env.times.empty()) {
      r = (1.0 + rbar) * log_e_plus(static_cast<double>(n));
    } else {
      r = env.radius.back() + 0.5 * (snap.time - env.times.back()) * (env.speed_bound.back() + m);
    }
    env.times.push_back(snap.time);
    env.max_speed.push_back(v);
    env.speed_bound.push_back(m);
    env.radius.push_back(r);
  }
  return env;
}

double Lemma1Series::max_ratio() const {
  return ratio.empty() ? 0.0 : *std::max_element(ratio.begin(), ratio.end());
}

Lemma1Series lemma1_check(const Trajectory& traj, int n, const ModelParams& params, double q0) {
  if (!(q0 > 0.0)) throw UndefinedRatio("lemma1_check: Q(X) must be positive");
  const double rbar = params.interaction_range();
  const auto env = growth_envelope(traj, n, rbar);
  const double step = kMuStepFraction * rbar;
  Lemma1Series out;
  for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
    const LocalEnergyProfile profile(traj.snapshots[s], params);
    const double R = env.radius[s];
    double sup = 0.0;
    if (!profile.empty()) {
      for (double mu : center_grid(profile.min_axial(), profile.max_axial(), rbar, step)) {
        sup = std::max(sup, profile.window_sum(mu, R));
      }
    }
    out.times.push_back(env.times[s]);
    out.window_sup.push_back(sup);
    out.ratio.push_back(sup / (q0 * R));
  }
  return out;
}

std::vector<double> corollary1_check(const Trajectory& traj, int n) {
  const auto env = growth_envelope(traj, n, 0.0);
  const double scale = std::sqrt(log_e_plus(static_cast<double>(n)));
  std::vector<double> out;
  out.reserve(env.size());
  for (double v : env.max_speed) out.push_back(v / scale);
  return out;
}

}  // namespace tubeflock
