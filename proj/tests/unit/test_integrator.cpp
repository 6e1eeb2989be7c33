#include <doctest.h>

#include <cmath>
#include <vector>

#include "tubeflock/errors.hpp"
#include "tubeflock/integrator.hpp"

using namespace tubeflock;

namespace {

// y' = -y
class Decay : public OdeSystem {
 public:
  std::size_t dimension() const override { return 1; }
  bool derivative(std::span<const double> y, std::span<double> dydt) override {
    ++calls;
    dydt[0] = -y[0];
    return true;
  }
  int calls = 0;
};

// x'' = -x
class Oscillator : public OdeSystem {
 public:
  std::size_t dimension() const override { return 2; }
  bool derivative(std::span<const double> y, std::span<double> dydt) override {
    dydt[0] = y[1];
    dydt[1] = -y[0];
    return true;
  }
};

// Admissible only while y < 1; y' = 1.
class Barrier : public OdeSystem {
 public:
  std::size_t dimension() const override { return 1; }
  bool derivative(std::span<const double> y, std::span<double> dydt) override {
    if (y[0] >= 1.0) return false;
    dydt[0] = 1.0;
    return true;
  }
  std::string diagnose(std::span<const double> y) const override { return "y=" + std::to_string(y[0]); }
};

// Rejects any step moving y by more than eta.
class Guarded : public OdeSystem {
 public:
  std::size_t dimension() const override { return 1; }
  bool derivative(std::span<const double>, std::span<double> dydt) override {
    dydt[0] = 10.0;
    return true;
  }
  bool step_admissible(std::span<const double> from, std::span<const double> to, double eta) override {
    return std::abs(to[0] - from[0]) <= eta;
  }
};

}  // namespace

TEST_CASE("exponential decay within tolerance") {
  Decay sys;
  IntegratorConfig cfg;
  const double y0[] = {1.0};
  DormandPrince45 dp(sys, cfg, y0);
  dp.advance_to(3.0);
  CHECK(dp.time() == 3.0);
  CHECK(std::abs(dp.state()[0] - std::exp(-3.0)) < 1e-8);
  CHECK(dp.stats().accepted > 0);
  CHECK(dp.stats().min_step > 0.0);
}

TEST_CASE("targets are hit exactly and consecutively") {
  Oscillator sys;
  IntegratorConfig cfg;
  const double y0[] = {1.0, 0.0};
  DormandPrince45 dp(sys, cfg, y0);
  for (int k = 1; k <= 10; ++k) {
    dp.advance_to(0.1 * k);
    CHECK(dp.time() == 0.1 * k);
  }
  CHECK(std::abs(dp.state()[0] - std::cos(1.0)) < 1e-8);
  CHECK(std::abs(dp.state()[1] + std::sin(1.0)) < 1e-8);
}

TEST_CASE("max step is respected") {
  Decay sys;
  IntegratorConfig cfg;
  cfg.max_step = 0.01;
  const double y0[] = {1.0};
  DormandPrince45 dp(sys, cfg, y0);
  dp.advance_to(1.0);
  CHECK(dp.stats().accepted >= 100);
}

TEST_CASE("fixed-step solution converges at fifth order") {
  Oscillator sys;
  const double y0[] = {1.0, 0.0};
  double prev = 0.0;
  for (int k = 0; k < 4; ++k) {
    const std::size_t steps = 10u << k;
    const auto y = integrate_fixed_step(sys, y0, 2.0 / steps, steps);
    const double err = std::hypot(y[0] - std::cos(2.0), y[1] + std::sin(2.0));
    if (k > 0) CHECK(std::log2(prev / err) >= 4.7);
    prev = err;
  }
}

TEST_CASE("domain violations force rejection and finally a stiffness failure with diagnostics") {
  Barrier sys;
  IntegratorConfig cfg;
  const double y0[] = {0.0};
  DormandPrince45 dp(sys, cfg, y0);
  try {
    dp.advance_to(2.0);
    FAIL("expected a stiffness failure");
  } catch (const StiffnessFailure& e) {
    CHECK(e.time() < 1.0);
    CHECK(e.time() > 0.99);
    CHECK(std::string(e.what()).find("y=") != std::string::npos);
  }
  CHECK(dp.stats().rejected > 0);
}

TEST_CASE("step guard limits the displacement per step") {
  Guarded sys;
  IntegratorConfig cfg;
  cfg.eta = 0.5;
  cfg.initial_step = 1.0;
  cfg.max_step = 1.0;
  const double y0[] = {0.0};
  DormandPrince45 dp(sys, cfg, y0);
  const auto r = dp.step(1.0);
  CHECK(r.dt * 10.0 <= 0.5);
  CHECK(dp.stats().rejected > 0);
}

TEST_CASE("initial state outside the domain is rejected") {
  Barrier sys;
  const double y0[] = {2.0};
  CHECK_THROWS_AS(DormandPrince45(sys, IntegratorConfig{}, y0), OutOfDomain);
}

TEST_CASE("step budget exhaustion is a stiffness failure") {
  Decay sys;
  IntegratorConfig cfg;
  cfg.max_steps = 3;
  cfg.max_step = 0.01;
  const double y0[] = {1.0};
  DormandPrince45 dp(sys, cfg, y0);
  CHECK_THROWS_AS(dp.advance_to(1.0), StiffnessFailure);
}

TEST_CASE("integrator config validation") {
  IntegratorConfig c;
  CHECK_NOTHROW(c.validate());
  c.rtol = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
  c = IntegratorConfig{};
  c.atol = -1.0;
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
  c = IntegratorConfig{};
  c.eta = 1.0;
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
  c = IntegratorConfig{};
  c.max_step = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
  c = IntegratorConfig{};
  c.max_steps = 0;
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
}

TEST_CASE("first-same-as-last saves one evaluation per step") {
  Decay sys;
  IntegratorConfig cfg;
  cfg.rtol = 1e-3;
  cfg.atol = 1e-6;
  const double y0[] = {1.0};
  DormandPrince45 dp(sys, cfg, y0);
  dp.advance_to(1.0);
  const auto& st = dp.stats();
  CHECK(sys.calls == 1 + 6 * static_cast<int>(st.accepted + st.rejected));
}
