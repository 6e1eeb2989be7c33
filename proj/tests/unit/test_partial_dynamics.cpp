#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "support.hpp"
#include "tubeflock/errors.hpp"
#include "tubeflock/initial_data.hpp"
#include "tubeflock/partial_dynamics.hpp"

using namespace tubeflock;
using namespace tubeflock::testing;

namespace {

Configuration sampled(double half_span, std::uint64_t seed = 1) {
  SamplerSpec s;
  s.half_span = half_span;
  s.seed = seed;
  return sample_configuration(s, ModelParams{});
}

std::vector<std::int64_t> ids_of(const Configuration& c) {
  std::vector<std::int64_t> ids;
  for (const auto& p : c.particles) ids.push_back(p.id);
  return ids;
}

}  // namespace

TEST_CASE("select_In keeps the closed slab") {
  const TubeGeometry g;
  const auto c = config_of({particle(10, {-3, 0, 0}), particle(11, {0, 0, 0}), particle(12, {2, 0, 0}),
                            particle(13, {5, 0, 0})});
  CHECK(ids_of(select_In(c, g, 3)) == std::vector<std::int64_t>{10, 11, 12});
  CHECK(select_In(c, g, 100) == c);
  CHECK(select_In(Configuration{}, g, 3).empty());
  CHECK_THROWS_AS(select_In(c, g, 0), InvalidParameter);
}

TEST_CASE("a one-level ladder is a plain simulation") {
  const auto full = sampled(30.0);
  const ModelParams p;
  const int levels[] = {20};
  const auto runs = run_ladder(full, levels, p, IntegratorConfig{}, 0.5, 0.05);
  REQUIRE(runs.size() == 1);
  const auto direct = simulate(select_In(full, p.geometry, 20), p, IntegratorConfig{}, 0.5, 0.05);
  CHECK(runs[0].trajectory.snapshots == direct.snapshots);
  CHECK(runs[0].ids == ids_of(direct.initial()));
}

TEST_CASE("levels with an empty shell evolve identically") {
  auto full = sampled(30.0);
  std::erase_if(full.particles, [](const ParticleState& q) { return std::abs(q.x.x) > 14.0 && std::abs(q.x.x) <= 15.0; });
  const ModelParams p;
  const int levels[] = {14, 15};
  const auto runs = run_ladder(full, levels, p, IntegratorConfig{}, 0.5, 0.05);
  CHECK(runs[0].ids == runs[1].ids);
  CHECK(runs[0].trajectory.snapshots == runs[1].trajectory.snapshots);
  const auto u = uk(runs[0], runs[1], p.geometry, 14.0, 0.5);
  CHECK(u.value == 0.0);
}

TEST_CASE("ladder levels share the snapshot grid and nest their initial data") {
  const auto full = sampled(100.0);
  const ModelParams p;
  const int levels[] = {25, 50, 100};
  const auto runs = run_ladder(full, levels, p, IntegratorConfig{}, 0.2, 0.05);
  for (const auto& run : runs) {
    REQUIRE(run.trajectory.snapshots.size() == runs[0].trajectory.snapshots.size());
    for (std::size_t s = 0; s < run.trajectory.snapshots.size(); ++s) {
      CHECK(run.trajectory.snapshots[s].time == runs[0].trajectory.snapshots[s].time);
    }
  }
  for (std::size_t j = 1; j < runs.size(); ++j) {
    const auto inner = select_In(runs[j].trajectory.initial(), p.geometry, levels[j - 1]);
    CHECK(inner == runs[j - 1].trajectory.initial());
  }
}

TEST_CASE("ladder levels must increase") {
  const auto full = sampled(30.0);
  const int bad[] = {20, 20};
  CHECK_THROWS_AS(run_ladder(full, bad, ModelParams{}, IntegratorConfig{}, 0.5, 0.05), InvalidParameter);
  CHECK_THROWS_AS(run_ladder(full, std::span<const int>{}, ModelParams{}, IntegratorConfig{}, 0.5, 0.05),
                  InvalidParameter);
}

TEST_CASE("discrepancy and window sup basics") {
  const auto full = sampled(60.0);
  const ModelParams p;
  const int levels[] = {30, 60};
  const auto runs = run_ladder(full, levels, p, IntegratorConfig{}, 1.0, 0.05);
  for (auto id : runs[0].ids) CHECK(discrepancy(runs[0], runs[1], id, 0.0) == 0.0);
  const std::int64_t outsider = runs[1].ids.back();
  CHECK_THROWS_AS(discrepancy(runs[0], runs[1], outsider, 1.0), MembershipError);
  CHECK_THROWS_AS(discrepancy(runs[0], runs[1], runs[0].ids.front(), 0.333), InvalidParameter);
  CHECK(discrepancy(runs[0], runs[0], runs[0].ids.front(), 1.0) == 0.0);

  CHECK(uk(runs[0], runs[1], p.geometry, 10.0, 0.0).value == 0.0);
  double prev = 0.0;
  for (double k : {0.0, 5.0, 10.0, 20.0, 30.0}) {
    const auto u = uk(runs[0], runs[1], p.geometry, k, 1.0);
    CHECK(u.value >= prev);
    prev = u.value;
  }
  CHECK(prev > 0.0);
}

TEST_CASE("window sup over an empty window is flagged") {
  const auto c = config_of({particle(0, {5, 0, 0}), particle(1, {9, 0, 0})});
  const ModelParams p;
  const int levels[] = {10, 20};
  const auto runs = run_ladder(c, levels, p, IntegratorConfig{}, 0.1, 0.05);
  const auto u = uk(runs[0], runs[1], p.geometry, 1.0, 0.1);
  CHECK(u.empty);
  CHECK(u.value == 0.0);
}

TEST_CASE("interaction horizon") {
  CHECK(horizon(2.0, 0.0, 1.5) == 1.5);
  CHECK(horizon(1.0, 1.0, 1.0) == 3.0);
  CHECK(horizon(2.0, 1.0, 1.0) >= horizon(1.0, 1.0, 1.0));
  CHECK(horizon(1.0, 2.0, 1.0) >= horizon(1.0, 1.0, 1.0));
  CHECK(horizon(1.0, 1.0, 2.0) >= horizon(1.0, 1.0, 1.0));
  CHECK_THROWS_AS(horizon(-1.0, 1.0, 1.0), InvalidParameter);
}

TEST_CASE("free flow has no ladder dependence") {
  auto p = make_params(2.0, 0.0, 0.0, 2.0, 0.5, 0.0);
  p.geometry.wall_amplitude = 0.0;
  auto full = sampled(200.0);
  for (auto& q : full.particles) q.v = {q.v.x, 0.0, 0.0};
  const int levels[] = {40, 80, 160};
  const auto rep = convergence_study(full, levels, 10.0, p, IntegratorConfig{}, 1.0, 0.05);
  for (const auto& row : rep.rows) CHECK(row.u_k == 0.0);
  CHECK(rep.all_zero);
  CHECK(rep.verdict);
}

TEST_CASE("convergence study preconditions") {
  const auto full = sampled(30.0);
  const int small[] = {5, 10};
  CHECK_THROWS_AS(convergence_study(full, small, 10.0, ModelParams{}, IntegratorConfig{}, 1.0, 0.05),
                  HorizonTooLarge);
  const int ok[] = {25, 30};
  CHECK_THROWS_AS(convergence_study(full, ok, 1.0, ModelParams{}, IntegratorConfig{}, 1.0, 0.1), InvalidParameter);
  const int one[] = {30};
  CHECK_THROWS_AS(convergence_study(full, one, 1.0, ModelParams{}, IntegratorConfig{}, 1.0, 0.05), InvalidParameter);
}

TEST_CASE("convergence report layout") {
  const auto full = sampled(200.0);
  const int levels[] = {40, 80, 160};
  const auto rep = convergence_study(full, levels, 10.0, ModelParams{}, IntegratorConfig{}, 1.0, 0.05);
  CHECK(rep.rows.size() == 2 * 21);
  CHECK(rep.final_u.size() == 2);
  CHECK(rep.final_ratios.size() == 1);
  CHECK(rep.horizon == doctest::Approx(horizon(rep.v_max, 1.0, ModelParams{}.interaction_range())));
  REQUIRE(rep.n_of_k.has_value());
  CHECK(*rep.n_of_k > ModelParams{}.interaction_range() + 10.0 + rep.horizon);
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& row = rep.rows[i];
    CHECK(row.u_k >= 0.0);
    if (row.t == 0.0) CHECK(row.u_k == 0.0);
    if (i < 21) {
      CHECK(row.n_low == 40);
      CHECK_FALSE(row.ratio.has_value());
    } else {
      CHECK(row.n_low == 80);
      CHECK(row.t == rep.rows[i - 21].t);
      CHECK(row.ratio.has_value() == (rep.rows[i - 21].u_k > 0.0));
    }
  }
}

TEST_CASE("central particle is decoupled from a distant shell") {
  const auto full = sampled(100.0);
  const ModelParams p;
  const IntegratorConfig icfg;
  const int levels[] = {50, 100};
  const auto runs = run_ladder(full, levels, p, icfg, 1.0, 0.05);
  std::int64_t central = runs[0].ids.front();
  double best = INFINITY;
  for (const auto& q : runs[0].trajectory.initial().particles) {
    if (std::abs(q.x.x) < best) {
      best = std::abs(q.x.x);
      central = q.id;
    }
  }
  CHECK(discrepancy(runs[0], runs[1], central, 1.0) <= 100.0 * icfg.rtol);
}

TEST_CASE("locality probe") {
  const auto full = sampled(60.0);
  const ModelParams p;
  const IntegratorConfig icfg;
  const PhaseOffset kick{{}, {0.01, 0.0, 0.0}};

  SUBCASE("a particle outside the level is not simulated") {
    const std::int64_t outside = full.particles.back().id;
    const auto r = locality_probe(full, 30, outside, kick, 10.0, p, icfg, 1.0, 0.05);
    CHECK_FALSE(r.simulated);
    CHECK(r.max_discrepancy == 0.0);
  }
  SUBCASE("a perturbation inside the window is felt") {
    std::int64_t inside = -1;
    for (const auto& q : full.particles) {
      if (std::abs(q.x.x) < 2.0) inside = q.id;
    }
    REQUIRE(inside >= 0);
    const auto r = twin_run_discrepancy(full, 30, inside, kick, 10.0, p, icfg, 1.0, 0.05);
    CHECK(r.simulated);
    CHECK(r.max_discrepancy > 0.0);
    CHECK_THROWS_AS(locality_probe(full, 30, inside, kick, 10.0, p, icfg, 1.0, 0.05), InvalidParameter);
  }
  SUBCASE("a perturbation beyond twice the horizon stays local") {
    const auto base = twin_run_discrepancy(full, 60, full.particles.front().id, {}, 10.0, p, icfg, 1.0, 0.05);
    CHECK(base.max_discrepancy == 0.0);
    std::int64_t far = -1;
    for (const auto& q : full.particles) {
      if (q.x.x >= 10.0 + 2.0 * base.horizon) {
        far = q.id;
        break;
      }
    }
    REQUIRE(far >= 0);
    const auto r = locality_probe(full, 60, far, kick, 10.0, p, icfg, 1.0, 0.05);
    CHECK(r.simulated);
    CHECK(r.max_discrepancy <= 10.0 * icfg.rtol);
  }
}
