#include <doctest.h>

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "support.hpp"
#include "tubeflock/dynamics.hpp"
#include "tubeflock/errors.hpp"
#include "tubeflock/initial_data.hpp"

using namespace tubeflock;
using namespace tubeflock::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "tubeflock_unit";
  fs::create_directories(dir);
  return dir / name;
}

bool bit_equal(const Configuration& a, const Configuration& b) {
  if (a.size() != b.size() || std::bit_cast<std::uint64_t>(a.time) != std::bit_cast<std::uint64_t>(b.time)) {
    return false;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& p = a.particles[i];
    const auto& q = b.particles[i];
    if (p.id != q.id) return false;
    const double lhs[] = {p.x.x, p.x.y, p.x.z, p.v.x, p.v.y, p.v.z};
    const double rhs[] = {q.x.x, q.x.y, q.x.z, q.v.x, q.v.y, q.v.z};
    for (int k = 0; k < 6; ++k) {
      if (std::bit_cast<std::uint64_t>(lhs[k]) != std::bit_cast<std::uint64_t>(rhs[k])) return false;
    }
  }
  return true;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

}  // namespace

TEST_CASE("keyed uniforms lie in the open unit interval and depend on every key") {
  double lo = 1.0, hi = 0.0;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const double u = keyed_uniform(1, i, 2);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  CHECK(keyed_uniform(1, 2, 3, 4) != keyed_uniform(2, 2, 3, 4));
  CHECK(keyed_uniform(1, 2, 3, 4) != keyed_uniform(1, 3, 3, 4));
  CHECK(keyed_uniform(1, 2, 3, 4) != keyed_uniform(1, 2, 4, 4));
  CHECK(keyed_uniform(1, 2, 3, 4) != keyed_uniform(1, 2, 3, 5));
}

TEST_CASE("sampling is deterministic") {
  SamplerSpec s;
  s.half_span = 50.0;
  CHECK(sample_configuration(s, ModelParams{}) == sample_configuration(s, ModelParams{}));
  SamplerSpec t = s;
  t.seed = 2;
  CHECK_FALSE(sample_configuration(s, ModelParams{}) == sample_configuration(t, ModelParams{}));
}

TEST_CASE("Poisson counts have the right mean and variance") {
  SamplerSpec s;
  s.half_span = 20.0;  // expected count 40
  s.min_separation = 0.05;
  double sum = 0.0, sum2 = 0.0;
  const int seeds = 1000;
  for (int k = 0; k < seeds; ++k) {
    s.seed = 1000 + k;
    const double n = static_cast<double>(sample_configuration(s, ModelParams{}).size());
    sum += n;
    sum2 += n * n;
  }
  const double mean = sum / seeds;
  const double var = sum2 / seeds - mean * mean;
  CHECK(std::abs(mean - 40.0) <= 3.0 * std::sqrt(40.0));
  CHECK(std::abs(mean - 40.0) <= 4.0 * std::sqrt(40.0 / seeds));
  CHECK(var == doctest::Approx(40.0).epsilon(0.2));
}

TEST_CASE("sampled configurations respect separation, confinement and ordering") {
  SamplerSpec s;
  s.half_span = 80.0;
  const ModelParams p;
  const auto c = sample_configuration(s, p);
  const auto d = diagnostics(c, p.geometry);
  CHECK(d.min_pair_distance >= s.min_separation);
  CHECK(d.wall_margin >= p.geometry.radius * (1.0 - s.transverse_cap) - 1e-15);
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(c.particles[i].id == static_cast<std::int64_t>(i));
    CHECK(std::abs(c.particles[i].x.x) <= s.half_span);
    if (i > 0) CHECK(c.particles[i].x.x >= c.particles[i - 1].x.x);
  }
  CHECK_NOTHROW(validate_configuration(c, p.geometry));
}

TEST_CASE("zero velocity scale gives resting particles") {
  for (bool growth : {false, true}) {
    SamplerSpec s;
    s.half_span = 30.0;
    s.velocity_scale = 0.0;
    s.log_growth = growth;
    for (const auto& q : sample_configuration(s, ModelParams{}).particles) CHECK(q.v == Vec3{});
  }
}

TEST_CASE("log growth scales velocities by the local logarithm") {
  SamplerSpec s;
  s.half_span = 40.0;
  const auto plain = sample_configuration(s, ModelParams{});
  s.log_growth = true;
  const auto grown = sample_configuration(s, ModelParams{});
  REQUIRE(plain.size() == grown.size());
  for (std::size_t i = 0; i < plain.size(); ++i) {
    CHECK(plain.particles[i].x == grown.particles[i].x);
    const double f = std::sqrt(std::log(std::numbers::e + std::abs(plain.particles[i].x.x)));
    CHECK(grown.particles[i].v.x == doctest::Approx(plain.particles[i].v.x * f).epsilon(1e-14));
  }
}

TEST_CASE("fixed counts and infeasible densities") {
  SamplerSpec s;
  s.half_span = 5.0;
  s.count = 20;
  CHECK(sample_configuration(s, ModelParams{}).size() == 20);
  s.count = 2000;
  s.min_separation = 0.5;
  CHECK_THROWS_AS(sample_configuration(s, ModelParams{}), InfeasibleDensity);
}

TEST_CASE("sampler validation") {
  const TubeGeometry g;
  SamplerSpec s;
  CHECK_NOTHROW(s.validate(g));
  s.density = 0.0;
  CHECK_THROWS_AS(s.validate(g), InvalidParameter);
  s = SamplerSpec{};
  s.min_separation = 1.0;
  CHECK_THROWS_AS(s.validate(g), InvalidParameter);
  s = SamplerSpec{};
  s.transverse_cap = 1.0;
  CHECK_THROWS_AS(s.validate(g), InvalidParameter);
  s = SamplerSpec{};
  s.velocity_scale = -1.0;
  CHECK_THROWS_AS(s.validate(g), InvalidParameter);
  s = SamplerSpec{};
  s.half_span = 0.0;
  CHECK_THROWS_AS(s.validate(g), InvalidParameter);
}

TEST_CASE("membership report") {
  const ModelParams p;
  const auto empty = verify_membership(Configuration{}, p);
  CHECK(empty.sup_q == 0.0);
  CHECK(empty.count == 0);
  CHECK(empty.finite());
  const auto one = verify_membership(config_of({particle(0, {0, 0, 0})}), p);
  CHECK(std::abs(one.sup_q - 0.5) <= 0.025);
  for (std::uint64_t seed : {1, 2, 3}) {
    SamplerSpec s;
    s.seed = seed;
    s.half_span = 50.0;
    s.log_growth = seed == 3;
    const auto r = verify_membership(sample_configuration(s, p), p);
    CHECK(r.finite());
    CHECK(r.sup_q > 0.0);
    CHECK(r.min_pair_separation >= s.min_separation);
  }
}

TEST_CASE("parameter digests distinguish parameters") {
  ModelParams a;
  ModelParams b;
  CHECK(params_digest(a) == params_digest(b));
  CHECK(params_digest(a).size() == 16);
  b.kernel.amplitude = 1.5;
  CHECK(params_digest(a) != params_digest(b));
}

TEST_CASE("snapshot round trip is bit exact") {
  SamplerSpec s;
  s.half_span = 50.0;
  const ModelParams p;
  auto c = sample_configuration(s, p);
  c.time = 0.1 + 0.2;
  const auto path = scratch("roundtrip.jsonl");
  save_snapshot(c, p, path);
  const auto snap = load_snapshot(path);
  CHECK(bit_equal(snap.config, c));
  CHECK(snap.params_digest == params_digest(p));
  CHECK(snap.geometry.radius == p.geometry.radius);

  save_snapshot(Configuration{}, p, path);
  CHECK(load_snapshot(path).config.empty());
}

TEST_CASE("snapshot round trip on a million random particles") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::uint64_t> bits;
  auto any_double = [&] {
    for (;;) {
      const double d = std::bit_cast<double>(bits(rng));
      if (std::isfinite(d)) return d;
    }
  };
  Configuration c;
  c.particles.resize(1'000'000);
  for (std::size_t i = 0; i < c.size(); ++i) {
    c.particles[i] = {static_cast<std::int64_t>(bits(rng) >> 1), {any_double(), any_double(), any_double()},
                      {any_double(), any_double(), any_double()}};
  }
  const auto path = scratch("million.jsonl");
  save_snapshot(c, ModelParams{}, path);
  CHECK(bit_equal(load_snapshot(path).config, c));
  fs::remove(path);
}

TEST_CASE("snapshot parse errors name the line") {
  const auto path = scratch("broken.jsonl");
  const ModelParams p;
  SamplerSpec s;
  s.count = 3;
  s.half_span = 5.0;
  save_snapshot(sample_configuration(s, p), p, path);
  std::ifstream in(path);
  std::string header, l1, l2;
  std::getline(in, header);
  std::getline(in, l1);
  std::getline(in, l2);
  in.close();

  write_text(path, header + "\n" + l1 + "\n" + l2.substr(0, l2.size() / 2) + "\n");
  try {
    load_snapshot(path);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }

  write_text(path, header + "\n" + l1 + "\n" + l2 + "\n");
  try {
    load_snapshot(path);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }

  write_text(path, "not json\n");
  CHECK_THROWS_AS(load_snapshot(path), ParseError);
  write_text(path, "");
  CHECK_THROWS_AS(load_snapshot(path), ParseError);
  CHECK_THROWS_AS(load_snapshot(scratch("does_not_exist.jsonl")), Error);
}

TEST_CASE("snapshot version mismatch") {
  const auto path = scratch("version.jsonl");
  save_snapshot(Configuration{}, ModelParams{}, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  in.close();
  const auto pos = header.find("\"format_version\":1");
  REQUIRE(pos != std::string::npos);
  header.replace(pos, 18, "\"format_version\":2");
  write_text(path, header + "\n");
  CHECK_THROWS_AS(load_snapshot(path), VersionError);
}
