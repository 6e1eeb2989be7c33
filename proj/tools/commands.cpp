#include "tubeflock/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "tubeflock/dynamics.hpp"
#include "tubeflock/errors.hpp"
#include "tubeflock/flocking.hpp"
#include "tubeflock/functionals.hpp"
#include "tubeflock/initial_data.hpp"
#include "tubeflock/json_io.hpp"
#include "tubeflock/partial_dynamics.hpp"
#include "tubeflock/run_config.hpp"

namespace tubeflock {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kManifestVersion = 1;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Output directory plus a digest of every file written to it.
class OutputSet {
 public:
  explicit OutputSet(const RunConfig& rc) : dir_(rc.output.dir) { fs::create_directories(dir_); }

  void write(const std::string& name, const std::string& content) {
    const fs::path path = dir_ / name;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw Error("cannot write '" + path.string() + "'");
    digests_[name] = fnv1a_hex(content);
  }

  void snapshot(const std::string& name, const Configuration& config, const ModelParams& params) {
    const fs::path path = dir_ / name;
    fs::create_directories(path.parent_path());
    save_snapshot(config, params, path);
    digests_[name] = fnv1a_hex(read_file(path));
  }

  const fs::path& dir() const { return dir_; }
  const std::map<std::string, std::string>& digests() const { return digests_; }

 private:
  fs::path dir_;
  std::map<std::string, std::string> digests_;
};

void write_manifest(OutputSet& outputs, const RunConfig& rc, const std::string& command, int exit_code,
                    const json& extra_digests = json::object()) {
  json digests = extra_digests;
  digests["config"] = fnv1a_hex(rc.resolved.dump());
  digests["params"] = params_digest(rc.params);
  const json manifest = {
      {"manifest_version", kManifestVersion},
      {"tool", "tubeflock"},
      {"command", command},
      {"exit_code", exit_code},
      {"config", rc.resolved},
      {"seed", {{"value", rc.sampler.seed}, {"source", seed_source_name(rc.seed_source)}}},
      {"digests", digests},
      {"outputs", outputs.digests()},
  };
  outputs.write("manifest.json", manifest.dump(2) + "\n");
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string row;
  for (const auto& c : cells) {
    if (!row.empty()) row += ',';
    row += c;
  }
  return row + '\n';
}

std::string num(double x) { return format_double(x); }

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// Runs `body` with config resolution and maps exceptions to exit codes.
int run(const std::string& command, const CommandInput& in, std::ostream& err,
        const std::function<int(RunConfig&)>& body) {
  RunConfig rc;
  try {
    rc = load_config(in.config, in.overrides, in.env_seed);
    if (in.init) {
      rc.init_snapshot = *in.init;
      rc.resolved["input"]["snapshot"] = *in.init;
    }
  } catch (const std::exception& e) {
    err << "tubeflock " << command << ": config error: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    return body(rc);
  } catch (const StiffnessFailure& e) {
    err << "tubeflock " << command << ": integration failure: " << e.what() << '\n';
    return kExitIntegration;
  } catch (const SingularConfiguration& e) {
    err << "tubeflock " << command << ": integration failure: " << e.what() << '\n';
    return kExitIntegration;
  } catch (const OutOfDomain& e) {
    err << "tubeflock " << command << ": integration failure: " << e.what() << '\n';
    return kExitIntegration;
  } catch (const HorizonTooLarge& e) {
    err << "tubeflock " << command << ": precondition failure: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const InfeasibleDensity& e) {
    err << "tubeflock " << command << ": precondition failure: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const MembershipError& e) {
    err << "tubeflock " << command << ": precondition failure: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const UndefinedRatio& e) {
    err << "tubeflock " << command << ": precondition failure: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const std::exception& e) {
    err << "tubeflock " << command << ": error: " << e.what() << '\n';
    return kExitConfig;
  }
}

void require_span_covers(const RunConfig& rc) {
  const int top = rc.study.nladder.back();
  if (rc.sampler.half_span < static_cast<double>(top)) {
    throw InvalidParameter("sampler.span/2 = " + num(rc.sampler.half_span) + " does not cover the largest level " +
                           std::to_string(top));
  }
}

std::string snapshot_name(std::size_t s) {
  std::ostringstream name;
  name << "snapshots/snap_" << std::setw(5) << std::setfill('0') << s << ".jsonl";
  return name.str();
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

int cmd_simulate(const CommandInput& in, std::ostream& out, std::ostream& err) {
  return run("simulate", in, err, [&](RunConfig& rc) {
    Configuration initial;
    json extra = json::object();
    if (!rc.init_snapshot.empty()) {
      const Snapshot snap = load_snapshot(rc.init_snapshot);
      if (to_json(snap.geometry) != to_json(rc.params.geometry)) {
        throw InvalidParameter("snapshot geometry in '" + rc.init_snapshot + "' differs from the configured geometry");
      }
      initial = snap.config;
      extra["input_snapshot"] = fnv1a_hex(read_file(rc.init_snapshot));
      extra["input_snapshot_params"] = snap.params_digest;
    } else {
      initial = sample_configuration(rc.sampler, rc.params);
    }
    const Trajectory traj = simulate(initial, rc.params, rc.integrator, rc.study.T, rc.study.stride);

    OutputSet outputs(rc);
    if (rc.output.wants("csv")) {
      std::string csv = "t,E,dissipation,p_axial,min_dist,wall_margin\n";
      for (const auto& snap : traj.snapshots) {
        const auto d = diagnostics(snap, rc.params.geometry);
        csv += csv_row({num(snap.time), num(energy(snap, rc.params)), num(dissipation_rate(snap, rc.params)),
                        num(d.axial_momentum), num(d.min_pair_distance), num(d.wall_margin)});
      }
      outputs.write("diagnostics.csv", csv);
    }
    if (rc.output.wants("jsonl")) {
      for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
        outputs.snapshot(snapshot_name(s), traj.snapshots[s], rc.params);
      }
    }
    if (rc.output.wants("json")) {
      const json summary = {{"particles", initial.size()},
                            {"T", rc.study.T},
                            {"accepted_steps", traj.stats.accepted},
                            {"rejected_steps", traj.stats.rejected},
                            {"min_step", traj.stats.min_step},
                            {"E_initial", energy(traj.initial(), rc.params)},
                            {"E_final", energy(traj.final(), rc.params)}};
      outputs.write("summary.json", summary.dump(2) + "\n");
    }
    write_manifest(outputs, rc, "simulate", kExitOk, extra);
    out << "simulate: " << initial.size() << " particles to T=" << num(rc.study.T) << " in "
        << traj.stats.accepted << " steps; outputs in " << outputs.dir().string() << '\n';
    return static_cast<int>(kExitOk);
  });
}

int cmd_partial_converge(const CommandInput& in, std::ostream& out, std::ostream& err) {
  return run("partial-converge", in, err, [&](RunConfig& rc) {
    require_span_covers(rc);
    const Configuration full = sample_configuration(rc.sampler, rc.params);
    const auto& st = rc.study;
    const auto rep = convergence_study(full, st.nladder, st.k, rc.params, rc.integrator, st.T, st.stride);
    const int code = rep.verdict ? kExitOk : kExitVerdictFail;

    OutputSet outputs(rc);
    if (rc.output.wants("csv")) {
      std::string csv = "n_low,n_high,k,t,u_k,ratio,horizon\n";
      for (const auto& row : rep.rows) {
        csv += csv_row({std::to_string(row.n_low), std::to_string(row.n_high), num(row.k), num(row.t),
                        num(row.u_k), row.ratio ? num(*row.ratio) : std::string(), num(row.horizon)});
      }
      outputs.write("convergence.csv", csv);
    }
    if (rc.output.wants("json")) {
      json ratios = json::array();
      for (double r : rep.final_ratios) ratios.push_back(number_or_null(r));
      const json summary = {{"levels", rep.levels},
                            {"k", rep.k},
                            {"T", rep.T},
                            {"particles", full.size()},
                            {"v_max", rep.v_max},
                            {"horizon", rep.horizon},
                            {"n_of_k", rep.n_of_k ? json(*rep.n_of_k) : json(nullptr)},
                            {"final_u", rep.final_u},
                            {"final_ratios", ratios},
                            {"decay_slope", rep.decay_slope},
                            {"all_zero", rep.all_zero},
                            {"verdict", rep.verdict}};
      outputs.write("convergence.json", summary.dump(2) + "\n");
    }
    write_manifest(outputs, rc, "partial-converge", code);
    out << "partial-converge: u_k at T =";
    for (double u : rep.final_u) out << ' ' << num(u);
    out << "; verdict " << (rep.verdict ? "pass" : "fail") << '\n';
    return code;
  });
}

int cmd_bounds_check(const CommandInput& in, std::ostream& out, std::ostream& err) {
  return run("bounds-check", in, err, [&](RunConfig& rc) {
    require_span_covers(rc);
    const Configuration full = sample_configuration(rc.sampler, rc.params);
    const double q0 = sup_Q(full, rc.params).value;
    const auto& st = rc.study;
    const auto runs = run_ladder(full, st.nladder, rc.params, rc.integrator, st.T, st.stride);
    const double rbar = rc.params.interaction_range();

    std::string csv = "t,n,V,M,R,supQ_window,lemma1_ratio,cor1_ratio\n";
    std::vector<double> lemma_max;
    std::vector<std::vector<double>> cor;  // [level][snapshot]
    bool finite = true;
    for (const auto& run : runs) {
      const auto env = growth_envelope(run.trajectory, run.n, rbar);
      const auto lemma = lemma1_check(run.trajectory, run.n, rc.params, q0);
      const auto c1 = corollary1_check(run.trajectory, run.n);
      for (std::size_t s = 0; s < env.size(); ++s) {
        csv += csv_row({num(env.times[s]), std::to_string(run.n), num(env.max_speed[s]), num(env.speed_bound[s]),
                        num(env.radius[s]), num(lemma.window_sup[s]), num(lemma.ratio[s]), num(c1[s])});
        finite = finite && std::isfinite(lemma.ratio[s]) && std::isfinite(c1[s]);
      }
      lemma_max.push_back(lemma.max_ratio());
      cor.push_back(c1);
    }

    auto spread = [](const std::vector<double>& v) {
      const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
      if (*hi == 0.0) return 1.0;
      return *lo > 0.0 ? *hi / *lo : INFINITY;
    };
    const double lemma_spread = spread(lemma_max);
    double cor_spread = 1.0;
    for (std::size_t s = 0; s < cor.front().size(); ++s) {
      std::vector<double> at_t;
      for (const auto& c : cor) at_t.push_back(c[s]);
      cor_spread = std::max(cor_spread, spread(at_t));
    }
    const bool ok = finite && lemma_spread <= st.bound_factor && cor_spread <= st.bound_factor;
    const int code = ok ? kExitOk : kExitBlowUp;

    OutputSet outputs(rc);
    if (rc.output.wants("csv")) outputs.write("bounds.csv", csv);
    if (rc.output.wants("json")) {
      const json summary = {{"levels", st.nladder},
                            {"T", st.T},
                            {"Q0", q0},
                            {"lemma1_max_ratio", lemma_max},
                            {"lemma1_spread", number_or_null(lemma_spread)},
                            {"cor1_spread", number_or_null(cor_spread)},
                            {"bound_factor", st.bound_factor},
                            {"finite", finite},
                            {"verdict", ok}};
      outputs.write("bounds.json", summary.dump(2) + "\n");
    }
    write_manifest(outputs, rc, "bounds-check", code);
    out << "bounds-check: lemma1 spread " << num(lemma_spread) << ", cor1 spread " << num(cor_spread) << "; "
        << (ok ? "bounded" : "blow-up") << '\n';
    return code;
  });
}

int cmd_flock(const CommandInput& in, std::ostream& out, std::ostream& err) {
  return run("flock", in, err, [&](RunConfig& rc) {
    const auto& fl = rc.flock;
    const Configuration initial = classical_initial_data(fl.N, rc.sampler.seed, fl.sigma_x, fl.sigma_v);
    const Trajectory traj = simulate_classical(initial, fl.beta, fl.lambda, fl.T, rc.integrator, fl.stride);
    const auto series = flock_series(traj);
    const double v_threshold = fl.v_tol * series.velocity_diameter.front();
    const auto verdict = flocking_verdict(traj, v_threshold, fl.x_bound);
    const int code = verdict.flocking ? kExitOk : kExitVerdictFail;

    OutputSet outputs(rc);
    if (rc.output.wants("csv")) {
      std::string csv = "t,velocity_diameter,position_spread\n";
      for (std::size_t s = 0; s < series.times.size(); ++s) {
        csv += csv_row({num(series.times[s]), num(series.velocity_diameter[s]), num(series.position_spread[s])});
      }
      outputs.write("flock.csv", csv);
    }
    if (rc.output.wants("json")) {
      const json summary = {{"N", fl.N},
                            {"beta", fl.beta},
                            {"lambda", fl.lambda},
                            {"T", fl.T},
                            {"velocity_diameter", verdict.velocity_diameter},
                            {"position_spread", verdict.position_spread},
                            {"v_threshold", verdict.v_threshold},
                            {"x_bound", verdict.x_bound},
                            {"decay_rate", verdict.decay_rate ? json(*verdict.decay_rate) : json(nullptr)},
                            {"flocking", verdict.flocking}};
      outputs.write("flock.json", summary.dump(2) + "\n");
    }
    write_manifest(outputs, rc, "flock", code);
    out << "flock: final velocity diameter " << num(verdict.velocity_diameter) << ", max spread "
        << num(verdict.position_spread) << "; " << (verdict.flocking ? "flocking" : "no flocking") << '\n';
    return code;
  });
}

int cmd_sample_init(const CommandInput& in, std::ostream& out, std::ostream& err) {
  return run("sample-init", in, err, [&](RunConfig& rc) {
    const Configuration config = sample_configuration(rc.sampler, rc.params);
    const auto report = verify_membership(config, rc.params);

    OutputSet outputs(rc);
    outputs.snapshot("init.jsonl", config, rc.params);
    const json membership = {{"count", report.count},
                             {"sup_q", report.sup_q},
                             {"sup_q_center", report.sup_q_center},
                             {"sup_q_half_width", report.sup_q_half_width},
                             {"min_pair_separation", number_or_null(report.min_pair_separation)},
                             {"max_wall_energy", report.max_wall_energy},
                             {"max_speed", report.max_speed},
                             {"finite", report.finite()}};
    outputs.write("membership.json", membership.dump(2) + "\n");
    write_manifest(outputs, rc, "sample-init", kExitOk);
    out << "sample-init: " << report.count << " particles, sup_Q " << num(report.sup_q) << "; snapshot "
        << (outputs.dir() / "init.jsonl").string() << '\n';
    return static_cast<int>(kExitOk);
  });
}

}  // namespace tubeflock
