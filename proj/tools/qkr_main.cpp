#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qkr/classical.hpp"
#include "qkr/config.hpp"
#include "qkr/errors.hpp"
#include "qkr/io.hpp"

namespace fs = std::filesystem;

namespace {

struct CmdOpts {
  std::string config_path;
  std::optional<std::string> preset;
  std::optional<std::string> engine;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<double> amp_ratio;
  std::optional<std::int64_t> n_traj;
  std::optional<std::string> a_grid;
  std::optional<double> tolerance;
  bool dump_schedule = false;
  std::int64_t snapshot_every = 0;
  std::vector<std::string> inputs;  // collapse: sweep.csv files
};

void add_run_flags(CLI::App* cmd, CmdOpts& o) {
  cmd->add_option("--config", o.config_path,
                  "run-config file ([section] key = value)");
  cmd->add_option("--preset", o.preset,
                  "compiled-in parameter preset (table1_row1 .. table1_row7)");
  cmd->add_option("--engine", o.engine, "quantum or classical");
  cmd->add_option("--seed", o.seed,
                  "master seed; required here or in the config file");
  cmd->add_option("--threads", o.threads,
                  "worker threads (outputs do not depend on this)");
  cmd->add_option("--out", o.out, "output directory (default .)");
  cmd->add_option("--a", o.amp_ratio, "override the amplitude ratio a");
  cmd->add_option("--n-traj", o.n_traj, "override the trajectory count");
}

qkr::RunSpec resolve(const CmdOpts& o) {
  qkr::ConfigFile file;
  if (!o.config_path.empty()) file = qkr::parse_config_file(o.config_path);
  qkr::Overrides ov;
  ov.preset = o.preset;
  ov.engine = o.engine;
  ov.seed = o.seed;
  ov.threads = o.threads;
  ov.amp_ratio = o.amp_ratio;
  ov.n_traj = o.n_traj;
  ov.tolerance = o.tolerance;
  ov.out_dir = o.out;
  if (o.a_grid) ov.a_grid = qkr::parse_grid(*o.a_grid);
  return qkr::resolve_config(file, ov);
}

qkr::RunResult run_engine(const qkr::RunSpec& spec) {
  return spec.engine == qkr::Engine::quantum
             ? qkr::run_ensemble(spec.params, spec.ens)
             : qkr::run_classical(spec.params, spec.ens);
}

int cmd_simulate(const CmdOpts& o) {
  qkr::RunSpec spec = resolve(o);
  const fs::path out = spec.out_dir;
  fs::create_directories(out);
  if (o.dump_schedule) {
    const qkr::KickTimeline tl = qkr::build_timeline(spec.params);
    qkr::write_schedule_csv(out / "schedule.csv", tl, spec);
    std::printf("schedule: %zu events -> %s\n", tl.events.size(),
                (out / "schedule.csv").c_str());
    return 0;
  }
  if (o.snapshot_every > 0) {
    if (spec.engine != qkr::Engine::quantum)
      throw qkr::ConfigError("--snapshot-every requires the quantum engine");
    spec.ens.snapshot_every = o.snapshot_every;
    spec.ens.snapshot_hook = [out](std::int64_t b, const qkr::QuantumState& st) {
      char name[40];
      std::snprintf(name, sizeof name, "snapshot_%06lld.csv",
                    static_cast<long long>(b));
      qkr::write_snapshot_csv(out / name, st);
    };
  }
  const qkr::RunResult result = run_engine(spec);
  qkr::write_histogram_csv(out / "hist.csv", result, spec);
  qkr::write_summary_json(out / "summary.json", result, spec);
  std::printf("pi0 = %.6g +- %.2g, p2 = %.6g (%lld trajectories) -> %s\n",
              result.pi0, result.pi0_err, result.p2,
              static_cast<long long>(spec.ens.n_traj), out.c_str());
  return 0;
}

int cmd_sweep(const CmdOpts& o) {
  qkr::RunSpec spec = resolve(o);
  const std::vector<double>& grid = spec.analysis.a_grid;
  if (grid.empty())
    throw qkr::ConfigError(
        "sweep: an a-grid is required (--a-grid or [analysis] a_grid)");
  if (grid.front() != 0)
    throw qkr::ConfigError("sweep: a-grid must start at 0");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw qkr::ConfigError("sweep: a-grid must be strictly increasing");

  const fs::path out = spec.out_dir;
  fs::create_directories(out / "points");

  std::vector<qkr::PointRecord> records;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    qkr::RunSpec point = spec;
    point.params.amp_ratio = grid[i];
    point.analysis.a_grid.clear();  // point identity is physics, not the plan
    const std::string hash = qkr::hash_hex(qkr::config_hash(point));
    char name[32];
    std::snprintf(name, sizeof name, "point_%03zu.json", i);
    const fs::path path = out / "points" / name;
    if (fs::exists(path)) {
      qkr::PointRecord rec = qkr::read_point_json(path);
      if (rec.config_hash != hash)
        throw qkr::Error("sweep: refusing to resume: " + path.string() +
                         " was produced by a different configuration (hash " +
                         rec.config_hash + ", expected " + hash + ")");
      records.push_back(rec);
      std::printf("a = %-8g reused from %s\n", grid[i], path.c_str());
      continue;
    }
    const qkr::RunResult r = spec.engine == qkr::Engine::quantum
                                 ? qkr::run_ensemble(point.params, point.ens)
                                 : qkr::run_classical(point.params, point.ens);
    qkr::PointRecord rec;
    rec.config_hash = hash;
    rec.a = grid[i];
    rec.atilde = qkr::scaled_amplitude(point.params);
    rec.pi0_raw = r.pi0;
    rec.pi0_err_raw = r.pi0_err;
    qkr::write_point_json(path, rec);
    records.push_back(rec);
    std::printf("a = %-8g pi0 = %.6g +- %.2g\n", grid[i], r.pi0, r.pi0_err);
  }

  qkr::SweepCurve curve;
  curve.params = spec.params;
  curve.params.amp_ratio = 0;
  const double norm = records.front().pi0_raw;
  if (!(norm > 0)) throw qkr::Error("sweep: vanishing pi0 at a = 0");
  curve.normalization = norm;
  for (const qkr::PointRecord& rec : records)
    curve.points.push_back(
        {rec.a, rec.atilde, rec.pi0_raw / norm, rec.pi0_err_raw / norm});

  qkr::RunSpec embed = spec;
  embed.params.amp_ratio = 0;
  qkr::write_sweep_csv(out / "sweep.csv", curve, embed);
  std::printf("sweep: %zu points -> %s\n", curve.points.size(),
              (out / "sweep.csv").c_str());
  return 0;
}

int cmd_collapse(const CmdOpts& o) {
  std::vector<qkr::SweepCurve> curves;
  for (const std::string& path : o.inputs)
    curves.push_back(qkr::read_sweep_csv(path));
  const double tol = o.tolerance.value_or(qkr::kCollapseToleranceDefault);
  const qkr::CollapseReport rep = qkr::collapse_test(curves, tol);
  const fs::path out = o.out.value_or(".");
  fs::create_directories(out);
  qkr::write_collapse_csv(out / "collapse.csv", rep, o.inputs);
  qkr::write_verdict_json(out / "verdict.json", rep, o.inputs);
  std::printf("%s: spread_a = %.4g, spread_atilde = %.4g (tolerance %.4g)\n",
              rep.collapsed ? "collapsed" : "not collapsed", rep.spread_a,
              rep.spread_atilde, rep.tolerance);
  return rep.collapsed ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quasiperiodically kicked rotor simulator"};
  app.require_subcommand(1);

  CmdOpts sim_opts, sweep_opts, col_opts;

  CLI::App* sim = app.add_subcommand(
      "simulate", "one run: histogram, summary, optional schedule/snapshots");
  add_run_flags(sim, sim_opts);
  sim->add_flag("--dump-schedule", sim_opts.dump_schedule,
                "write the merged kick schedule and exit");
  sim->add_option("--snapshot-every", sim_opts.snapshot_every,
                  "write trajectory-0 state snapshots every k periods");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Pi0(a) curve over an a-grid, resumable per point");
  add_run_flags(sweep, sweep_opts);
  sweep->add_option("--a-grid", sweep_opts.a_grid,
                    "comma-separated a values, starting at 0");

  CLI::App* col = app.add_subcommand(
      "collapse", "scaling-collapse verdict over >= 2 sweep files");
  col->add_option("files", col_opts.inputs, "sweep.csv inputs")
      ->expected(2, -1)
      ->required();
  col->add_option("--tolerance", col_opts.tolerance,
                  "spread_atilde acceptance threshold (default 0.1)");
  col->add_option("--out", col_opts.out, "output directory (default .)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_opts);
    if (sweep->parsed()) return cmd_sweep(sweep_opts);
    return cmd_collapse(col_opts);
  } catch (const qkr::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
