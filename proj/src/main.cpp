// Command-line front end: stationary spectra, single collisions in the 1D
// monopole / 2D axial / 3D Cartesian lanes, and impact-parameter sweeps.
//
// All numeric output goes through the table writers so every results file
// carries the config hash and code version; stdout mirrors the key numbers.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <string>

#include "tcd/io.hpp"

namespace {

using namespace tcd;

Provenance provenance_for(const RunConfig& rc) {
  Provenance p;
  p.config_hash = rc.config_hash;
  return p;
}

std::string out_path(const RunConfig& rc, const std::string& name) {
  std::filesystem::create_directories(rc.out_dir);
  return (std::filesystem::path(rc.out_dir) / name).string();
}

void write_results(const RunConfig& rc, const Table& t) {
  const Provenance p = provenance_for(rc);
  write_table_csv(out_path(rc, "results.csv"), t, p);
  write_table_json(out_path(rc, "results.json"), t, p);
}

Table::Cell null_cell() { return Table::Cell(); }

const std::vector<std::string> kResultColumns = {
    "b_fm", "e_min_over_mc2_plus_1", "p_1s", "p_minus", "p_bar_1s", "p_ct"};

// Progress to stderr (stdout stays deterministic), plus optional checkpoint
// writing, composed into the module's per-step callback.
std::function<void(int, double, const Eigen::VectorXcd&)> step_hook(
    const RunConfig& rc, const GridDescriptor& desc, int total_steps) {
  const int stride = std::max(1, total_steps / 20);
  const int write_step = rc.checkpoint_write_path.empty()
                             ? -1
                             : (rc.checkpoint_write_step >= 0
                                    ? rc.checkpoint_write_step
                                    : total_steps);
  const std::string write_path = rc.checkpoint_write_path;
  return [stride, write_step, write_path, desc, total_steps](
             int step, double t, const Eigen::VectorXcd& c) {
    if (step % stride == 0 || step == total_steps)
      std::fprintf(stderr, "  step %d/%d (t = %.4f au)\n", step, total_steps, t);
    if (step == write_step) checkpoint_save(write_path, desc, step, t, c);
  };
}

int run_stationary(const RunConfig& rc) {
  const StationaryResult r = stationary_1s(rc.z_target, rc.model, rc.grid1d);
  const char* model = rc.model == NuclearModel::kPoint ? "point" : "sphere";
  Table t;
  t.columns = {"z", "model", "e_1s_au", "e_sommerfeld_au"};
  t.rows.push_back({Table::Cell(rc.z_target), Table::Cell(model),
                    Table::Cell(r.e_1s), Table::Cell(sommerfeld_1s(rc.z_target))});
  write_results(rc, t);
  std::printf("stationary Z=%g model=%s: e_1s = %.6f au (point-nucleus reference %.6f)\n",
              rc.z_target, model, r.e_1s, sommerfeld_1s(rc.z_target));
  return 0;
}

std::vector<Table::Cell> row_1d(double b, const CollideResult& r, bool with_pbar) {
  return {Table::Cell(b), Table::Cell(r.e_min_over_mc2), Table::Cell(r.p_1s),
          Table::Cell(r.p_minus),
          with_pbar ? Table::Cell(r.p_bar_1s) : null_cell(), null_cell()};
}

CollideResult do_collide_1d(const RunConfig& rc, double b) {
  CollideParams p;
  p.z_target = rc.z_target;
  p.z_proj = rc.z_proj;
  p.target_model = rc.model;
  p.b_fm = b;
  p.mev_per_u = rc.mev_per_u;
  p.steps = rc.steps;
  p.with_pbar = rc.with_pbar;
  p.timeseries_stride = rc.timeseries_stride;
  p.grid = rc.grid1d;
  return collide_monopole(p);
}

int run_collide1d(const RunConfig& rc) {
  const double b = rc.b_fm.front();
  const CollideResult r = do_collide_1d(rc, b);
  Table t;
  t.columns = kResultColumns;
  t.rows.push_back(row_1d(b, r, rc.with_pbar));
  write_results(rc, t);
  if (!r.series.empty())
    write_series_csv(out_path(rc, "series.csv"), r.series, provenance_for(rc));
  std::printf("collide1d b=%.2f fm: E_min/mc2+1 = %.4f  P_1s = %.6f  P_minus = %.3e",
              b, r.e_min_over_mc2, r.p_1s, r.p_minus);
  if (rc.with_pbar) std::printf("  Pbar_1s = %.6f", r.p_bar_1s);
  std::printf("  |norm-1| = %.2e\n", std::abs(r.norm_final - 1.0));
  return 0;
}

AxialCollideResult do_collide_2d(const RunConfig& rc, double b,
                                 bool allow_checkpoint) {
  AxialCollideParams p;
  p.grid = rc.grid2d;
  p.z_target_fm = rc.z_target_2d_fm;
  p.z_target = rc.z_target;
  p.z_proj = rc.z_proj;
  p.b_fm = b;
  p.mev_per_u = rc.mev_per_u;
  p.steps = rc.steps;
  p.timeseries_stride = rc.timeseries_stride;
  const GridDescriptor desc = axial_descriptor(rc.grid2d, rc.z_target_2d_fm);
  CheckpointData resume;
  if (allow_checkpoint && !rc.checkpoint_resume_path.empty()) {
    resume = checkpoint_load(rc.checkpoint_resume_path, desc);
    p.start_step = static_cast<int>(resume.step);
    p.start_state = &resume.state;
    std::fprintf(stderr, "  resuming at step %d\n", p.start_step);
  }
  p.on_step = step_hook(rc, desc, p.steps);
  return collide_axial(p);
}

int run_collide2d(const RunConfig& rc) {
  const double b = rc.b_fm.front();
  const AxialCollideResult r = do_collide_2d(rc, b, true);
  Table t;
  t.columns = kResultColumns;
  t.rows.push_back({Table::Cell(b), null_cell(), Table::Cell(r.p_survival),
                    null_cell(), null_cell(), Table::Cell(r.p_ct)});
  write_results(rc, t);
  if (!r.series.empty())
    write_series_csv(out_path(rc, "series.csv"), r.series, provenance_for(rc));
  std::printf("collide2d b=%.2f fm: P_1s = %.6f  P_ct = %.6f  |norm-1| = %.2e\n",
              b, r.p_survival, r.p_ct, std::abs(r.norm_final - 1.0));
  return 0;
}

Cart3DResult do_collide_3d(const RunConfig& rc, double b, bool allow_checkpoint) {
  Cart3DParams p;
  p.grid = rc.grid3d;
  p.z_target = rc.z_target;
  p.z_proj = rc.z_proj;
  p.b_fm = b;
  p.mev_per_u = rc.mev_per_u;
  p.steps = rc.steps;
  p.timeseries_stride = rc.timeseries_stride;
  p.purify_initial = true;
  const GridDescriptor desc = cart_descriptor(rc.grid3d);
  CheckpointData resume;
  if (allow_checkpoint && !rc.checkpoint_resume_path.empty()) {
    resume = checkpoint_load(rc.checkpoint_resume_path, desc);
    p.start_step = static_cast<int>(resume.step);
    p.start_state = &resume.state;
    std::fprintf(stderr, "  resuming at step %d\n", p.start_step);
  }
  p.on_step = step_hook(rc, desc, p.steps);
  return collide_cart3d(p);
}

int run_collide3d(const RunConfig& rc) {
  const double b = rc.b_fm.front();
  const Cart3DResult r = do_collide_3d(rc, b, true);
  Table t;
  t.columns = kResultColumns;
  t.rows.push_back({Table::Cell(b), null_cell(), Table::Cell(r.p_survival),
                    null_cell(), null_cell(), Table::Cell(r.p_ct)});
  write_results(rc, t);
  if (!r.series.empty())
    write_series_csv(out_path(rc, "series.csv"), r.series, provenance_for(rc));
  std::printf("collide3d b=%.2f fm: P_1s = %.6f  P_ct = %.6f  |norm-1| = %.2e"
              "  (e_init = %.4f au, %.1f solver iters/step)\n",
              b, r.p_survival, r.p_ct, std::abs(r.norm_final - 1.0), r.e_initial,
              r.avg_bicg_iters);
  return 0;
}

int run_sweep(const RunConfig& rc) {
  Table t;
  t.columns = kResultColumns;
  std::vector<std::pair<double, double>> pct;
  for (double b : rc.b_fm) {
    std::fprintf(stderr, "sweep %s b=%.2f fm\n", rc.lane.c_str(), b);
    if (rc.lane == "1d") {
      const CollideResult r = do_collide_1d(rc, b);
      t.rows.push_back(row_1d(b, r, rc.with_pbar));
      std::printf("b=%.2f fm: E_min/mc2+1 = %.4f  P_1s = %.6f  P_minus = %.3e\n",
                  b, r.e_min_over_mc2, r.p_1s, r.p_minus);
    } else if (rc.lane == "2d") {
      const AxialCollideResult r = do_collide_2d(rc, b, false);
      t.rows.push_back({Table::Cell(b), null_cell(), Table::Cell(r.p_survival),
                        null_cell(), null_cell(), Table::Cell(r.p_ct)});
      pct.emplace_back(b, r.p_ct);
      std::printf("b=%.2f fm: P_1s = %.6f  P_ct = %.6f\n", b, r.p_survival, r.p_ct);
    } else {
      const Cart3DResult r = do_collide_3d(rc, b, false);
      t.rows.push_back({Table::Cell(b), null_cell(), Table::Cell(r.p_survival),
                        null_cell(), null_cell(), Table::Cell(r.p_ct)});
      pct.emplace_back(b, r.p_ct);
      std::printf("b=%.2f fm: P_1s = %.6f  P_ct = %.6f\n", b, r.p_survival, r.p_ct);
    }
  }
  write_results(rc, t);
  if (!pct.empty())
    write_plot_data(out_path(rc, "pct.dat"), pct, provenance_for(rc));
  return 0;
}

RunMode mode_from_string(const std::string& s) {
  if (s == "stationary") return RunMode::kStationary;
  if (s == "collide1d") return RunMode::kCollide1D;
  if (s == "collide2d") return RunMode::kCollide2D;
  if (s == "collide3d") return RunMode::kCollide3D;
  if (s == "sweep") return RunMode::kSweep;
  throw ConfigError("run.mode: expected stationary|collide1d|collide2d|collide3d|sweep, got '" +
                    s + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-center Dirac bound states and collisions in cubic Hermite bases"};
  app.require_subcommand(0, 1);
  std::string config_path, tier, out;
  int threads = 1;
  app.add_option("--config", config_path, "configuration file (INI sections)");
  app.add_option("--tier", tier, "resolution tier: desk | paper")
      ->check(CLI::IsMember({"desk", "paper"}));
  app.add_option("--out", out, "output directory (default from config)");
  app.add_option("--threads", threads, "threads for dense linear algebra");

  // Subcommands select the run mode and win over the config file's run.mode.
  CLI::App* sub_stat = app.add_subcommand("stationary", "target-only bound spectrum");
  CLI::App* sub_c1 = app.add_subcommand("collide1d", "monopole collision (radial lane)");
  CLI::App* sub_c2 = app.add_subcommand("collide2d", "axially symmetric collision");
  CLI::App* sub_c3 = app.add_subcommand("collide3d", "full Cartesian collision");
  CLI::App* sub_sweep = app.add_subcommand("sweep", "impact-parameter sweep");

  CLI11_PARSE(app, argc, argv);
  Eigen::setNbThreads(threads);

  try {
    Config cfg =
        config_path.empty() ? Config() : Config::parse_file(config_path);
    RunMode mode;
    if (sub_stat->parsed()) mode = RunMode::kStationary;
    else if (sub_c1->parsed()) mode = RunMode::kCollide1D;
    else if (sub_c2->parsed()) mode = RunMode::kCollide2D;
    else if (sub_c3->parsed()) mode = RunMode::kCollide3D;
    else if (sub_sweep->parsed()) mode = RunMode::kSweep;
    else mode = mode_from_string(cfg.get_str("run.mode", "stationary"));

    const RunConfig rc = RunConfig::load(cfg, mode, tier, out);
    switch (rc.mode) {
      case RunMode::kStationary: return run_stationary(rc);
      case RunMode::kCollide1D: return run_collide1d(rc);
      case RunMode::kCollide2D: return run_collide2d(rc);
      case RunMode::kCollide3D: return run_collide3d(rc);
      case RunMode::kSweep: return run_sweep(rc);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const CheckpointError& e) {
    std::fprintf(stderr, "checkpoint error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
