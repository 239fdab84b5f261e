// gihelm: command-line runner for solves, training runs and field export.
//
//   gihelm solve       --config run.json --out-dir out/
//   gihelm train       --config run.json --out-dir out/ [--seed-override N] [--epochs-override N]
//   gihelm render      --field out/solution.gihf --out img.pgm --part re|im|abs
//   gihelm kernel-dump --config run.json --out-dir out/
//   gihelm pool-dump   --config run.json --out-dir out/ [--seed-override N]
//
// Exit codes: 0 success, 1 usage/input error, 2 solver diverged,
// 3 non-finite training loss.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "gihelm/classic_iter.hpp"
#include "gihelm/config.hpp"
#include "gihelm/errors.hpp"
#include "gihelm/field_io.hpp"
#include "gihelm/manifest.hpp"
#include "gihelm/render.hpp"
#include "gihelm/training.hpp"

namespace fs = std::filesystem;
using namespace gihelm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitDiverged = 2;
constexpr int kExitNonFinite = 3;

struct CommonArgs {
  fs::path config;
  fs::path out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

// Tracks outputs and writes manifest.json at the end of a run.
class Run {
 public:
  Run(std::string command, const CommonArgs& args, const RunConfig& cfg) : args_(args) {
    fs::create_directories(args.out_dir);
    manifest_.command = std::move(command);
    manifest_.config_text = slurp(args.config);
    manifest_.seed = cfg.train.seed;
    manifest_.started_utc = utc_timestamp();
    std::vector<fs::path> inputs{args.config};
    if (cfg.medium.kind == "file") {
      inputs.push_back(cfg.medium.velocity_file);
      inputs.push_back(cfg.medium.sidecar_file);
    }
    set_inputs(manifest_, inputs, args.out_dir);
  }

  fs::path out(const std::string& name) {
    files_.push_back(args_.out_dir / name);
    return files_.back();
  }

  void finish() {
    manifest_.finished_utc = utc_timestamp();
    for (const auto& f : files_) {
      if (fs::exists(f)) manifest_.outputs.push_back(describe_file(f, args_.out_dir));
    }
    write_manifest(manifest_, args_.out_dir / "manifest.json");
  }

  RunManifest& manifest() { return manifest_; }

 private:
  const CommonArgs& args_;
  RunManifest manifest_;
  std::vector<fs::path> files_;
};

RunConfig load(const CommonArgs& args) {
  RunConfig cfg = load_run_config(args.config);
  if (args.seed) cfg.train.seed = *args.seed;
  if (args.epochs) cfg.train.epochs = *args.epochs;
  return cfg;
}

std::string method_name(SolveMethod m) {
  switch (m) {
    case SolveMethod::direct:
      return "direct";
    case SolveMethod::born:
      return "born";
    case SolveMethod::landweber:
      return "landweber";
  }
  return "?";
}

int cmd_solve(const CommonArgs& args) {
  const RunConfig cfg = load(args);
  const Medium medium = build_medium(cfg);
  Run run("solve", args, cfg);
  const GreensKernel kernel = build_kernel(medium.grid(), medium.k0(), cfg.self_term);
  const ComplexField u0 = background_on_grid(medium, cfg.source);
  const LinearSystemView view = make_gi_system(kernel, medium, u0, cfg.solver.dense_cap);

  IterationResult res;
  switch (cfg.solver.method) {
    case SolveMethod::direct: {
      res.us = solve_direct(view, cfg.solver.dense_cap);
      res.trace.records.push_back({0, norm2(residual(view, res.us)), 0.0});
      res.trace.status = IterationStatus::converged;
      break;
    }
    case SolveMethod::born:
      std::cerr << "estimated spectral radius " << estimate_rho(view, cfg.solver.power_iters) << '\n';
      res = born_iterate(view, cfg.solver.stop);
      break;
    case SolveMethod::landweber: {
      double eta = cfg.solver.eta;
      if (eta <= 0.0) {
        const double s = estimate_sigma_max(view, cfg.solver.power_iters);
        eta = 1.0 / (s * s);
        std::cerr << "sigma_max " << s << ", eta " << eta << '\n';
      }
      res = landweber_iterate(view, eta, cfg.solver.stop);
      break;
    }
  }

  write_field(run.out("solution.gihf"), ComplexField(medium.grid(), res.us));
  write_field(run.out("background.gihf"), u0);
  {
    std::ofstream csv(run.out("trace.csv"), std::ios::binary);
    write_trace_csv(csv, res.trace);
  }
  run.finish();
  std::cout << method_name(cfg.solver.method) << ": " << to_string(res.trace.status) << " after "
            << res.trace.records.size() << " residual evaluations, final residual " << res.trace.final_residual()
            << " (|b| = " << norm2(view.b) << ")\n";
  return res.trace.status == IterationStatus::diverged ? kExitDiverged : kExitOk;
}

int cmd_train(const CommonArgs& args) {
  const RunConfig cfg = load(args);
  if (!cfg.has_train) throw ConfigError("/train", "missing training section");
  const Medium medium = build_medium(cfg);
  Run run("train", args, cfg);
  const GiProblem problem = make_gi_problem(medium, cfg.source, cfg.self_term);
  const ComplexField reference(medium.grid(), solve_direct(problem.system, cfg.solver.dense_cap));

  const TrainResult result = train(cfg.train, problem, reference);
  save_checkpoint(result.field, run.out("checkpoint.gihn"));
  {
    std::ofstream csv(run.out("loss.csv"), std::ios::binary);
    write_loss_csv(csv, result.report);
  }
  {
    std::ofstream csv(run.out("nmse.csv"), std::ios::binary);
    write_eval_csv(csv, result.report);
  }
  if (result.status == TrainStatus::non_finite) {
    run.finish();
    std::cerr << "error: non-finite loss at epoch " << result.failed_epoch
              << "; parameters before the failing step saved to checkpoint.gihn\n";
    return kExitNonFinite;
  }
  write_field(run.out("prediction.gihf"), predict_grid(result.field, problem));
  write_field(run.out("reference.gihf"), reference);
  run.finish();
  std::cout << to_string(cfg.train.mode) << ": " << cfg.train.epochs << " epochs, final NMSE "
            << result.report.final_nmse << ", MAE " << result.report.final_mae << ", "
            << result.report.wall_ms / 1000.0 << " s\n";
  return kExitOk;
}

int cmd_render(const fs::path& field_path, const fs::path& out_path, const std::string& part) {
  const ComplexField f = read_field(field_path);
  write_text(out_path, render_pgm(f, parse_render_part(part)));
  return kExitOk;
}

int cmd_kernel_dump(const CommonArgs& args) {
  const RunConfig cfg = load(args);
  const Medium medium = build_medium(cfg);
  Run run("kernel-dump", args, cfg);
  const GreensKernel kernel = build_kernel(medium.grid(), medium.k0(), cfg.self_term);
  write_field(run.out("kernel.gihf"), kernel.samples());
  run.finish();
  std::cout << "kernel grid " << kernel.kernel_grid().nz << " x " << kernel.kernel_grid().nx << '\n';
  return kExitOk;
}

int cmd_pool_dump(const CommonArgs& args) {
  const RunConfig cfg = load(args);
  const Medium medium = build_medium(cfg);
  Run run("pool-dump", args, cfg);
  const CollocationPool pool =
      build_pool(medium, cfg.source, CoordinateFrame::centered_on(medium), cfg.train.pool, cfg.train.seed);
  std::ofstream csv(run.out("pool.csv"), std::ios::binary);
  csv << "z,x,z_norm,x_norm,dm,u0_re,u0_im\r\n";
  csv.precision(17);
  for (std::size_t i = 0; i < pool.points.size(); ++i) {
    csv << pool.physical[i].z << ',' << pool.physical[i].x << ',' << pool.points[i].z << ',' << pool.points[i].x
        << ',' << pool.dm[i] << ',' << pool.u0[i].real() << ',' << pool.u0[i].imag() << "\r\n";
  }
  csv.close();
  run.finish();
  std::cout << pool.points.size() << " collocation points\n";
  return kExitOk;
}

void add_common(CLI::App* sub, CommonArgs& args, bool training) {
  sub->add_option("--config", args.config, "Run configuration (JSON)")->required();
  sub->add_option("--out-dir", args.out_dir, "Output directory");
  sub->add_option("--seed-override", args.seed, "Replace train.seed");
  if (training) sub->add_option("--epochs-override", args.epochs, "Replace train.epochs");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scattered-field Helmholtz solver and neural-field trainer"};
  app.require_subcommand(1);

  CommonArgs common;
  auto* solve = app.add_subcommand("solve", "Solve (I - A) us = b with the configured method");
  add_common(solve, common, false);
  auto* trainer = app.add_subcommand("train", "Train a neural field on the configured medium");
  add_common(trainer, common, true);
  auto* kernel = app.add_subcommand("kernel-dump", "Write the padded Green's kernel as a field file");
  add_common(kernel, common, false);
  auto* pool = app.add_subcommand("pool-dump", "Write the collocation pool as CSV");
  add_common(pool, common, false);

  fs::path field_path, image_path;
  std::string part = "re";
  auto* render = app.add_subcommand("render", "Render a field file to an 8-bit PGM image");
  render->add_option("--field", field_path, "Input field file")->required();
  render->add_option("--out", image_path, "Output image")->required();
  render->add_option("--part", part, "re, im or abs")->check(CLI::IsMember({"re", "im", "abs"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitError;
  }

  try {
    if (*solve) return cmd_solve(common);
    if (*trainer) return cmd_train(common);
    if (*kernel) return cmd_kernel_dump(common);
    if (*pool) return cmd_pool_dump(common);
    if (*render) return cmd_render(field_path, image_path, part);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
