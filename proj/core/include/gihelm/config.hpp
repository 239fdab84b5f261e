#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "gihelm/classic_iter.hpp"
#include "gihelm/training.hpp"

namespace gihelm {

struct MediumSpec {
  std::string kind = "gaussian_lens";  // homogeneous | gaussian_lens | layered | file
  Grid2D grid;
  double v0 = 0.0;
  double frequency_hz = 0.0;
  Point center;
  double sigma = 0.0;
  double contrast = 0.0;
  std::vector<double> interfaces;
  std::vector<double> velocities;
  std::filesystem::path velocity_file;
  std::filesystem::path sidecar_file;
};

/// Present only when the config has a "taper" section. Missing pad_cells
/// defaults to one background wavelength of cells; missing width_cells
/// defaults to the pad.
struct TaperSpec {
  bool enabled = false;
  std::optional<std::size_t> pad_cells;
  std::optional<std::size_t> width_cells;
};

enum class SolveMethod { direct, born, landweber };

struct SolverSpec {
  SolveMethod method = SolveMethod::direct;
  StopRule stop;
  /// Landweber step; <= 0 selects 1 / sigma_max^2 from power iteration.
  double eta = 0.0;
  std::size_t power_iters = 200;
  std::size_t dense_cap = kDefaultDenseCap;
};

/// One experiment: medium, source and either a solver or a training section.
struct RunConfig {
  MediumSpec medium;
  TaperSpec taper;
  SourceSpec source;
  SelfTermMode self_term = SelfTermMode::cell_averaged;
  SolverSpec solver;
  TrainConfig train;
  bool has_solver = false;
  bool has_train = false;
};

/// Parses JSON text. Unknown keys, missing required keys and wrong types
/// raise ConfigError naming the offending field; syntax errors name the line.
/// Relative file paths resolve against `base_dir`.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Builds the velocity model and applies the taper.
Medium build_medium(const RunConfig& cfg);

}  // namespace gihelm
