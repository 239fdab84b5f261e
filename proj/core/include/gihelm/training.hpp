#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <string_view>

#include "gihelm/adam.hpp"
#include "gihelm/gi_operator.hpp"
#include "gihelm/neural_field.hpp"

namespace gihelm {

/// Maps physical points to network inputs: wavelength-normalized offsets
/// from `origin`.
struct CoordinateFrame {
  Point origin;
  double scale = 1.0;  // omega / (2 pi v0)

  static CoordinateFrame centered_on(const Medium& medium);
  NormalizedPoint operator()(const Point& p) const noexcept {
    return {scale * (p.z - origin.z), scale * (p.x - origin.x)};
  }
};

/// Everything the GI loss needs, precomputed once: kernel, background field
/// on the GI grid and the network inputs for every grid node.
struct GiProblem {
  Medium medium;
  SourceSpec source;
  GreensKernel kernel;
  ComplexField u0;
  LinearSystemView system;
  CoordinateFrame frame;
  std::vector<NormalizedPoint> grid_points;
};

GiProblem make_gi_problem(const Medium& medium, const SourceSpec& source,
                          SelfTermMode mode = SelfTermMode::cell_averaged);

struct LossValue {
  double value = 0.0;
  std::vector<double> grad;  // empty when not requested
};

/// (1/N) sum |Us_hat - Us|^2 for given grid values of Us.
double gi_loss_values(const GiProblem& problem, std::span<const cplx> us);

/// dL/dUs under the adjoint convention of param_gradient: (2/N) (A - I)^H e
/// with e = Us_hat - Us.
std::vector<cplx> gi_loss_adjoint(const GiProblem& problem, std::span<const cplx> us);

LossValue gi_loss(const NeuralField& field, const GiProblem& problem, bool with_grad = true);

/// Same as gi_loss, reusing a cache made from problem.grid_points; writes the
/// gradient into `grad` and returns the loss.
double gi_loss_into(const NeuralField& field, const GiProblem& problem, ForwardCache& cache, std::span<double> grad);

// Collocation ----------------------------------------------------------------

/// I = |dm|^alpha + eps with eps = eps_fraction * max|dm|, normalized to sum 1.
/// If max|dm| = 0 the result is uniform.
std::vector<double> selection_probabilities(std::span<const double> abs_dm, double alpha, double eps_fraction);

/// k distinct indices; each successive pick is proportional to the weights
/// of the remaining candidates.
std::vector<std::size_t> weighted_sample_without_replacement(std::span<const double> weights, std::size_t k,
                                                             std::mt19937_64& rng);

struct CollocationPool {
  std::vector<Point> physical;
  std::vector<NormalizedPoint> points;
  std::vector<double> dm;
  std::vector<cplx> u0;
};

struct PoolConfig {
  std::size_t n_pool = 20000;
  std::size_t n_raw = 100000;
  double alpha = 1.0;
  double eps_fraction = 0.01;
  /// Candidates closer than this many cell sizes to the source are rejected.
  double source_exclusion_cells = 1.0;
};

/// Uniform candidates over the medium's bounding box, importance-selected.
CollocationPool build_pool(const Medium& medium, const SourceSpec& source, const CoordinateFrame& frame,
                           const PoolConfig& cfg, std::uint64_t seed);

/// n_x uniform draws (with replacement) from the pool.
CollocationPool draw_batch(const CollocationPool& pool, std::size_t n_x, std::mt19937_64& rng);

// PDE residual ---------------------------------------------------------------

/// Residual in normalized coordinates, consistent with the Green's kernel:
///   lap~ Us + (2pi)^2 (1 - dm/m0) Us - (2pi)^2 (dm/m0) U0,
/// equal to the physical residual times (2 pi v0 / omega)^2.
cplx pde_residual(cplx value, cplx laplacian, double dm, cplx u0, double m0);

/// Mean |scale * residual|^2 for externally supplied values and Laplacians.
double pde_loss_values(std::span<const cplx> values, std::span<const cplx> laplacians, const CollocationPool& batch,
                       double m0, double scale = 1.0);

LossValue pde_loss(const NeuralField& field, const CollocationPool& batch, double m0, double scale = 1.0,
                   bool with_grad = true);

// Training -------------------------------------------------------------------

enum class TrainMode { gi, hybrid, pde_only };
TrainMode parse_train_mode(std::string_view name);
std::string_view to_string(TrainMode mode);

struct TrainConfig {
  TrainMode mode = TrainMode::gi;
  std::size_t epochs = 30000;
  double lambda_max = 0.01;
  double lambda_midpoint = 0.5;
  double lambda_steepness = 20.0;
  std::size_t n_x = 1000;
  PoolConfig pool;
  std::uint64_t seed = 0;
  std::size_t eval_every = 500;
  double pde_scale = 1.0;
  NetworkShape network;
  InitConfig init;
  AdamConfig adam;
  /// When <= 0, the output scale is set to the RMS of b.
  double output_scale = 0.0;
};

/// lambda_max * sigmoid(s (t / T - t_mid)).
double lambda_at(std::size_t epoch, const TrainConfig& cfg);

struct LossRecord {
  std::size_t epoch = 0;
  double total = 0.0;
  double gi = 0.0;
  double pde = 0.0;
  double lambda = 0.0;
};

struct EvalRecord {
  std::size_t epoch = 0;
  double nmse = 0.0;
  double mae = 0.0;
};

struct EvalReport {
  std::vector<LossRecord> losses;
  std::vector<EvalRecord> evals;
  double final_nmse = 0.0;
  double final_mae = 0.0;
  double wall_ms = 0.0;
};

enum class TrainStatus { completed, non_finite };

struct TrainResult {
  NeuralField field;
  EvalReport report;
  TrainStatus status = TrainStatus::completed;
  std::size_t failed_epoch = 0;
};

/// Runs cfg.epochs Adam steps. `reference` lives on the GI grid.
TrainResult train(const TrainConfig& cfg, const GiProblem& problem, const ComplexField& reference);

/// Network prediction on the GI grid.
ComplexField predict_grid(const NeuralField& field, const GiProblem& problem);

/// sum |pred - ref|^2 / sum |ref|^2; throws InvalidArgument for a zero reference.
double nmse(const ComplexField& pred, const ComplexField& ref);
double mae(const ComplexField& pred, const ComplexField& ref);

/// CSV writers (CRLF, header row). The loss CSV carries no timing data so
/// equal runs give equal bytes.
void write_loss_csv(std::ostream& os, const EvalReport& report);
void write_eval_csv(std::ostream& os, const EvalReport& report);

}  // namespace gihelm
