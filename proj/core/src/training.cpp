#include "gihelm/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

#include "gihelm/errors.hpp"

namespace gihelm {

namespace {
constexpr double kTwoPiSq = 4.0 * std::numbers::pi * std::numbers::pi;
}

CoordinateFrame CoordinateFrame::centered_on(const Medium& medium) {
  return {medium.grid().center(), normalize_coord(1.0, medium.omega(), medium.v0())};
}

GiProblem make_gi_problem(const Medium& medium, const SourceSpec& source, SelfTermMode mode) {
  GreensKernel kernel = build_kernel(medium.grid(), medium.k0(), mode);
  ComplexField u0 = background_on_grid(medium, source);
  LinearSystemView system = make_gi_system(kernel, medium, u0);
  const CoordinateFrame frame = CoordinateFrame::centered_on(medium);
  std::vector<NormalizedPoint> pts(medium.grid().size());
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = frame(medium.grid().node(i));
  return GiProblem{medium, source, std::move(kernel), std::move(u0), std::move(system), frame, std::move(pts)};
}

double gi_loss_values(const GiProblem& problem, std::span<const cplx> us) {
  // e = Us_hat - Us = -r
  const CVector r = residual(problem.system, us);
  double acc = 0.0;
  for (const cplx& c : r) acc += std::norm(c);
  return acc / static_cast<double>(r.size());
}

std::vector<cplx> gi_loss_adjoint(const GiProblem& problem, std::span<const cplx> us) {
  const CVector r = residual(problem.system, us);
  // (A - I)^H e = (I - A)^H r
  CVector g = apply_system_adjoint(problem.system, r);
  const double s = 2.0 / static_cast<double>(r.size());
  for (auto& c : g) c *= s;
  return g;
}

double gi_loss_into(const NeuralField& field, const GiProblem& problem, ForwardCache& cache, std::span<double> grad) {
  forward_into(field, cache);
  const CVector r = residual(problem.system, cache.output);
  double acc = 0.0;
  for (const cplx& c : r) acc += std::norm(c);
  const double n = static_cast<double>(r.size());
  CVector adj = apply_system_adjoint(problem.system, r);
  for (auto& c : adj) c *= 2.0 / n;
  param_gradient(field, cache, adj, grad);
  return acc / n;
}

LossValue gi_loss(const NeuralField& field, const GiProblem& problem, bool with_grad) {
  LossValue out;
  if (!with_grad) {
    out.value = gi_loss_values(problem, forward(field, problem.grid_points));
    return out;
  }
  ForwardCache cache = make_forward_cache(problem.grid_points, field.shape().encoding);
  out.grad.resize(field.num_params());
  out.value = gi_loss_into(field, problem, cache, out.grad);
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> selection_probabilities(std::span<const double> abs_dm, double alpha, double eps_fraction) {
  if (abs_dm.empty()) throw InvalidArgument("selection_probabilities: no candidates");
  if (!(alpha >= 0.0) || !(eps_fraction >= 0.0)) throw InvalidArgument("selection_probabilities: negative parameter");
  const double mx = *std::max_element(abs_dm.begin(), abs_dm.end());
  std::vector<double> p(abs_dm.size());
  if (mx == 0.0) {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
    return p;
  }
  const double eps = eps_fraction * mx;
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::pow(std::abs(abs_dm[i]), alpha) + eps;
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& v : p) v /= total;
  return p;
}

std::vector<std::size_t> weighted_sample_without_replacement(std::span<const double> weights, std::size_t k,
                                                             std::mt19937_64& rng) {
  if (k > weights.size()) throw InvalidArgument("weighted_sample_without_replacement: k exceeds candidates");
  // Exponential-key method: the k smallest E_i / w_i are a sequential
  // proportional draw without replacement.
  std::exponential_distribution<double> ex(1.0);
  std::vector<std::pair<double, std::size_t>> keys;
  keys.reserve(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double e = ex(rng);
    if (weights[i] > 0.0) keys.emplace_back(e / weights[i], i);
  }
  if (keys.size() < k) throw InvalidArgument("weighted_sample_without_replacement: too few positive weights");
  std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(k), keys.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = keys[i].second;
  return out;
}

CollocationPool build_pool(const Medium& medium, const SourceSpec& source, const CoordinateFrame& frame,
                           const PoolConfig& cfg, std::uint64_t seed) {
  if (cfg.n_raw < cfg.n_pool) throw InvalidArgument("build_pool: n_raw must be >= n_pool");
  const Grid2D& g = medium.grid();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uz(g.z0, g.z_max());
  std::uniform_real_distribution<double> ux(g.x0, g.x_max());
  const double exclusion = cfg.source_exclusion_cells * std::max(g.dz, g.dx);

  std::vector<Point> cand;
  std::vector<double> abs_dm;
  cand.reserve(cfg.n_raw);
  abs_dm.reserve(cfg.n_raw);
  while (cand.size() < cfg.n_raw) {
    const Point p{uz(rng), ux(rng)};
    if (std::hypot(p.z - source.position.z, p.x - source.position.x) <= exclusion) continue;
    cand.push_back(p);
    abs_dm.push_back(std::abs(medium.dm_at(p)));
  }
  const auto prob = selection_probabilities(abs_dm, cfg.alpha, cfg.eps_fraction);
  const auto pick = weighted_sample_without_replacement(prob, cfg.n_pool, rng);

  CollocationPool pool;
  for (std::size_t i : pick) pool.physical.push_back(cand[i]);
  pool.u0 = background_field(medium, source, pool.physical);
  for (const Point& p : pool.physical) {
    pool.points.push_back(frame(p));
    pool.dm.push_back(medium.dm_at(p));
  }
  return pool;
}

CollocationPool draw_batch(const CollocationPool& pool, std::size_t n_x, std::mt19937_64& rng) {
  if (n_x > pool.points.size()) throw InvalidArgument("draw_batch: n_x exceeds pool size");
  std::uniform_int_distribution<std::size_t> pick(0, pool.points.size() - 1);
  CollocationPool b;
  b.physical.reserve(n_x);
  b.points.reserve(n_x);
  b.dm.reserve(n_x);
  b.u0.reserve(n_x);
  for (std::size_t k = 0; k < n_x; ++k) {
    const std::size_t i = pick(rng);
    b.physical.push_back(pool.physical[i]);
    b.points.push_back(pool.points[i]);
    b.dm.push_back(pool.dm[i]);
    b.u0.push_back(pool.u0[i]);
  }
  return b;
}

// ---------------------------------------------------------------------------

cplx pde_residual(cplx value, cplx laplacian, double dm, cplx u0, double m0) {
  const double q = dm / m0;
  return laplacian + kTwoPiSq * (1.0 - q) * value - kTwoPiSq * q * u0;
}

double pde_loss_values(std::span<const cplx> values, std::span<const cplx> laplacians, const CollocationPool& batch,
                       double m0, double scale) {
  const std::size_t n = batch.points.size();
  if (values.size() != n || laplacians.size() != n) throw InvalidArgument("pde_loss: size mismatch");
  if (n == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::norm(scale * pde_residual(values[i], laplacians[i], batch.dm[i], batch.u0[i], m0));
  return acc / static_cast<double>(n);
}

LossValue pde_loss(const NeuralField& field, const CollocationPool& batch, double m0, double scale, bool with_grad) {
  LossValue out;
  const std::size_t n = batch.points.size();
  if (n == 0) {
    if (with_grad) out.grad.assign(field.num_params(), 0.0);
    return out;
  }
  const LaplacianCache cache = laplacian_cached(field, batch.points);
  const auto& res = cache.result;
  std::vector<cplx> val_adj(n), lap_adj(n);
  double acc = 0.0;
  const double s2 = scale * scale;
  const double w = 2.0 * s2 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx r = pde_residual(res.value[i], res.laplacian[i], batch.dm[i], batch.u0[i], m0);
    acc += s2 * std::norm(r);
    lap_adj[i] = w * r;
    val_adj[i] = w * kTwoPiSq * (1.0 - batch.dm[i] / m0) * r;
  }
  out.value = acc / static_cast<double>(n);
  if (with_grad) out.grad = laplacian_param_gradient(field, cache, val_adj, lap_adj);
  return out;
}

// ---------------------------------------------------------------------------

TrainMode parse_train_mode(std::string_view name) {
  if (name == "gi") return TrainMode::gi;
  if (name == "hybrid") return TrainMode::hybrid;
  if (name == "pde_only") return TrainMode::pde_only;
  throw InvalidArgument("unknown training mode '" + std::string(name) + "'");
}

std::string_view to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::gi:
      return "gi";
    case TrainMode::hybrid:
      return "hybrid";
    case TrainMode::pde_only:
      return "pde_only";
  }
  return "unknown";
}

double lambda_at(std::size_t epoch, const TrainConfig& cfg) {
  if (cfg.lambda_max == 0.0) return 0.0;
  const double t = static_cast<double>(epoch) / static_cast<double>(cfg.epochs);
  return cfg.lambda_max / (1.0 + std::exp(-cfg.lambda_steepness * (t - cfg.lambda_midpoint)));
}

ComplexField predict_grid(const NeuralField& field, const GiProblem& problem) {
  return ComplexField(problem.medium.grid(), forward(field, problem.grid_points));
}

double nmse(const ComplexField& pred, const ComplexField& ref) {
  if (!(pred.grid == ref.grid)) throw InvalidArgument("nmse: grid mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < ref.values.size(); ++i) {
    num += std::norm(pred.values[i] - ref.values[i]);
    den += std::norm(ref.values[i]);
  }
  if (den == 0.0) throw InvalidArgument("nmse: reference field is zero");
  return num / den;
}

double mae(const ComplexField& pred, const ComplexField& ref) {
  if (!(pred.grid == ref.grid)) throw InvalidArgument("mae: grid mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < ref.values.size(); ++i) acc += std::abs(pred.values[i] - ref.values[i]);
  return acc / static_cast<double>(ref.values.size());
}

TrainResult train(const TrainConfig& cfg, const GiProblem& problem, const ComplexField& reference) {
  if (cfg.epochs == 0) throw InvalidArgument("train: epochs must be positive");
  if (!(cfg.lambda_max >= 0.0)) throw InvalidArgument("train: lambda_max must be non-negative");
  if (cfg.eval_every == 0) throw InvalidArgument("train: eval_every must be positive");
  const auto t0 = std::chrono::steady_clock::now();

  std::mt19937_64 rng(cfg.seed);
  const std::uint64_t init_seed = rng();
  const std::uint64_t pool_seed = rng();

  NetworkShape shape = cfg.network;
  shape.output_scale = cfg.output_scale > 0.0
                           ? cfg.output_scale
                           : norm2(problem.system.b) / std::sqrt(static_cast<double>(problem.system.n));
  if (!(shape.output_scale > 0.0)) shape.output_scale = 1.0;

  TrainResult result{NeuralField::initialized(shape, init_seed, cfg.init), {}, TrainStatus::completed, 0};
  NeuralField& field = result.field;
  AdamConfig acfg = cfg.adam;
  acfg.total_steps = cfg.epochs;
  AdamState adam = make_adam(field.num_params(), acfg);

  const bool uses_gi = cfg.mode != TrainMode::pde_only;
  const bool may_use_pde = cfg.mode != TrainMode::gi;
  CollocationPool pool;
  if (may_use_pde) pool = build_pool(problem.medium, problem.source, problem.frame, cfg.pool, pool_seed);
  const double m0 = problem.medium.m0();

  auto evaluate = [&](std::size_t epoch) {
    const ComplexField pred = predict_grid(field, problem);
    result.report.evals.push_back({epoch, nmse(pred, reference), mae(pred, reference)});
  };

  std::vector<double> grad(field.num_params());
  ForwardCache cache;
  if (uses_gi) cache = make_forward_cache(problem.grid_points, field.shape().encoding);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (epoch % cfg.eval_every == 0) evaluate(epoch);
    LossRecord rec;
    rec.epoch = epoch;
    std::fill(grad.begin(), grad.end(), 0.0);
    if (uses_gi) rec.gi = gi_loss_into(field, problem, cache, grad);
    const double lam = cfg.mode == TrainMode::pde_only ? 1.0 : cfg.mode == TrainMode::hybrid ? lambda_at(epoch, cfg) : 0.0;
    rec.lambda = lam;
    if (lam != 0.0) {
      const CollocationPool batch = draw_batch(pool, cfg.n_x, rng);
      const LossValue pl = pde_loss(field, batch, m0, cfg.pde_scale);
      rec.pde = pl.value;
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += lam * pl.grad[i];
    }
    rec.total = rec.gi + lam * rec.pde;
    result.report.losses.push_back(rec);
    if (!std::isfinite(rec.total)) {
      result.status = TrainStatus::non_finite;
      result.failed_epoch = epoch;
      break;
    }
    adam_step(adam, field.params(), grad);
  }
  if (result.status == TrainStatus::completed) {
    evaluate(cfg.epochs);
    result.report.final_nmse = result.report.evals.back().nmse;
    result.report.final_mae = result.report.evals.back().mae;
  }
  result.report.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

void write_loss_csv(std::ostream& os, const EvalReport& report) {
  os << "epoch,loss,gi_loss,pde_loss,lambda\r\n";
  os.precision(17);
  for (const auto& r : report.losses) {
    os << r.epoch << ',' << r.total << ',' << r.gi << ',' << r.pde << ',' << r.lambda << "\r\n";
  }
}

void write_eval_csv(std::ostream& os, const EvalReport& report) {
  os << "epoch,nmse,mae\r\n";
  os.precision(17);
  for (const auto& r : report.evals) os << r.epoch << ',' << r.nmse << ',' << r.mae << "\r\n";
}

}  // namespace gihelm
