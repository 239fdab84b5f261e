#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "gihelm/classic_iter.hpp"
#include "gihelm/errors.hpp"
#include "gihelm/training.hpp"
#include "test_support.hpp"

using namespace gihelm;

namespace {

constexpr double kPi = std::numbers::pi;

Medium lens(std::size_t n, double contrast = -0.15, double freq = 10.0) {
  const double h = 0.4 / static_cast<double>(n - 1);
  return gaussian_lens(Grid2D{n, n, h, h, 0, 0}, 2.0, 2 * kPi * freq, {0.2, 0.2}, 0.07, contrast);
}

SourceSpec corner_source(const Medium& m) { return {m.grid().node(1, 1)}; }

double sq_norm(std::span<const cplx> v) {
  double s = 0.0;
  for (const cplx& c : v) s += std::norm(c);
  return s;
}

TrainConfig tiny_config(TrainMode mode, std::size_t epochs) {
  TrainConfig cfg;
  cfg.mode = mode;
  cfg.epochs = epochs;
  cfg.network.width = 16;
  cfg.network.hidden_layers = 3;
  cfg.n_x = 100;
  cfg.pool = {.n_pool = 500, .n_raw = 2000};
  cfg.eval_every = 10;
  cfg.seed = 42;
  return cfg;
}

}  // namespace

TEST(GiLoss, ExactSolutionAndZeroField) {
  const GiProblem p = make_gi_problem(lens(12), corner_source(lens(12)));
  const double n = static_cast<double>(p.system.n);
  const auto exact = solve_direct(p.system);
  const double bscale = sq_norm(p.system.b) / n;
  EXPECT_LE(gi_loss_values(p, exact), 1e-16 * bscale);
  EXPECT_NEAR(gi_loss_values(p, std::vector<cplx>(p.system.n)), bscale, 1e-14 * bscale);
  EXPECT_GT(bscale, 0.0);
  const NeuralField zero(NetworkShape{});
  EXPECT_NEAR(gi_loss(zero, p, false).value, bscale, 1e-14 * bscale);
}

TEST(GiLoss, HomogeneousPenalizesAnyField) {
  const Medium m = homogeneous_medium(Grid2D{8, 8, 0.02, 0.02, 0, 0}, 2.0, 40.0);
  const GiProblem p = make_gi_problem(m, corner_source(m));
  std::mt19937_64 rng(1);
  const auto us = gihelm::testing::random_field(m.grid(), rng).values;
  const double expect = sq_norm(us) / static_cast<double>(us.size());
  EXPECT_NEAR(gi_loss_values(p, us), expect, 1e-14 * expect);
}

TEST(GiLoss, TrivialTotalFieldPenalty) {
  const Medium m = lens(10);
  const GiProblem p = make_gi_problem(m, corner_source(m));
  std::vector<cplx> us(p.u0.values.size());
  for (std::size_t i = 0; i < us.size(); ++i) us[i] = -p.u0.values[i];
  const double expect = sq_norm(p.u0.values) / static_cast<double>(us.size());
  EXPECT_GE(gi_loss_values(p, us), expect * (1 - 1e-10));
  EXPECT_NEAR(gi_loss_values(p, us), expect, 1e-10 * expect);
}

TEST(GiLoss, AdjointMatchesFiniteDifferences) {
  const Medium m = lens(7);
  const GiProblem p = make_gi_problem(m, corner_source(m));
  std::mt19937_64 rng(2);
  auto us = gihelm::testing::random_field(m.grid(), rng).values;
  const auto adj = gi_loss_adjoint(p, us);
  const double d = 1e-6;
  for (std::size_t i = 0; i < us.size(); i += 5) {
    const cplx keep = us[i];
    us[i] = keep + d;
    const double rp = gi_loss_values(p, us);
    us[i] = keep - d;
    const double rm = gi_loss_values(p, us);
    us[i] = keep + cplx{0, d};
    const double ip = gi_loss_values(p, us);
    us[i] = keep - cplx{0, d};
    const double im = gi_loss_values(p, us);
    us[i] = keep;
    const cplx fd{(rp - rm) / (2 * d), (ip - im) / (2 * d)};
    EXPECT_LE(std::abs(fd - adj[i]), 1e-6 * std::max(std::abs(adj[i]), 1e-3));
  }
}

TEST(GiLoss, ParameterGradientMatchesFiniteDifferences) {
  const Medium m = lens(9);
  const GiProblem p = make_gi_problem(m, corner_source(m));
  NetworkShape s;
  s.width = 12;
  s.hidden_layers = 3;
  s.output_scale = 0.01;
  auto f = NeuralField::initialized(s, 5);
  const auto lv = gi_loss(f, p);
  ForwardCache cache = make_forward_cache(p.grid_points, s.encoding);
  std::vector<double> g2(f.num_params());
  EXPECT_EQ(gi_loss_into(f, p, cache, g2), lv.value);
  EXPECT_EQ(g2, lv.grad);
  double scale = 0.0;
  for (double g : lv.grad) scale = std::max(scale, std::abs(g));
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> pick(0, f.num_params() - 1);
  const double d = 1e-5;
  for (int k = 0; k < 20; ++k) {
    const std::size_t j = pick(rng);
    const double keep = f.params()[j];
    f.params()[j] = keep + d;
    const double lp = gi_loss(f, p, false).value;
    f.params()[j] = keep - d;
    const double lm = gi_loss(f, p, false).value;
    f.params()[j] = keep;
    const double fd = (lp - lm) / (2 * d);
    EXPECT_LE(std::abs(fd - lv.grad[j]), 1e-5 * std::max(std::abs(lv.grad[j]), 1e-2 * scale)) << j;
  }
}

TEST(PdeLoss, ResidualAlgebra) {
  const double m0 = 0.25, dm = 0.05;
  const cplx u{0.3, -0.1}, u0{1.2, 0.4}, lap{-2.0, 5.0};
  const double k2 = 4 * kPi * kPi;
  const cplx expect = lap + k2 * (1 - dm / m0) * u - k2 * (dm / m0) * u0;
  EXPECT_LE(std::abs(pde_residual(u, lap, dm, u0, m0) - expect), 1e-13);
}

TEST(PdeLoss, ZeroFieldInHomogeneousMedium) {
  const Medium m = homogeneous_medium(Grid2D{8, 8, 0.02, 0.02, 0, 0}, 2.0, 40.0);
  const auto pool = build_pool(m, corner_source(m), CoordinateFrame::centered_on(m), {.n_pool = 50, .n_raw = 100}, 1);
  EXPECT_EQ(pde_loss(NeuralField(NetworkShape{}), pool, m.m0()).value, 0.0);
}

TEST(PdeLoss, NegatedBackgroundHasZeroResidual) {
  const Medium m = lens(32);
  const SourceSpec src = corner_source(m);
  const CoordinateFrame frame = CoordinateFrame::centered_on(m);
  const auto pool = build_pool(m, src, frame, {.n_pool = 300, .n_raw = 1000}, 2);
  // -U0 has Laplacian (2 pi)^2 U0 in normalized coordinates away from the source.
  std::vector<cplx> val(pool.u0.size()), lap(pool.u0.size());
  for (std::size_t i = 0; i < val.size(); ++i) {
    val[i] = -pool.u0[i];
    lap[i] = 4 * kPi * kPi * pool.u0[i];
  }
  const double trivial = pde_loss_values(val, lap, pool, m.m0());
  const double zero = pde_loss_values(std::vector<cplx>(val.size()), std::vector<cplx>(val.size()), pool, m.m0());
  EXPECT_LE(trivial, 1e-20 * zero);
  EXPECT_GT(zero, 0.0);
}

TEST(PdeLoss, NormalizedScalingOnPlaneWave) {
  // Re Us = sin(2 pi x~) solves the normalized homogeneous equation.
  NetworkShape s;
  s.hidden_layers = 1;
  s.width = 2;
  NeuralField f(s);
  f.weight(0)(0, 0) = 2 * kPi;
  f.weight(1)(0, 0) = 1.0;
  const Medium m = homogeneous_medium(Grid2D{8, 8, 0.02, 0.02, 0, 0}, 2.0, 40.0);
  const auto pool = build_pool(m, corner_source(m), CoordinateFrame::centered_on(m), {.n_pool = 64, .n_raw = 64}, 3);
  EXPECT_LE(pde_loss(f, pool, m.m0(), 1.0, false).value, 1e-20);
  f.weight(0)(0, 0) = 2.2 * kPi;
  EXPECT_GT(pde_loss(f, pool, m.m0(), 1.0, false).value, 1e-2);
}

TEST(PdeLoss, GradientMatchesFiniteDifferences) {
  const Medium m = lens(16);
  const auto pool =
      build_pool(m, corner_source(m), CoordinateFrame::centered_on(m), {.n_pool = 40, .n_raw = 200}, 4);
  NetworkShape s;
  s.width = 10;
  s.hidden_layers = 3;
  s.output_scale = 0.05;
  auto f = NeuralField::initialized(s, 6);
  const double scale = 0.7;
  const auto lv = pde_loss(f, pool, m.m0(), scale);
  double gmax = 0.0;
  for (double g : lv.grad) gmax = std::max(gmax, std::abs(g));
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> pick(0, f.num_params() - 1);
  const double d = 1e-5;
  for (int k = 0; k < 20; ++k) {
    const std::size_t j = pick(rng);
    const double keep = f.params()[j];
    f.params()[j] = keep + d;
    const double lp = pde_loss(f, pool, m.m0(), scale, false).value;
    f.params()[j] = keep - d;
    const double lm = pde_loss(f, pool, m.m0(), scale, false).value;
    f.params()[j] = keep;
    const double fd = (lp - lm) / (2 * d);
    EXPECT_LE(std::abs(fd - lv.grad[j]), 1e-5 * std::max(std::abs(lv.grad[j]), 1e-2 * gmax)) << j;
  }
}

TEST(Schedule, LambdaExamples) {
  TrainConfig cfg;
  cfg.epochs = 1000;
  EXPECT_NEAR(lambda_at(1000, cfg), 0.01 / (1 + std::exp(-10.0)), 1e-15);
  EXPECT_GT(lambda_at(1000, cfg), 0.9999 * 0.01 - 1e-7);
  EXPECT_DOUBLE_EQ(lambda_at(500, cfg), 0.005);
  EXPECT_LT(lambda_at(0, cfg), 1e-6);
  cfg.lambda_max = 0.0;
  for (std::size_t t : {0, 250, 500, 1000}) EXPECT_EQ(lambda_at(t, cfg), 0.0);
}

TEST(Sampling, ProbabilityExamples) {
  const std::vector<double> dm{0.0, 1.0, 3.0};
  const auto p = selection_probabilities(dm, 1.0, 0.01);
  EXPECT_NEAR(p[0], 0.03 / 4.09, 1e-15);
  EXPECT_NEAR(p[1], 1.03 / 4.09, 1e-15);
  EXPECT_NEAR(p[2], 3.03 / 4.09, 1e-15);
  EXPECT_NEAR(p[0], 0.00733, 1e-5);
  EXPECT_NEAR(p[1], 0.25183, 1e-5);
  EXPECT_NEAR(p[2], 0.74083, 1e-5);
  for (double q : selection_probabilities(dm, 0.0, 0.01)) EXPECT_NEAR(q, 1.0 / 3.0, 1e-15);
  for (double q : selection_probabilities(std::vector<double>(4, 0.0), 1.0, 0.01)) EXPECT_EQ(q, 0.25);
}

TEST(Sampling, SingleDrawFrequencies) {
  const std::vector<double> w{0.03, 1.03, 3.03};
  std::mt19937_64 rng(9);
  std::array<int, 3> count{};
  const int trials = 100000;
  for (int t = 0; t < trials; ++t) ++count[weighted_sample_without_replacement(w, 1, rng)[0]];
  for (std::size_t i = 0; i < 3; ++i) {
    const double p = w[i] / 4.09;
    const double sigma = std::sqrt(trials * p * (1 - p));
    EXPECT_LE(std::abs(count[i] - trials * p), 3 * sigma) << i;
  }
}

TEST(Sampling, WithoutReplacementIsDistinct) {
  std::mt19937_64 rng(10);
  const std::vector<double> w(50, 1.0);
  auto pick = weighted_sample_without_replacement(w, 50, rng);
  std::sort(pick.begin(), pick.end());
  for (std::size_t i = 0; i < pick.size(); ++i) EXPECT_EQ(pick[i], i);
  EXPECT_THROW(weighted_sample_without_replacement(w, 51, rng), InvalidArgument);
}

TEST(Pool, CachedValuesAndExclusion) {
  const Medium m = lens(20);
  const SourceSpec src = corner_source(m);
  const CoordinateFrame frame = CoordinateFrame::centered_on(m);
  const PoolConfig cfg{.n_pool = 400, .n_raw = 2000, .source_exclusion_cells = 2.0};
  const auto pool = build_pool(m, src, frame, cfg, 11);
  ASSERT_EQ(pool.points.size(), 400u);
  const auto u0 = background_field(m, src, pool.physical);
  for (std::size_t i = 0; i < pool.points.size(); ++i) {
    const Point& q = pool.physical[i];
    EXPECT_TRUE(m.grid().contains(q));
    EXPECT_GT(std::hypot(q.z - src.position.z, q.x - src.position.x), 2.0 * m.grid().dz);
    EXPECT_EQ(pool.dm[i], m.dm_at(q));
    EXPECT_EQ(pool.u0[i], u0[i]);
    EXPECT_EQ(pool.points[i].z, frame(q).z);
  }
  const auto again = build_pool(m, src, frame, cfg, 11);
  EXPECT_EQ(again.dm, pool.dm);
  EXPECT_THROW(build_pool(m, src, frame, {.n_pool = 10, .n_raw = 5}, 1), InvalidArgument);
}

TEST(Pool, ImportanceFavoursTheLens) {
  const Medium m = lens(20, -0.2);
  const auto uniform = build_pool(m, corner_source(m), CoordinateFrame::centered_on(m),
                                  {.n_pool = 500, .n_raw = 5000, .alpha = 0.0}, 12);
  const auto weighted = build_pool(m, corner_source(m), CoordinateFrame::centered_on(m),
                                   {.n_pool = 500, .n_raw = 5000, .alpha = 1.0}, 12);
  auto mean_abs = [](const CollocationPool& p) {
    double s = 0.0;
    for (double d : p.dm) s += std::abs(d);
    return s / static_cast<double>(p.dm.size());
  };
  EXPECT_GT(mean_abs(weighted), 1.5 * mean_abs(uniform));
}

TEST(Pool, DrawBatch) {
  const Medium m = lens(10);
  const auto pool = build_pool(m, corner_source(m), CoordinateFrame::centered_on(m), {.n_pool = 30, .n_raw = 60}, 13);
  std::mt19937_64 rng(1);
  const auto b = draw_batch(pool, 30, rng);
  EXPECT_EQ(b.points.size(), 30u);
  EXPECT_EQ(b.u0.size(), 30u);
  EXPECT_THROW(draw_batch(pool, 31, rng), InvalidArgument);
}

TEST(Metrics, NmseAndMae) {
  std::mt19937_64 rng(14);
  const Grid2D g{3, 4, 0.1, 0.1, 0, 0};
  const ComplexField ref = gihelm::testing::random_field(g, rng);
  ComplexField twice = ref;
  for (auto& c : twice.values) c *= 2.0;
  EXPECT_EQ(nmse(ref, ref), 0.0);
  EXPECT_DOUBLE_EQ(nmse(ComplexField(g), ref), 1.0);
  EXPECT_DOUBLE_EQ(nmse(twice, ref), 1.0);
  EXPECT_EQ(mae(ref, ref), 0.0);
  EXPECT_THROW(nmse(ref, ComplexField(g)), InvalidArgument);
}

TEST(Modes, Names) {
  for (TrainMode mode : {TrainMode::gi, TrainMode::hybrid, TrainMode::pde_only})
    EXPECT_EQ(parse_train_mode(to_string(mode)), mode);
  EXPECT_THROW(parse_train_mode("pinn"), InvalidArgument);
}

TEST(Train, GiLossDecreasesAndCsv) {
  const Medium m = lens(12);
  const GiProblem p = make_gi_problem(m, corner_source(m));
  const ComplexField ref(m.grid(), solve_direct(p.system));
  const auto r = train(tiny_config(TrainMode::gi, 300), p, ref);
  ASSERT_EQ(r.status, TrainStatus::completed);
  ASSERT_EQ(r.report.losses.size(), 300u);
  EXPECT_LT(r.report.losses.back().gi, 0.5 * r.report.losses.front().gi);
  EXPECT_EQ(r.report.evals.size(), 31u);
  EXPECT_EQ(r.report.evals.back().epoch, 300u);
  EXPECT_EQ(r.report.final_nmse, r.report.evals.back().nmse);
  for (const auto& l : r.report.losses) EXPECT_EQ(l.pde, 0.0);
  std::ostringstream a, b;
  write_loss_csv(a, r.report);
  write_eval_csv(b, r.report);
  EXPECT_EQ(a.str().rfind("epoch,loss,gi_loss,pde_loss,lambda\r\n", 0), 0u);
  EXPECT_EQ(b.str().rfind("epoch,nmse,mae\r\n", 0), 0u);
  const std::string csv = a.str();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 301);
}

TEST(Train, DeterministicAndHybridCollapse) {
  const Medium m = lens(10);
  const GiProblem p = make_gi_problem(m, corner_source(m));
  const ComplexField ref(m.grid(), solve_direct(p.system));
  const auto a = train(tiny_config(TrainMode::gi, 25), p, ref);
  const auto b = train(tiny_config(TrainMode::gi, 25), p, ref);
  EXPECT_EQ(encode_checkpoint(a.field), encode_checkpoint(b.field));
  auto hcfg = tiny_config(TrainMode::hybrid, 25);
  hcfg.lambda_max = 0.0;
  const auto h = train(hcfg, p, ref);
  EXPECT_EQ(encode_checkpoint(h.field), encode_checkpoint(a.field));
  std::ostringstream ca, ch;
  write_eval_csv(ca, a.report);
  write_eval_csv(ch, h.report);
  EXPECT_EQ(ca.str(), ch.str());
}

TEST(Train, HybridUsesPdeTerm) {
  const Medium m = lens(10);
  const GiProblem p = make_gi_problem(m, corner_source(m));
  const ComplexField ref(m.grid(), solve_direct(p.system));
  auto cfg = tiny_config(TrainMode::hybrid, 20);
  cfg.lambda_max = 0.01;
  const auto h = train(cfg, p, ref);
  EXPECT_GT(h.report.losses.back().pde, 0.0);
  EXPECT_NEAR(h.report.losses.back().lambda, lambda_at(19, cfg), 1e-18);
}

TEST(Train, NonFiniteStops) {
  const Medium m = lens(8);
  const GiProblem p = make_gi_problem(m, corner_source(m));
  const ComplexField ref(m.grid(), solve_direct(p.system));
  auto cfg = tiny_config(TrainMode::gi, 10);
  cfg.output_scale = std::numeric_limits<double>::infinity();
  const auto r = train(cfg, p, ref);
  EXPECT_EQ(r.status, TrainStatus::non_finite);
  EXPECT_EQ(r.failed_epoch, 0u);
}

TEST(Train, PdeOnlyIgnoresTheGiTerm) {
  const Medium m = lens(10);
  const GiProblem p = make_gi_problem(m, corner_source(m));
  const ComplexField ref(m.grid(), solve_direct(p.system));
  const auto r = train(tiny_config(TrainMode::pde_only, 5), p, ref);
  for (const auto& l : r.report.losses) {
    EXPECT_EQ(l.gi, 0.0);
    EXPECT_EQ(l.lambda, 1.0);
  }
}
