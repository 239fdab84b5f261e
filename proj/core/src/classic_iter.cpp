#include "gihelm/classic_iter.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <random>

#include "gihelm/errors.hpp"

namespace gihelm {

std::string_view to_string(IterationStatus status) {
  switch (status) {
    case IterationStatus::converged:
      return "converged";
    case IterationStatus::diverged:
      return "diverged";
    case IterationStatus::max_iters:
      return "max_iters";
  }
  return "unknown";
}

void write_trace_csv(std::ostream& os, const IterationTrace& trace) {
  os << "step,residual_norm,elapsed_ms\r\n";
  os.precision(17);
  for (const auto& r : trace.records) os << r.step << ',' << r.residual_norm << ',' << r.elapsed_ms << "\r\n";
}

CVector solve_direct(const LinearSystemView& view, std::size_t dense_cap) {
  const std::size_t n = view.n;
  if (n > dense_cap) {
    throw ResourceLimit("solve_direct: " + std::to_string(n) + " unknowns exceeds dense cap " +
                        std::to_string(dense_cap));
  }
  Eigen::MatrixXcd m;
  if (view.assemble_A) {
    m = view.assemble_A();
  } else {
    m.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    CVector e(n);
    for (std::size_t c = 0; c < n; ++c) {
      e[c] = 1.0;
      const CVector col = view.apply_A(e);
      for (std::size_t r = 0; r < n; ++r) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = col[r];
      e[c] = 0.0;
    }
  }
  m = -m;
  m.diagonal().array() += 1.0;
  const double scale = m.cwiseAbs().maxCoeff();

  Eigen::PartialPivLU<Eigen::Ref<Eigen::MatrixXcd>> lu(m);
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(min_pivot > 1e-14 * scale)) throw SingularSystem("solve_direct: pivot below 1e-14, matrix is singular");

  const Eigen::Map<const Eigen::VectorXcd> b(view.b.data(), static_cast<Eigen::Index>(n));
  const Eigen::VectorXcd x = lu.solve(b);
  return CVector(x.data(), x.data() + x.size());
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Shared bookkeeping for residual-driven iterations.
class Monitor {
 public:
  Monitor(const LinearSystemView& view, const StopRule& rule) : rule_(rule), bnorm_(norm2(view.b)) {}

  // Records ||r|| for the current iterate; returns true when iteration must stop.
  bool record(IterationTrace& trace, std::size_t step, double rnorm) {
    trace.records.push_back({step, rnorm, ms_since(t0_)});
    if (!std::isfinite(rnorm)) {
      trace.status = IterationStatus::diverged;
      return true;
    }
    if (rnorm <= rule_.tol * bnorm_) {
      trace.status = IterationStatus::converged;
      return true;
    }
    above_ = rnorm > rule_.divergence_factor * bnorm_ ? above_ + 1 : 0;
    if (above_ >= rule_.divergence_patience) {
      trace.status = IterationStatus::diverged;
      return true;
    }
    if (step >= rule_.max_iters) {
      trace.status = IterationStatus::max_iters;
      return true;
    }
    return false;
  }

 private:
  StopRule rule_;
  double bnorm_;
  std::size_t above_ = 0;
  Clock::time_point t0_ = Clock::now();
};

}  // namespace

IterationResult born_iterate(const LinearSystemView& view, const StopRule& rule) {
  IterationResult out;
  out.us.assign(view.n, cplx{});
  Monitor mon(view, rule);
  for (std::size_t step = 0;; ++step) {
    const CVector r = residual(view, out.us);
    if (mon.record(out.trace, step, norm2(r))) break;
    // u - r = A u + b
    for (std::size_t i = 0; i < view.n; ++i) out.us[i] -= r[i];
  }
  return out;
}

IterationResult landweber_iterate(const LinearSystemView& view, double eta, const StopRule& rule) {
  if (!(eta >= 0.0)) throw InvalidArgument("landweber_iterate: eta must be non-negative");
  IterationResult out;
  out.us.assign(view.n, cplx{});
  Monitor mon(view, rule);
  for (std::size_t step = 0;; ++step) {
    const CVector r = residual(view, out.us);
    if (mon.record(out.trace, step, norm2(r))) break;
    const CVector g = apply_system_adjoint(view, r);
    for (std::size_t i = 0; i < view.n; ++i) out.us[i] -= eta * g[i];
  }
  return out;
}

namespace {

CVector seeded_unit_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  CVector v(n);
  for (auto& c : v) c = {nd(rng), nd(rng)};
  const double s = norm2(v);
  for (auto& c : v) c /= s;
  return v;
}

}  // namespace

double estimate_sigma_max(const LinearSystemView& view, std::size_t iters, std::uint64_t seed) {
  if (iters < 1) throw InvalidArgument("estimate_sigma_max: iters must be >= 1");
  CVector v = seeded_unit_vector(view.n, seed);
  double lambda = 0.0;
  for (std::size_t it = 0; it < iters; ++it) {
    CVector w = apply_system_adjoint(view, apply_system(view, v));
    lambda = norm2(w);
    if (lambda == 0.0) return 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) v[i] = w[i] / lambda;
  }
  // Rayleigh quotient ||(I - A) v||^2 for the final unit vector.
  return norm2(apply_system(view, v));
}

double estimate_rho(const LinearSystemView& view, std::size_t iters, std::uint64_t seed) {
  if (iters < 1) throw InvalidArgument("estimate_rho: iters must be >= 1");
  CVector v = seeded_unit_vector(view.n, seed);
  double growth = 0.0;
  for (std::size_t it = 0; it < iters; ++it) {
    CVector w = view.apply_A(v);
    growth = norm2(w);
    if (growth == 0.0) return 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) v[i] = w[i] / growth;
  }
  return growth;
}

}  // namespace gihelm
