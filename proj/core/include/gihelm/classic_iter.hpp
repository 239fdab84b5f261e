#pragma once

#include <iosfwd>
#include <string_view>

#include "gihelm/gi_operator.hpp"

namespace gihelm {

enum class IterationStatus { converged, diverged, max_iters };

std::string_view to_string(IterationStatus status);

struct IterationRecord {
  std::size_t step = 0;
  double residual_norm = 0.0;
  double elapsed_ms = 0.0;
};

struct IterationTrace {
  std::vector<IterationRecord> records;
  IterationStatus status = IterationStatus::max_iters;

  double final_residual() const { return records.empty() ? 0.0 : records.back().residual_norm; }
};

/// CSV with header `step,residual_norm,elapsed_ms`.
void write_trace_csv(std::ostream& os, const IterationTrace& trace);

struct IterationResult {
  CVector us;
  IterationTrace trace;
};

/// Stops on ||r|| <= tol ||b||, on ||r|| > 1e6 ||b|| for 10 consecutive steps
/// (diverged), or after max_iters updates.
struct StopRule {
  std::size_t max_iters = 1000;
  double tol = 1e-10;
  double divergence_factor = 1e6;
  std::size_t divergence_patience = 10;
};

/// Dense LU with partial pivoting on the assembled I - A. Throws
/// ResourceLimit above `dense_cap` unknowns and SingularSystem when a pivot
/// falls below 1e-14 relative to the largest entry.
CVector solve_direct(const LinearSystemView& view, std::size_t dense_cap = kDefaultDenseCap);

/// Born-Neumann fixed point u <- A u + b from u = 0.
IterationResult born_iterate(const LinearSystemView& view, const StopRule& rule);

/// Landweber iteration u <- u - eta (I - A)^H r from u = 0. Stable for
/// eta < 2 / sigma_max^2.
IterationResult landweber_iterate(const LinearSystemView& view, double eta, const StopRule& rule);

/// Power iteration on (I - A)^H (I - A); returns the estimate of the largest
/// singular value of I - A.
double estimate_sigma_max(const LinearSystemView& view, std::size_t iters, std::uint64_t seed = 0x5eed);

/// Power-iteration estimate of the spectral radius of A.
double estimate_rho(const LinearSystemView& view, std::size_t iters, std::uint64_t seed = 0x5eed);

}  // namespace gihelm
