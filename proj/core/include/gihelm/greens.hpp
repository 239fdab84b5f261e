#pragma once

#include <memory>
#include <string_view>

#include "gihelm/grid.hpp"

namespace gihelm {

inline constexpr double kEulerGamma = 0.57721566490153286061;

/// How the zero-offset (self-interaction) entry of the kernel is filled.
enum class SelfTermMode { zero, cell_averaged };

SelfTermMode parse_self_term_mode(std::string_view name);
std::string_view to_string(SelfTermMode mode);

/// 2D homogeneous-background Green's function (i/4) H0^(2)(k0 r).
///
/// With this sign, (lap + k0^2) G0 = +delta. Throws SingularEvaluation for
/// r == 0 and InvalidArgument for r < 0.
cplx green0(double r, double k0);

/// Average of G0 over a disk of radius h:
///   (1/2pi)(ln h + ln(k0/2) + gamma - 1/2) + i/4.
cplx self_term(double h, double k0, SelfTermMode mode);

/// Equivalent-disk radius sqrt(dz*dx/pi) of one grid cell.
double equivalent_radius(const Grid2D& grid);

class FftPlan2D;

/// Zero-padded Green's kernel and its spectrum, ready for linear convolution
/// on the physical grid via circular convolution on the padded grid.
///
/// Sample (iz, ix) of the kernel grid holds G0 at the signed offset
/// (dz * sz, dx * sx), sz = iz for iz <= pz/2 and iz - pz otherwise.
/// Immutable after construction; safe to share between threads.
class GreensKernel {
 public:
  const Grid2D& physical_grid() const noexcept { return physical_; }
  const Grid2D& kernel_grid() const noexcept { return kernel_grid_; }
  const ComplexField& samples() const noexcept { return samples_; }
  std::span<const cplx> spectrum() const noexcept { return spectrum_; }
  double k0() const noexcept { return k0_; }
  SelfTermMode self_term_mode() const noexcept { return mode_; }
  const FftPlan2D& plan() const noexcept { return *plan_; }

  /// Linear convolution of `source` (physical grid, row-major) with the
  /// kernel, restricted to the physical grid.
  std::vector<cplx> convolve(std::span<const cplx> source) const;
  /// Convolution with conj(G0); the adjoint of convolve() since G0 is symmetric.
  std::vector<cplx> convolve_adjoint(std::span<const cplx> source) const;

 private:
  friend GreensKernel build_kernel(const Grid2D&, double, SelfTermMode);
  GreensKernel() = default;

  Grid2D physical_;
  Grid2D kernel_grid_;
  ComplexField samples_;
  std::vector<cplx> spectrum_;
  double k0_ = 0.0;
  SelfTermMode mode_ = SelfTermMode::cell_averaged;
  std::shared_ptr<const FftPlan2D> plan_;
};

/// Smallest n' >= n whose only prime factors are 2, 3 and 5.
std::size_t next_fft_size(std::size_t n);

/// Kernel padded to next_fft_size(2 n) per axis.
GreensKernel build_kernel(const Grid2D& physical_grid, double k0, SelfTermMode mode);

}  // namespace gihelm
