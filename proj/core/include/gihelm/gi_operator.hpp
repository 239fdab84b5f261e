#pragma once

#include <Eigen/Dense>

#include <functional>

#include "gihelm/greens.hpp"
#include "gihelm/grid.hpp"

namespace gihelm {

inline constexpr std::size_t kDefaultDenseCap = 16384;

using CVector = std::vector<cplx>;

/// D(y) = omega^2 dm(y) [U0(y) + Us(y)] W. The quadrature weight lives here,
/// not in the kernel.
struct ScatterSource {
  ComplexField values;
};

ScatterSource scatter_source(const Medium& medium, const ComplexField& u0, const ComplexField& us);

/// Diagonal of M: omega^2 dm W per node.
std::vector<double> scattering_weights(const Medium& medium);

/// Us_hat = G * D evaluated by zero-padded FFT convolution.
ComplexField gi_reconstruct_fft(const GreensKernel& kernel, const Medium& medium, const ComplexField& u0,
                                const ComplexField& us);

/// Explicit O(N^2) sum with G_jj = self term. Independent of the FFT path:
/// Green's values come straight from green0/self_term.
/// Throws ResourceLimit if the grid has more than `cap` nodes.
ComplexField gi_reconstruct_dense(const Medium& medium, const GreensKernel& kernel, const ComplexField& u0,
                                  const ComplexField& us, std::size_t cap = kDefaultDenseCap);

/// Dense Green's matrix G (N x N) for the grid, built from green0/self_term.
Eigen::MatrixXcd dense_green_matrix(const Grid2D& grid, double k0, SelfTermMode mode,
                                    std::size_t cap = kDefaultDenseCap);

/// (1/N) sum |Us_hat - Us|^2 over the grid.
double gi_mismatch(const GreensKernel& kernel, const Medium& medium, const ComplexField& u0, const ComplexField& us);

/// The linear system (I - A) us = b with A = G M and b = G M u0, exposed
/// through operator callbacks so iterative solvers never need the matrix.
struct LinearSystemView {
  std::size_t n = 0;
  std::function<CVector(std::span<const cplx>)> apply_A;
  std::function<CVector(std::span<const cplx>)> apply_AH;
  CVector b;
  /// Optional explicit A; when empty, solvers assemble it column by column.
  std::function<Eigen::MatrixXcd()> assemble_A;
};

/// A applied by FFT convolution; assemble_A uses dense_green_matrix.
LinearSystemView make_gi_system(const GreensKernel& kernel, const Medium& medium, const ComplexField& u0,
                                std::size_t dense_cap = kDefaultDenseCap);

/// Wraps an explicit matrix (scalar and toy systems, tests).
LinearSystemView make_dense_system(Eigen::MatrixXcd A, CVector b);

/// r = (I - A) us - b.
CVector residual(const LinearSystemView& view, std::span<const cplx> us);

/// (I - A) v and (I - A)^H v.
CVector apply_system(const LinearSystemView& view, std::span<const cplx> v);
CVector apply_system_adjoint(const LinearSystemView& view, std::span<const cplx> v);

double norm2(std::span<const cplx> v);

}  // namespace gihelm
