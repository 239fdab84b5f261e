#include "gihelm/gi_operator.hpp"

#include <cmath>
#include <string>

#include "gihelm/errors.hpp"

namespace gihelm {

namespace {

void require_same_grid(const Grid2D& a, const Grid2D& b, const char* what) {
  if (!(a == b)) throw InvalidArgument(std::string(what) + ": grid mismatch");
}

void check_inputs(const GreensKernel& kernel, const Medium& medium, const ComplexField& u0,
                  const ComplexField& us) {
  require_same_grid(kernel.physical_grid(), medium.grid(), "kernel/medium");
  require_same_grid(medium.grid(), u0.grid, "u0");
  require_same_grid(medium.grid(), us.grid, "us");
}

}  // namespace

std::vector<double> scattering_weights(const Medium& medium) {
  const double w = medium.omega() * medium.omega() * medium.grid().cell_weight();
  std::vector<double> out(medium.grid().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = w * medium.dm(i);
  return out;
}

ScatterSource scatter_source(const Medium& medium, const ComplexField& u0, const ComplexField& us) {
  require_same_grid(medium.grid(), u0.grid, "u0");
  require_same_grid(medium.grid(), us.grid, "us");
  const auto m = scattering_weights(medium);
  ScatterSource d{ComplexField(medium.grid())};
  for (std::size_t i = 0; i < m.size(); ++i) d.values.values[i] = m[i] * (u0.values[i] + us.values[i]);
  return d;
}

ComplexField gi_reconstruct_fft(const GreensKernel& kernel, const Medium& medium, const ComplexField& u0,
                                const ComplexField& us) {
  check_inputs(kernel, medium, u0, us);
  const auto d = scatter_source(medium, u0, us);
  return ComplexField(medium.grid(), kernel.convolve(d.values.values));
}

Eigen::MatrixXcd dense_green_matrix(const Grid2D& grid, double k0, SelfTermMode mode, std::size_t cap) {
  grid.validate();
  const std::size_t n = grid.size();
  if (n > cap) {
    throw ResourceLimit("dense Green's matrix: " + std::to_string(n) + " nodes exceeds cap " + std::to_string(cap));
  }
  // G depends on |offset| only: tabulate per (|dz|, |dx|) index pair.
  Eigen::MatrixXcd table(grid.nz, grid.nx);
  for (std::size_t a = 0; a < grid.nz; ++a) {
    for (std::size_t c = 0; c < grid.nx; ++c) {
      table(a, c) = (a == 0 && c == 0)
                        ? self_term(equivalent_radius(grid), k0, mode)
                        : green0(std::hypot(static_cast<double>(a) * grid.dz, static_cast<double>(c) * grid.dx), k0);
    }
  }
  Eigen::MatrixXcd g(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t jz = j / grid.nx;
    const std::size_t jx = j % grid.nx;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t kz = k / grid.nx;
      const std::size_t kx = k % grid.nx;
      g(j, k) = table(jz > kz ? jz - kz : kz - jz, jx > kx ? jx - kx : kx - jx);
    }
  }
  return g;
}

ComplexField gi_reconstruct_dense(const Medium& medium, const GreensKernel& kernel, const ComplexField& u0,
                                  const ComplexField& us, std::size_t cap) {
  check_inputs(kernel, medium, u0, us);
  const Eigen::MatrixXcd g = dense_green_matrix(medium.grid(), kernel.k0(), kernel.self_term_mode(), cap);
  const auto d = scatter_source(medium, u0, us);
  const Eigen::Map<const Eigen::VectorXcd> dv(d.values.values.data(), static_cast<Eigen::Index>(d.values.values.size()));
  ComplexField out(medium.grid());
  Eigen::Map<Eigen::VectorXcd>(out.values.data(), static_cast<Eigen::Index>(out.values.size())) = g * dv;
  return out;
}

double gi_mismatch(const GreensKernel& kernel, const Medium& medium, const ComplexField& u0, const ComplexField& us) {
  const ComplexField hat = gi_reconstruct_fft(kernel, medium, u0, us);
  double acc = 0.0;
  for (std::size_t i = 0; i < hat.values.size(); ++i) acc += std::norm(hat.values[i] - us.values[i]);
  return acc / static_cast<double>(hat.values.size());
}

LinearSystemView make_gi_system(const GreensKernel& kernel, const Medium& medium, const ComplexField& u0,
                                std::size_t dense_cap) {
  require_same_grid(kernel.physical_grid(), medium.grid(), "kernel/medium");
  require_same_grid(medium.grid(), u0.grid, "u0");
  auto k = std::make_shared<const GreensKernel>(kernel);
  auto m = std::make_shared<const std::vector<double>>(scattering_weights(medium));

  LinearSystemView view;
  view.n = medium.grid().size();
  view.apply_A = [k, m](std::span<const cplx> v) {
    CVector d(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) d[i] = (*m)[i] * v[i];
    return k->convolve(d);
  };
  // A^H = M^H G^H = M conj(G), G being symmetric and M real.
  view.apply_AH = [k, m](std::span<const cplx> v) {
    CVector out = k->convolve_adjoint(v);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= (*m)[i];
    return out;
  };
  view.b = view.apply_A(u0.values);
  const Grid2D grid = medium.grid();
  const double k0 = kernel.k0();
  const SelfTermMode mode = kernel.self_term_mode();
  view.assemble_A = [grid, k0, mode, m, dense_cap]() {
    Eigen::MatrixXcd a = dense_green_matrix(grid, k0, mode, dense_cap);
    for (Eigen::Index c = 0; c < a.cols(); ++c) a.col(c) *= (*m)[static_cast<std::size_t>(c)];
    return a;
  };
  return view;
}

LinearSystemView make_dense_system(Eigen::MatrixXcd A, CVector b) {
  if (A.rows() != A.cols() || static_cast<std::size_t>(A.rows()) != b.size()) {
    throw InvalidArgument("make_dense_system: shape mismatch");
  }
  auto a = std::make_shared<const Eigen::MatrixXcd>(std::move(A));
  LinearSystemView view;
  view.n = b.size();
  view.b = std::move(b);
  view.apply_A = [a](std::span<const cplx> v) {
    const Eigen::Map<const Eigen::VectorXcd> x(v.data(), static_cast<Eigen::Index>(v.size()));
    const Eigen::VectorXcd y = (*a) * x;
    return CVector(y.data(), y.data() + y.size());
  };
  view.apply_AH = [a](std::span<const cplx> v) {
    const Eigen::Map<const Eigen::VectorXcd> x(v.data(), static_cast<Eigen::Index>(v.size()));
    const Eigen::VectorXcd y = a->adjoint() * x;
    return CVector(y.data(), y.data() + y.size());
  };
  view.assemble_A = [a]() { return *a; };
  return view;
}

CVector apply_system(const LinearSystemView& view, std::span<const cplx> v) {
  CVector out = view.apply_A(v);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i] - out[i];
  return out;
}

CVector apply_system_adjoint(const LinearSystemView& view, std::span<const cplx> v) {
  CVector out = view.apply_AH(v);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i] - out[i];
  return out;
}

CVector residual(const LinearSystemView& view, std::span<const cplx> us) {
  if (us.size() != view.n) throw InvalidArgument("residual: size mismatch");
  CVector r = apply_system(view, us);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= view.b[i];
  return r;
}

double norm2(std::span<const cplx> v) {
  double acc = 0.0;
  for (const cplx& c : v) acc += std::norm(c);
  return std::sqrt(acc);
}

}  // namespace gihelm
