#include "gihelm/greens.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gihelm/bessel.hpp"
#include "gihelm/errors.hpp"
#include "gihelm/fft.hpp"

namespace gihelm {

SelfTermMode parse_self_term_mode(std::string_view name) {
  if (name == "zero") return SelfTermMode::zero;
  if (name == "cell_averaged") return SelfTermMode::cell_averaged;
  throw InvalidArgument("unknown self-term mode '" + std::string(name) + "'");
}

std::string_view to_string(SelfTermMode mode) {
  return mode == SelfTermMode::zero ? "zero" : "cell_averaged";
}

cplx green0(double r, double k0) {
  if (r == 0.0) throw SingularEvaluation("green0: zero distance, use self_term");
  if (!(r > 0.0)) throw InvalidArgument("green0: distance must be positive");
  if (!(k0 > 0.0)) throw InvalidArgument("green0: k0 must be positive");
  return cplx(0.0, 0.25) * hankel_h0_second(k0 * r);
}

cplx self_term(double h, double k0, SelfTermMode mode) {
  if (!(h > 0.0) || !(k0 > 0.0)) throw InvalidArgument("self_term: h and k0 must be positive");
  if (mode == SelfTermMode::zero) return {0.0, 0.0};
  const double re = (std::log(h) + std::log(k0 / 2.0) + kEulerGamma - 0.5) / (2.0 * std::numbers::pi);
  return {re, 0.25};
}

double equivalent_radius(const Grid2D& grid) {
  return std::sqrt(grid.cell_weight() / std::numbers::pi);
}

std::size_t next_fft_size(std::size_t n) {
  if (n <= 1) return 1;
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2u, 3u, 5u}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

GreensKernel build_kernel(const Grid2D& physical_grid, double k0, SelfTermMode mode) {
  physical_grid.validate();
  if (!(k0 > 0.0)) throw InvalidArgument("build_kernel: k0 must be positive");

  GreensKernel kernel;
  kernel.physical_ = physical_grid;
  kernel.k0_ = k0;
  kernel.mode_ = mode;

  const std::size_t pz = next_fft_size(2 * physical_grid.nz);
  const std::size_t px = next_fft_size(2 * physical_grid.nx);
  Grid2D kg = physical_grid;
  kg.nz = pz;
  kg.nx = px;
  kg.z0 = 0.0;
  kg.x0 = 0.0;
  kernel.kernel_grid_ = kg;

  // Offsets depend on |sz|, |sx| only; tabulate once per unique pair.
  const std::size_t hz = pz / 2 + 1;
  const std::size_t hx = px / 2 + 1;
  std::vector<cplx> table(hz * hx);
  for (std::size_t az = 0; az < hz; ++az) {
    for (std::size_t ax = 0; ax < hx; ++ax) {
      if (az == 0 && ax == 0) {
        table[0] = self_term(equivalent_radius(physical_grid), k0, mode);
        continue;
      }
      const double r = std::hypot(static_cast<double>(az) * kg.dz, static_cast<double>(ax) * kg.dx);
      table[az * hx + ax] = green0(r, k0);
    }
  }

  kernel.samples_ = ComplexField(kg);
  for (std::size_t iz = 0; iz < pz; ++iz) {
    const std::size_t az = iz <= pz / 2 ? iz : pz - iz;
    for (std::size_t ix = 0; ix < px; ++ix) {
      const std::size_t ax = ix <= px / 2 ? ix : px - ix;
      kernel.samples_(iz, ix) = table[az * hx + ax];
    }
  }

  auto plan = std::make_shared<FftPlan2D>(pz, px);
  FftBuffer buf(pz * px);
  std::copy(kernel.samples_.values.begin(), kernel.samples_.values.end(), buf.data());
  plan->forward(buf);
  // Fold the inverse-transform normalization into the spectrum.
  const double scale = 1.0 / static_cast<double>(pz * px);
  kernel.spectrum_.resize(pz * px);
  for (std::size_t i = 0; i < pz * px; ++i) kernel.spectrum_[i] = buf.data()[i] * scale;
  kernel.plan_ = std::move(plan);
  return kernel;
}

namespace {

std::vector<cplx> convolve_impl(const GreensKernel& k, std::span<const cplx> source, bool conjugate) {
  const Grid2D& g = k.physical_grid();
  if (source.size() != g.size()) throw InvalidArgument("convolve: source size does not match grid");
  const FftPlan2D& plan = k.plan();
  const std::size_t px = plan.cols();
  FftBuffer buf(plan.size());
  std::fill(buf.data(), buf.data() + buf.size(), cplx{});
  for (std::size_t iz = 0; iz < g.nz; ++iz) {
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      const cplx v = source[g.index(iz, ix)];
      buf.data()[iz * px + ix] = conjugate ? std::conj(v) : v;
    }
  }
  plan.forward(buf);
  const auto spec = k.spectrum();
  for (std::size_t i = 0; i < buf.size(); ++i) buf.data()[i] *= spec[i];
  plan.backward(buf);
  std::vector<cplx> out(g.size());
  for (std::size_t iz = 0; iz < g.nz; ++iz) {
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      const cplx v = buf.data()[iz * px + ix];
      out[g.index(iz, ix)] = conjugate ? std::conj(v) : v;
    }
  }
  return out;
}

}  // namespace

std::vector<cplx> GreensKernel::convolve(std::span<const cplx> source) const {
  return convolve_impl(*this, source, false);
}

std::vector<cplx> GreensKernel::convolve_adjoint(std::span<const cplx> source) const {
  // conj(G) * s = conj(G * conj(s))
  return convolve_impl(*this, source, true);
}

}  // namespace gihelm
