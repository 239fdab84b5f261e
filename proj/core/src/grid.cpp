#include "gihelm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gihelm/errors.hpp"
#include "gihelm/greens.hpp"

namespace gihelm {

void Grid2D::validate() const {
  if (nz < 2 || nx < 2) throw InvalidArgument("grid needs at least 2 samples per axis");
  if (!(dz > 0.0) || !(dx > 0.0)) throw InvalidArgument("grid spacing must be positive");
  if (!std::isfinite(z0) || !std::isfinite(x0)) throw InvalidArgument("grid origin must be finite");
}

ComplexField::ComplexField(const Grid2D& g, std::vector<cplx> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) throw InvalidArgument("field size does not match grid");
}

bool ComplexField::all_finite() const noexcept {
  return std::all_of(values.begin(), values.end(),
                     [](const cplx& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
}

Medium::Medium(Grid2D grid, std::vector<double> velocity, double v0, double omega)
    : grid_(grid), velocity_(std::move(velocity)), v0_(v0), omega_(omega) {
  grid_.validate();
  if (velocity_.size() != grid_.size()) throw InvalidArgument("velocity size does not match grid");
  if (!(v0_ > 0.0)) throw InvalidArgument("v0 must be positive");
  if (!(omega_ > 0.0)) throw InvalidArgument("omega must be positive");
  for (double v : velocity_) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("velocity must be positive and finite");
  }
}

std::vector<double> Medium::dm_field() const {
  std::vector<double> out(velocity_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = dm(i);
  return out;
}

double Medium::max_abs_dm() const {
  double mx = 0.0;
  for (std::size_t i = 0; i < velocity_.size(); ++i) mx = std::max(mx, std::abs(dm(i)));
  return mx;
}

double Medium::velocity_at(const Point& p) const {
  const double fz = std::clamp((p.z - grid_.z0) / grid_.dz, 0.0, static_cast<double>(grid_.nz - 1));
  const double fx = std::clamp((p.x - grid_.x0) / grid_.dx, 0.0, static_cast<double>(grid_.nx - 1));
  const auto iz = std::min(static_cast<std::size_t>(fz), grid_.nz - 2);
  const auto ix = std::min(static_cast<std::size_t>(fx), grid_.nx - 2);
  const double tz = fz - static_cast<double>(iz);
  const double tx = fx - static_cast<double>(ix);
  const auto v = [&](std::size_t a, std::size_t b) { return velocity_[grid_.index(a, b)]; };
  return (1 - tz) * ((1 - tx) * v(iz, ix) + tx * v(iz, ix + 1)) +
         tz * ((1 - tx) * v(iz + 1, ix) + tx * v(iz + 1, ix + 1));
}

double Medium::dm_at(const Point& p) const {
  const double v = velocity_at(p);
  return 1.0 / (v * v) - m0();
}

double normalize_coord(double x, double omega, double v0) {
  if (!(omega > 0.0) || !(v0 > 0.0)) throw InvalidArgument("normalize_coords: omega and v0 must be positive");
  return omega * x / (2.0 * std::numbers::pi * v0);
}

NormalizedCoords normalize_coords(const Grid2D& grid, double omega, double v0) {
  NormalizedCoords out;
  out.z.resize(grid.nz);
  out.x.resize(grid.nx);
  for (std::size_t i = 0; i < grid.nz; ++i) out.z[i] = normalize_coord(grid.node(i, 0).z, omega, v0);
  for (std::size_t i = 0; i < grid.nx; ++i) out.x[i] = normalize_coord(grid.node(0, i).x, omega, v0);
  return out;
}

namespace {

// 1 on the interior, raised-cosine ramp over `width` pad cells, then 0.
double taper_weight(std::size_t distance, std::size_t width) {
  if (distance == 0) return 1.0;
  if (distance >= width) return 0.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(distance) / static_cast<double>(width)));
}

}  // namespace

Medium taper_perturbation(const Medium& medium, std::size_t pad_cells, std::size_t taper_width_cells) {
  if (taper_width_cells > pad_cells) throw InvalidArgument("taper width must not exceed pad");
  if (pad_cells == 0) return medium;

  const Grid2D& in = medium.grid();
  Grid2D out = in;
  out.nz = in.nz + 2 * pad_cells;
  out.nx = in.nx + 2 * pad_cells;
  out.z0 = in.z0 - static_cast<double>(pad_cells) * in.dz;
  out.x0 = in.x0 - static_cast<double>(pad_cells) * in.dx;

  const auto vin = medium.velocity();
  const double m0 = medium.m0();
  std::vector<double> v(out.size());
  const auto p = static_cast<std::ptrdiff_t>(pad_cells);
  for (std::size_t iz = 0; iz < out.nz; ++iz) {
    const std::ptrdiff_t sz = static_cast<std::ptrdiff_t>(iz) - p;
    const std::size_t cz = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(sz, 0, static_cast<std::ptrdiff_t>(in.nz) - 1));
    const std::size_t dz = static_cast<std::size_t>(std::abs(sz - static_cast<std::ptrdiff_t>(cz)));
    for (std::size_t ix = 0; ix < out.nx; ++ix) {
      const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(ix) - p;
      const std::size_t cx = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(sx, 0, static_cast<std::ptrdiff_t>(in.nx) - 1));
      const std::size_t dx = static_cast<std::size_t>(std::abs(sx - static_cast<std::ptrdiff_t>(cx)));
      const std::size_t src = in.index(cz, cx);
      if (dz == 0 && dx == 0) {
        v[out.index(iz, ix)] = vin[src];
        continue;
      }
      const double w = taper_weight(dz, taper_width_cells) * taper_weight(dx, taper_width_cells);
      const double dm = w * medium.dm(src);
      v[out.index(iz, ix)] = dm == 0.0 ? medium.v0() : 1.0 / std::sqrt(m0 + dm);
    }
  }
  return Medium(out, std::move(v), medium.v0(), medium.omega());
}

std::vector<cplx> background_field(const Medium& medium, const SourceSpec& source,
                                   std::span<const Point> eval_points) {
  std::vector<cplx> out(eval_points.size());
  if (source.amplitude == cplx{}) return out;
  for (std::size_t i = 0; i < eval_points.size(); ++i) {
    const double r = std::hypot(eval_points[i].z - source.position.z, eval_points[i].x - source.position.x);
    if (r == 0.0) throw SingularEvaluation("background_field: evaluation point coincides with the source");
    out[i] = source.amplitude * green0(r, medium.k0());
  }
  return out;
}

ComplexField background_on_grid(const Medium& medium, const SourceSpec& source) {
  const Grid2D& g = medium.grid();
  if (!g.contains(source.position)) throw InvalidArgument("source lies outside the grid");
  ComplexField out(g);
  if (source.amplitude == cplx{}) return out;
  const double tol_z = 1e-9 * g.dz;
  const double tol_x = 1e-9 * g.dx;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point p = g.node(i);
    const double ddz = p.z - source.position.z;
    const double ddx = p.x - source.position.x;
    if (std::abs(ddz) <= tol_z && std::abs(ddx) <= tol_x) {
      out.values[i] = source.amplitude * self_term(equivalent_radius(g), medium.k0(), SelfTermMode::cell_averaged);
    } else {
      out.values[i] = source.amplitude * green0(std::hypot(ddz, ddx), medium.k0());
    }
  }
  return out;
}

Medium homogeneous_medium(const Grid2D& grid, double v0, double omega) {
  grid.validate();
  return Medium(grid, std::vector<double>(grid.size(), v0), v0, omega);
}

Medium gaussian_lens(const Grid2D& grid, double v0, double omega, Point center, double sigma, double contrast) {
  grid.validate();
  if (!(sigma > 0.0)) throw InvalidArgument("lens sigma must be positive");
  if (!(contrast > -1.0)) throw InvalidArgument("lens contrast must exceed -1");
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point p = grid.node(i);
    const double r2 = (p.z - center.z) * (p.z - center.z) + (p.x - center.x) * (p.x - center.x);
    v[i] = v0 * (1.0 + contrast * std::exp(-r2 / (2.0 * sigma * sigma)));
  }
  return Medium(grid, std::move(v), v0, omega);
}

Medium layered_medium(const Grid2D& grid, double v0, double omega, std::span<const double> interfaces,
                      std::span<const double> velocities) {
  grid.validate();
  if (velocities.size() != interfaces.size() + 1) {
    throw InvalidArgument("layered medium needs one more velocity than interfaces");
  }
  if (!std::is_sorted(interfaces.begin(), interfaces.end())) throw InvalidArgument("interfaces must be sorted");
  std::vector<double> v(grid.size());
  for (std::size_t iz = 0; iz < grid.nz; ++iz) {
    const double z = grid.node(iz, 0).z;
    const auto layer = static_cast<std::size_t>(
        std::upper_bound(interfaces.begin(), interfaces.end(), z) - interfaces.begin());
    for (std::size_t ix = 0; ix < grid.nx; ++ix) v[grid.index(iz, ix)] = velocities[layer];
  }
  return Medium(grid, std::move(v), v0, omega);
}

}  // namespace gihelm
