#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace gihelm {

using cplx = std::complex<double>;

/// Physical location in km. z is depth, x is lateral.
struct Point {
  double z = 0.0;
  double x = 0.0;
};

/// Regular rectangular grid. Node (iz, ix) sits at (z0 + iz*dz, x0 + ix*dx).
///
/// Storage order for every field on a grid is row-major with z as the slow
/// axis: flat index = iz * nx + ix.
struct Grid2D {
  std::size_t nz = 0;
  std::size_t nx = 0;
  double dz = 0.0;
  double dx = 0.0;
  double z0 = 0.0;
  double x0 = 0.0;

  /// Throws InvalidArgument unless nz, nx >= 2 and dz, dx > 0.
  void validate() const;

  std::size_t size() const noexcept { return nz * nx; }
  std::size_t index(std::size_t iz, std::size_t ix) const noexcept { return iz * nx + ix; }
  double cell_weight() const noexcept { return dz * dx; }
  Point node(std::size_t iz, std::size_t ix) const noexcept {
    return {z0 + static_cast<double>(iz) * dz, x0 + static_cast<double>(ix) * dx};
  }
  Point node(std::size_t flat) const noexcept { return node(flat / nx, flat % nx); }
  double z_max() const noexcept { return z0 + static_cast<double>(nz - 1) * dz; }
  double x_max() const noexcept { return x0 + static_cast<double>(nx - 1) * dx; }
  Point center() const noexcept { return {0.5 * (z0 + z_max()), 0.5 * (x0 + x_max())}; }
  bool contains(const Point& p) const noexcept {
    return p.z >= z0 && p.z <= z_max() && p.x >= x0 && p.x <= x_max();
  }

  friend bool operator==(const Grid2D&, const Grid2D&) = default;
};

/// Complex samples on a grid (wavefields, residuals, kernels).
struct ComplexField {
  Grid2D grid;
  std::vector<cplx> values;

  ComplexField() = default;
  explicit ComplexField(const Grid2D& g) : grid(g), values(g.size()) {}
  ComplexField(const Grid2D& g, std::vector<cplx> v);

  cplx& operator()(std::size_t iz, std::size_t ix) { return values[grid.index(iz, ix)]; }
  const cplx& operator()(std::size_t iz, std::size_t ix) const { return values[grid.index(iz, ix)]; }
  bool all_finite() const noexcept;
};

/// Velocity model plus the homogeneous background it is split against.
class Medium {
 public:
  /// velocity in km/s on `grid`, v0 in km/s, omega in rad/s.
  Medium(Grid2D grid, std::vector<double> velocity, double v0, double omega);

  const Grid2D& grid() const noexcept { return grid_; }
  std::span<const double> velocity() const noexcept { return velocity_; }
  double v0() const noexcept { return v0_; }
  double omega() const noexcept { return omega_; }
  /// Background wavenumber omega / v0 in 1/km.
  double k0() const noexcept { return omega_ / v0_; }
  double m0() const noexcept { return 1.0 / (v0_ * v0_); }
  double m(std::size_t i) const noexcept { return 1.0 / (velocity_[i] * velocity_[i]); }
  double dm(std::size_t i) const noexcept { return m(i) - m0(); }
  std::vector<double> dm_field() const;
  double max_abs_dm() const;
  /// Bilinear interpolation of velocity; p must lie in the grid bounding box.
  double velocity_at(const Point& p) const;
  double dm_at(const Point& p) const;

 private:
  Grid2D grid_;
  std::vector<double> velocity_;
  double v0_;
  double omega_;
};

struct SourceSpec {
  Point position;
  cplx amplitude{1.0, 0.0};
};

/// Wavelength-normalized coordinates x~ = omega * x / (2 pi v0) for each axis.
struct NormalizedCoords {
  std::vector<double> z;
  std::vector<double> x;
};

double normalize_coord(double x, double omega, double v0);
/// Applies the normalization to every node coordinate of `grid`.
NormalizedCoords normalize_coords(const Grid2D& grid, double omega, double v0);

/// Pads the medium by `pad_cells` on every side. Interior velocities are
/// copied verbatim; in the pad the edge perturbation is multiplied by a
/// raised-cosine ramp reaching exactly zero after `taper_width_cells` cells.
Medium taper_perturbation(const Medium& medium, std::size_t pad_cells, std::size_t taper_width_cells);

/// U0(x) = amplitude * G0(|x - x_s|). Throws SingularEvaluation if a point
/// coincides with the source.
std::vector<cplx> background_field(const Medium& medium, const SourceSpec& source,
                                   std::span<const Point> eval_points);

/// U0 on the medium grid. A node that coincides with the source takes the
/// cell-averaged self term instead of the singular point value.
ComplexField background_on_grid(const Medium& medium, const SourceSpec& source);

// Synthetic media -----------------------------------------------------------

Medium homogeneous_medium(const Grid2D& grid, double v0, double omega);

/// v(x) = v0 * (1 + contrast * exp(-|x - center|^2 / (2 sigma^2))).
/// Negative contrast gives a slow lens (positive dm).
Medium gaussian_lens(const Grid2D& grid, double v0, double omega, Point center, double sigma,
                     double contrast);

/// Horizontal layers: velocities[i] applies for depth < interfaces[i];
/// the last velocity fills everything below the last interface.
Medium layered_medium(const Grid2D& grid, double v0, double omega, std::span<const double> interfaces,
                      std::span<const double> velocities);

}  // namespace gihelm
