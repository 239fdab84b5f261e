#pragma once

#include "gihelm/grid.hpp"

namespace gihelm::acceptance {

/// Radiating field u = (i/4) H0^(2)(k r) outside a disk of radius a, joined
/// inside to a cubic in r^2 with matching value and first three radial
/// derivatives. The source (lap + k^2) u is then C^1 and supported in the
/// disk, and its convolution with G0 is u itself.
class DiskSolution {
 public:
  DiskSolution(double k0, double radius);

  cplx field(double r) const;
  cplx source(double r) const;

  double k0() const noexcept { return k0_; }
  double radius() const noexcept { return a_; }

 private:
  double k0_;
  double a_;
  cplx c_[4];  // Taylor coefficients of the inner cubic in s = r^2 about a^2
};

}  // namespace gihelm::acceptance
