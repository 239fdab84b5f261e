#pragma once

#include <complex>

namespace gihelm {

/// Bessel functions of order zero for real x > 0.
///
/// Power series (evaluated in extended precision) for x <= 12 and the Hankel
/// asymptotic expansion beyond. The modulus of H0 is accurate to better than
/// 1e-10 relative on (1e-8, 1e4).
double bessel_j0(double x);
double bessel_y0(double x);

/// H0^(2)(x) = J0(x) - i Y0(x). Throws InvalidArgument for x <= 0.
std::complex<double> hankel_h0_second(double x);

}  // namespace gihelm
