#include "gihelm/bessel.hpp"

#include <cmath>
#include <numbers>

#include "gihelm/errors.hpp"

namespace gihelm {

namespace {

constexpr double kSeriesLimit = 12.0;
constexpr long double kGammaL = 0.577215664901532860606512090082402431L;
constexpr long double kPiL = 3.141592653589793238462643383279502884L;

struct J0Y0 {
  double j0;
  double y0;
};

// Ascending series. Terms grow to ~e^x / x before cancelling, so the sums
// run in long double.
J0Y0 series(double xd) {
  const long double x = xd;
  const long double q = x * x / 4.0L;
  long double term = 1.0L;  // (-q)^k / (k!)^2
  long double harmonic = 0.0L;
  long double j0 = 1.0L;
  long double ysum = 0.0L;
  for (int k = 1; k < 200; ++k) {
    term *= -q / (static_cast<long double>(k) * k);
    harmonic += 1.0L / k;
    j0 += term;
    ysum -= harmonic * term;
    if (std::fabs(term) * (1.0L + harmonic) < 1e-22L * std::fabs(j0) && k > 2) break;
  }
  const long double y0 = (2.0L / kPiL) * ((std::log(x / 2.0L) + kGammaL) * j0 + ysum);
  return {static_cast<double>(j0), static_cast<double>(y0)};
}

// Hankel expansion: J0 = sqrt(2/(pi x)) (P cos chi - Q sin chi),
// Y0 = sqrt(2/(pi x)) (P sin chi + Q cos chi), chi = x - pi/4.
void asymptotic_pq(double x, double& p, double& q) {
  // c_k = prod_{j<=k} (2j-1)^2 / (k! 8^k); successive terms c_k / x^k.
  double term = 1.0;
  double prev = 2.0;
  p = 0.0;
  q = 0.0;
  for (int k = 0; k < 200; ++k) {
    if (k > 0) term *= static_cast<double>((2 * k - 1) * (2 * k - 1)) / (8.0 * k * x);
    if (term > prev) break;  // optimal truncation of the divergent series
    const int sign = ((k / 2) % 2 == 0) ? 1 : -1;
    if (k % 2 == 0) {
      p += sign * term;
    } else {
      q -= sign * term;
    }
    if (term < 1e-17) break;
    prev = term;
  }
}

}  // namespace

double bessel_j0(double x) {
  if (!(x > 0.0)) throw InvalidArgument("bessel_j0: x must be positive");
  if (x <= kSeriesLimit) return series(x).j0;
  double p, q;
  asymptotic_pq(x, p, q);
  const double chi = x - std::numbers::pi / 4.0;
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

double bessel_y0(double x) {
  if (!(x > 0.0)) throw InvalidArgument("bessel_y0: x must be positive");
  if (x <= kSeriesLimit) return series(x).y0;
  double p, q;
  asymptotic_pq(x, p, q);
  const double chi = x - std::numbers::pi / 4.0;
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::sin(chi) + q * std::cos(chi));
}

std::complex<double> hankel_h0_second(double x) {
  if (!(x > 0.0)) throw InvalidArgument("hankel_h0_second: x must be positive");
  if (x <= kSeriesLimit) {
    const auto s = series(x);
    return {s.j0, -s.y0};
  }
  double p, q;
  asymptotic_pq(x, p, q);
  const double chi = x - std::numbers::pi / 4.0;
  const double amp = std::sqrt(2.0 / (std::numbers::pi * x));
  const double c = std::cos(chi);
  const double s = std::sin(chi);
  return {amp * (p * c - q * s), -amp * (p * s + q * c)};
}

}  // namespace gihelm
