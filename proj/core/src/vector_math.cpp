#include "vector_math.hpp"

#include <cmath>

namespace gihelm::detail {

void sin_cos(const double* a, double* s, double* c, std::size_t n) {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) s[i] = std::sin(a[i]);
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) c[i] = std::cos(a[i]);
}

}  // namespace gihelm::detail
