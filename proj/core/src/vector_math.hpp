#pragma once

#include <cstddef>

namespace gihelm::detail {

/// s[i] = sin(a[i]), c[i] = cos(a[i]).
void sin_cos(const double* a, double* s, double* c, std::size_t n);

}  // namespace gihelm::detail
