#include "test_support.hpp"

#include <cmath>
#include <numbers>

namespace gihelm::testing {

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("gihelm_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

Medium random_medium(std::size_t nz, std::size_t nx, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Grid2D g{nz, nx, 0.02 + 0.01 * std::abs(u(rng)), 0.02 + 0.01 * std::abs(u(rng)), u(rng), u(rng)};
  const double v0 = 2.0;
  std::vector<double> v(g.size());
  for (auto& x : v) x = v0 * (1.0 + 0.2 * u(rng));
  return Medium(g, std::move(v), v0, 2.0 * std::numbers::pi * (5.0 + 5.0 * std::abs(u(rng))));
}

ComplexField random_field(const Grid2D& grid, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  ComplexField f(grid);
  for (auto& c : f.values) c = {n(rng), n(rng)};
  return f;
}

double rel_l2(std::span<const cplx> a, std::span<const cplx> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return std::sqrt(num / den);
}

}  // namespace gihelm::testing
