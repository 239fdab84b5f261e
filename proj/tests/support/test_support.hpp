#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "gihelm/grid.hpp"

namespace gihelm::testing {

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

/// Random smooth-ish medium on an nz x nx grid with |dm| of either sign.
Medium random_medium(std::size_t nz, std::size_t nx, std::mt19937_64& rng);

ComplexField random_field(const Grid2D& grid, std::mt19937_64& rng);

double rel_l2(std::span<const cplx> a, std::span<const cplx> b);

}  // namespace gihelm::testing
