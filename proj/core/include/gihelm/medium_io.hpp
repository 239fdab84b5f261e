#pragma once

#include <filesystem>

#include "gihelm/grid.hpp"

namespace gihelm {

/// Velocity model on disk: a raw little-endian float32 grid (row-major, z slow)
/// plus a JSON sidecar {nz, nx, dz, dx, z0, x0, v0, omega}.
Medium read_velocity_model(const std::filesystem::path& raw_path, const std::filesystem::path& sidecar_path);

void write_velocity_model(const Medium& medium, const std::filesystem::path& raw_path,
                          const std::filesystem::path& sidecar_path);

}  // namespace gihelm
