#pragma once

#include <filesystem>
#include <string>

#include "gihelm/grid.hpp"

namespace gihelm {

inline constexpr std::size_t kFieldHeaderBytes = 46;

/// Field file: magic "GIHF", u16 version, u32 nz, u32 nx, f64 dz, dx, z0, x0,
/// then little-endian f32 (Re, Im) pairs in row-major order.
std::string encode_field(const ComplexField& field);
ComplexField decode_field(const std::string& bytes);

void write_field(const std::filesystem::path& path, const ComplexField& field);
ComplexField read_field(const std::filesystem::path& path);

}  // namespace gihelm
