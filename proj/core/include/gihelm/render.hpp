#pragma once

#include <string>
#include <string_view>

#include "gihelm/grid.hpp"

namespace gihelm {

enum class RenderPart { re, im, abs };

RenderPart parse_render_part(std::string_view name);

/// Binary 8-bit PGM, one pixel per node, depth increasing downward.
/// Re/Im use a symmetric range around zero (zero maps to 128); Abs is
/// min-max scaled. A constant image is mid-gray.
std::string render_pgm(const ComplexField& field, RenderPart part);

}  // namespace gihelm
