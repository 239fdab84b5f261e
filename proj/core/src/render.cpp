#include "gihelm/render.hpp"

#include <algorithm>
#include <cmath>

#include "gihelm/errors.hpp"

namespace gihelm {

RenderPart parse_render_part(std::string_view name) {
  if (name == "re") return RenderPart::re;
  if (name == "im") return RenderPart::im;
  if (name == "abs") return RenderPart::abs;
  throw InvalidArgument("unknown render part '" + std::string(name) + "'");
}

std::string render_pgm(const ComplexField& field, RenderPart part) {
  const Grid2D& g = field.grid;
  std::vector<double> v(field.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const cplx c = field.values[i];
    v[i] = part == RenderPart::re ? c.real() : part == RenderPart::im ? c.imag() : std::abs(c);
  }
  std::string out = "P5\n" + std::to_string(g.nx) + " " + std::to_string(g.nz) + "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + v.size(), static_cast<char>(128));
  if (v.empty()) return out;

  if (part == RenderPart::abs) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double a = *lo, b = *hi;
    if (!(b > a)) return out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out[header + i] = static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * (v[i] - a) / (b - a))));
    }
  } else {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    if (!(m > 0.0)) return out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const long q = std::clamp(std::lround(128.0 + 127.0 * v[i] / m), 1L, 255L);
      out[header + i] = static_cast<char>(static_cast<unsigned char>(q));
    }
  }
  return out;
}

}  // namespace gihelm
