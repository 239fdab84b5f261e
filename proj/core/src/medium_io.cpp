#include "gihelm/medium_io.hpp"

#include <algorithm>

#include <json.hpp>

#include "gihelm/binary.hpp"
#include "gihelm/errors.hpp"

namespace gihelm {

using nlohmann::json;

Medium read_velocity_model(const std::filesystem::path& raw_path, const std::filesystem::path& sidecar_path) {
  const std::string meta_text = binary::read_file(sidecar_path);
  json meta;
  try {
    meta = json::parse(meta_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(sidecar_path.string(), std::string("malformed sidecar JSON: ") + e.what());
  }
  Grid2D g;
  double v0 = 0.0;
  double omega = 0.0;
  try {
    g.nz = meta.at("nz").get<std::size_t>();
    g.nx = meta.at("nx").get<std::size_t>();
    g.dz = meta.at("dz").get<double>();
    g.dx = meta.at("dx").get<double>();
    g.z0 = meta.at("z0").get<double>();
    g.x0 = meta.at("x0").get<double>();
    v0 = meta.at("v0").get<double>();
    omega = meta.at("omega").get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(sidecar_path.string(), std::string("bad sidecar: ") + e.what());
  }
  g.validate();

  const std::string raw = binary::read_file(raw_path);
  const std::size_t expected = 4 * g.size();
  if (raw.size() != expected) {
    throw FormatError(raw_path.string() + ": expected " + std::to_string(expected) + " bytes of float32 velocity",
                      std::min(raw.size(), expected));
  }
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = binary::get<float>(raw.data() + 4 * i);
  return Medium(g, std::move(v), v0, omega);
}

void write_velocity_model(const Medium& medium, const std::filesystem::path& raw_path,
                          const std::filesystem::path& sidecar_path) {
  const Grid2D& g = medium.grid();
  std::string raw;
  raw.reserve(4 * g.size());
  for (double v : medium.velocity()) binary::put(raw, static_cast<float>(v));
  binary::write_file(raw_path, raw);
  const json meta = {{"nz", g.nz}, {"nx", g.nx}, {"dz", g.dz},         {"dx", g.dx},
                     {"z0", g.z0}, {"x0", g.x0}, {"v0", medium.v0()}, {"omega", medium.omega()}};
  binary::write_file(sidecar_path, meta.dump(2) + "\n");
}

}  // namespace gihelm
