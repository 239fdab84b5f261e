#include "gihelm/config.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numbers>
#include <set>

#include "gihelm/binary.hpp"
#include "gihelm/errors.hpp"
#include "gihelm/medium_io.hpp"

namespace gihelm {

using nlohmann::json;

namespace {

// Object reader that remembers which keys were consumed so leftovers can
// be reported as unknown.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "/" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  T get(const std::string& key) {
    if (!j_.contains(key)) throw ConfigError(field(key), "missing required key");
    return as<T>(key);
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) {
    return j_.contains(key) ? as<T>(key) : fallback;
  }

  Reader sub(const std::string& key) {
    if (!j_.contains(key)) throw ConfigError(field(key), "missing required key");
    seen_.insert(key);
    return Reader(j_.at(key), field(key));
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError(field(k), "unknown key");
    }
  }

  std::string field(const std::string& key) const { return path_ + "/" + key; }

 private:
  template <typename T>
  T as(const std::string& key) {
    seen_.insert(key);
    const json& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError(field(key), "expected a number");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<long long>() < 0)) {
          throw ConfigError(field(key), "expected a non-negative integer");
        }
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(field(key), "expected a string");
      }
      return v.get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(field(key), e.what());
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Grid2D read_grid(Reader r) {
  Grid2D g;
  g.nz = r.get<std::size_t>("nz");
  g.nx = r.get<std::size_t>("nx");
  g.dz = r.get<double>("dz");
  g.dx = r.get<double>("dx");
  g.z0 = r.get_or<double>("z0", 0.0);
  g.x0 = r.get_or<double>("x0", 0.0);
  r.finish();
  try {
    g.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("/medium/grid", e.what());
  }
  return g;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

MediumSpec read_medium(Reader r, const std::filesystem::path& base) {
  MediumSpec m;
  m.kind = r.get<std::string>("kind");
  if (m.kind == "file") {
    m.velocity_file = resolve(base, r.get<std::string>("velocity_file"));
    m.sidecar_file = resolve(base, r.get<std::string>("sidecar_file"));
    r.finish();
    return m;
  }
  m.grid = read_grid(r.sub("grid"));
  m.v0 = r.get<double>("v0");
  m.frequency_hz = r.get<double>("frequency_hz");
  if (!(m.v0 > 0.0)) throw ConfigError(r.field("v0"), "must be positive");
  if (!(m.frequency_hz > 0.0)) throw ConfigError(r.field("frequency_hz"), "must be positive");
  if (m.kind == "gaussian_lens") {
    Reader c = r.sub("center");
    m.center = {c.get<double>("z"), c.get<double>("x")};
    c.finish();
    m.sigma = r.get<double>("sigma");
    m.contrast = r.get<double>("contrast");
  } else if (m.kind == "layered") {
    m.interfaces = r.get<std::vector<double>>("interfaces");
    m.velocities = r.get<std::vector<double>>("velocities");
  } else if (m.kind != "homogeneous") {
    throw ConfigError(r.field("kind"), "unknown medium kind '" + m.kind + "'");
  }
  r.finish();
  return m;
}

SolverSpec read_solver(Reader r) {
  SolverSpec s;
  const std::string method = r.get_or<std::string>("method", "direct");
  if (method == "direct") {
    s.method = SolveMethod::direct;
  } else if (method == "born") {
    s.method = SolveMethod::born;
  } else if (method == "landweber") {
    s.method = SolveMethod::landweber;
  } else {
    throw ConfigError(r.field("method"), "unknown solver '" + method + "'");
  }
  s.stop.max_iters = r.get_or<std::size_t>("max_iters", s.stop.max_iters);
  s.stop.tol = r.get_or<double>("tol", s.stop.tol);
  s.eta = r.get_or<double>("eta", s.eta);
  s.power_iters = r.get_or<std::size_t>("power_iters", s.power_iters);
  s.dense_cap = r.get_or<std::size_t>("dense_cap", s.dense_cap);
  r.finish();
  return s;
}

TrainConfig read_train(Reader r) {
  TrainConfig t;
  try {
    t.mode = parse_train_mode(r.get_or<std::string>("mode", "gi"));
  } catch (const InvalidArgument& e) {
    throw ConfigError(r.field("mode"), e.what());
  }
  t.epochs = r.get_or<std::size_t>("epochs", t.epochs);
  if (t.epochs == 0) throw ConfigError(r.field("epochs"), "must be positive");
  t.lambda_max = r.get_or<double>("lambda_max", t.lambda_max);
  if (!(t.lambda_max >= 0.0)) throw ConfigError(r.field("lambda_max"), "must be non-negative");
  t.lambda_midpoint = r.get_or<double>("lambda_midpoint", t.lambda_midpoint);
  t.lambda_steepness = r.get_or<double>("lambda_steepness", t.lambda_steepness);
  t.n_x = r.get_or<std::size_t>("n_x", t.n_x);
  t.seed = r.get_or<std::uint64_t>("seed", t.seed);
  t.eval_every = r.get_or<std::size_t>("eval_every", 500);
  if (t.eval_every == 0) throw ConfigError(r.field("eval_every"), "must be positive");
  t.pde_scale = r.get_or<double>("pde_scale", t.pde_scale);
  t.output_scale = r.get_or<double>("output_scale", t.output_scale);
  t.adam.lr_initial = r.get_or<double>("lr_initial", t.adam.lr_initial);
  t.adam.lr_final = r.get_or<double>("lr_final", t.adam.lr_final);
  if (r.has("network")) {
    Reader n = r.sub("network");
    t.network.encoding.bands = n.get_or<std::size_t>("bands", t.network.encoding.bands);
    t.network.hidden_layers = n.get_or<std::size_t>("hidden_layers", t.network.hidden_layers);
    t.network.width = n.get_or<std::size_t>("width", t.network.width);
    t.init.first_omega = n.get_or<double>("first_omega", t.init.first_omega);
    t.init.output_damping = n.get_or<double>("output_damping", t.init.output_damping);
    n.finish();
    if (t.network.encoding.bands < 1) throw ConfigError(n.field("bands"), "must be >= 1");
    if (t.network.width < 1 || t.network.hidden_layers < 1) throw ConfigError(n.field("width"), "must be >= 1");
  }
  if (r.has("pool")) {
    Reader p = r.sub("pool");
    t.pool.n_pool = p.get_or<std::size_t>("n_pool", t.pool.n_pool);
    t.pool.n_raw = p.get_or<std::size_t>("n_raw", t.pool.n_raw);
    t.pool.alpha = p.get_or<double>("alpha", t.pool.alpha);
    t.pool.eps_fraction = p.get_or<double>("eps_fraction", t.pool.eps_fraction);
    t.pool.source_exclusion_cells = p.get_or<double>("source_exclusion_cells", t.pool.source_exclusion_cells);
    p.finish();
    if (t.pool.n_raw < t.pool.n_pool) throw ConfigError(p.field("n_raw"), "must be >= n_pool");
    if (!(t.pool.alpha >= 0.0)) throw ConfigError(p.field("alpha"), "must be non-negative");
  }
  if (t.mode != TrainMode::gi && t.n_x > t.pool.n_pool) throw ConfigError(r.field("n_x"), "must not exceed n_pool");
  r.finish();
  return t;
}

std::size_t line_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) line += text[i] == '\n';
  return line;
}

}  // namespace

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", "JSON syntax error at line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
  Reader root(j, "");
  RunConfig cfg;
  cfg.medium = read_medium(root.sub("medium"), base_dir);
  if (root.has("taper")) {
    Reader t = root.sub("taper");
    cfg.taper.enabled = true;
    if (t.has("pad_cells")) cfg.taper.pad_cells = t.get<std::size_t>("pad_cells");
    if (t.has("width_cells")) cfg.taper.width_cells = t.get<std::size_t>("width_cells");
    t.finish();
    if (cfg.taper.pad_cells && cfg.taper.width_cells && *cfg.taper.width_cells > *cfg.taper.pad_cells) {
      throw ConfigError(t.field("width_cells"), "must not exceed pad_cells");
    }
  }
  {
    Reader s = root.sub("source");
    cfg.source.position = {s.get<double>("z"), s.get<double>("x")};
    cfg.source.amplitude = {s.get_or<double>("amplitude_re", 1.0), s.get_or<double>("amplitude_im", 0.0)};
    s.finish();
  }
  try {
    cfg.self_term = parse_self_term_mode(root.get_or<std::string>("self_term", "cell_averaged"));
  } catch (const InvalidArgument& e) {
    throw ConfigError("/self_term", e.what());
  }
  if (root.has("solver")) {
    cfg.solver = read_solver(root.sub("solver"));
    cfg.has_solver = true;
  }
  if (root.has("train")) {
    cfg.train = read_train(root.sub("train"));
    cfg.has_train = true;
  }
  root.finish();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const std::string text = binary::read_file(path);
  return parse_run_config(text, path.parent_path());
}

Medium build_medium(const RunConfig& cfg) {
  const MediumSpec& m = cfg.medium;
  auto base = [&]() -> Medium {
    if (m.kind == "file") return read_velocity_model(m.velocity_file, m.sidecar_file);
    const double omega = 2.0 * std::numbers::pi * m.frequency_hz;
    if (m.kind == "homogeneous") return homogeneous_medium(m.grid, m.v0, omega);
    if (m.kind == "gaussian_lens") return gaussian_lens(m.grid, m.v0, omega, m.center, m.sigma, m.contrast);
    return layered_medium(m.grid, m.v0, omega, m.interfaces, m.velocities);
  }();
  if (!cfg.taper.enabled) return base;
  const Grid2D& g = base.grid();
  const double wavelength = 2.0 * std::numbers::pi * base.v0() / base.omega();
  const std::size_t pad =
      cfg.taper.pad_cells.value_or(static_cast<std::size_t>(std::ceil(wavelength / std::min(g.dz, g.dx))));
  return taper_perturbation(base, pad, cfg.taper.width_cells.value_or(pad));
}

}  // namespace gihelm
