#include "gihelm/neural_field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "gihelm/binary.hpp"
#include "gihelm/errors.hpp"
#include "vector_math.hpp"

namespace gihelm {

using Eigen::MatrixXd;

double EncodingConfig::max_frequency() const {
  return std::ldexp(std::numbers::pi, static_cast<int>(bands) - 1);
}

namespace {

double band_frequency(std::size_t k) { return std::ldexp(std::numbers::pi, static_cast<int>(k)); }

// Column i receives the features of points[i]; optional derivative blocks
// are indexed by direction (0 = z, 1 = x).
void encode_batch(std::span<const NormalizedPoint> points, const EncodingConfig& cfg, MatrixXd& f,
                  std::array<MatrixXd, 2>* fd, std::array<MatrixXd, 2>* fdd) {
  const auto n = static_cast<Eigen::Index>(points.size());
  const auto dim = static_cast<Eigen::Index>(cfg.dim());
  f.resize(dim, n);
  if (fd) {
    for (auto& m : *fd) m.setZero(dim, n);
    for (auto& m : *fdd) m.setZero(dim, n);
  }
  Eigen::VectorXd z(n), x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    z(i) = points[static_cast<std::size_t>(i)].z;
    x(i) = points[static_cast<std::size_t>(i)].x;
  }
  f.row(0) = x.transpose();
  f.row(1) = z.transpose();
  if (fd) {
    (*fd)[1].row(0).setOnes();
    (*fd)[0].row(1).setOnes();
  }
  Eigen::VectorXd arg(2 * n), sv(2 * n), cv(2 * n);
  for (std::size_t k = 0; k < cfg.bands; ++k) {
    const double c = band_frequency(k);
    const auto r = static_cast<Eigen::Index>(2 + 4 * k);
    arg.head(n) = c * x;
    arg.tail(n) = c * z;
    detail::sin_cos(arg.data(), sv.data(), cv.data(), static_cast<std::size_t>(2 * n));
    f.row(r) = sv.head(n).transpose();
    f.row(r + 1) = cv.head(n).transpose();
    f.row(r + 2) = sv.tail(n).transpose();
    f.row(r + 3) = cv.tail(n).transpose();
    if (fd) {
      (*fd)[1].row(r) = c * cv.head(n).transpose();
      (*fd)[1].row(r + 1) = -c * sv.head(n).transpose();
      (*fd)[0].row(r + 2) = c * cv.tail(n).transpose();
      (*fd)[0].row(r + 3) = -c * sv.tail(n).transpose();
      (*fdd)[1].row(r) = -c * c * sv.head(n).transpose();
      (*fdd)[1].row(r + 1) = -c * c * cv.head(n).transpose();
      (*fdd)[0].row(r + 2) = -c * c * sv.tail(n).transpose();
      (*fdd)[0].row(r + 3) = -c * c * cv.tail(n).transpose();
    }
  }
}

void sin_cos(const MatrixXd& a, MatrixXd& s, MatrixXd& c) {
  s.resize(a.rows(), a.cols());
  c.resize(a.rows(), a.cols());
  detail::sin_cos(a.data(), s.data(), c.data(), static_cast<std::size_t>(a.size()));
}

std::vector<cplx> to_complex(const MatrixXd& y, double scale) {
  std::vector<cplx> out(static_cast<std::size_t>(y.cols()));
  for (Eigen::Index i = 0; i < y.cols(); ++i) out[static_cast<std::size_t>(i)] = {scale * y(0, i), scale * y(1, i)};
  return out;
}

MatrixXd adjoint_matrix(std::span<const cplx> adj) {
  MatrixXd m(2, static_cast<Eigen::Index>(adj.size()));
  for (std::size_t i = 0; i < adj.size(); ++i) {
    m(0, static_cast<Eigen::Index>(i)) = adj[i].real();
    m(1, static_cast<Eigen::Index>(i)) = adj[i].imag();
  }
  return m;
}

}  // namespace

std::vector<double> encode(const NormalizedPoint& p, const EncodingConfig& cfg) {
  MatrixXd f;
  encode_batch(std::span(&p, 1), cfg, f, nullptr, nullptr);
  return std::vector<double>(f.data(), f.data() + f.size());
}

// ---------------------------------------------------------------------------

NeuralField::NeuralField(NetworkShape shape) : shape_(shape) {
  if (shape_.encoding.bands < 1) throw InvalidArgument("encoding needs at least one band");
  if (shape_.hidden_layers < 1 || shape_.width < 1) throw InvalidArgument("network needs hidden layers");
  std::size_t in = shape_.encoding.dim();
  std::size_t offset = 0;
  for (std::size_t l = 0; l <= shape_.hidden_layers; ++l) {
    const std::size_t out = l == shape_.hidden_layers ? 2 : shape_.width;
    layers_.push_back({in, out, offset});
    offset += out * in + out;
    in = out;
  }
  params_.assign(offset, 0.0);
}

NeuralField NeuralField::initialized(NetworkShape shape, std::uint64_t seed, const InitConfig& init) {
  NeuralField f(shape);
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < f.num_layers(); ++l) {
    const auto& info = f.layers_[l];
    const double fan_in = static_cast<double>(info.in);
    double bound;
    if (l == 0) {
      bound = init.first_omega / fan_in;
    } else if (l + 1 == f.num_layers()) {
      bound = std::sqrt(6.0 / fan_in) / init.output_damping;
    } else {
      bound = std::sqrt(6.0 / fan_in);
    }
    std::uniform_real_distribution<double> w(-bound, bound);
    auto W = f.weight(l);
    for (Eigen::Index j = 0; j < W.cols(); ++j)
      for (Eigen::Index i = 0; i < W.rows(); ++i) W(i, j) = w(rng);
    const double bb = 1.0 / std::sqrt(fan_in);
    std::uniform_real_distribution<double> bd(-bb, bb);
    auto b = f.bias(l);
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = l + 1 == f.num_layers() ? 0.0 : bd(rng);
  }
  return f;
}

Eigen::Map<const MatrixXd> NeuralField::weight(std::size_t l) const {
  const auto& i = layers_.at(l);
  return {params_.data() + i.offset, static_cast<Eigen::Index>(i.out), static_cast<Eigen::Index>(i.in)};
}
Eigen::Map<MatrixXd> NeuralField::weight(std::size_t l) {
  const auto& i = layers_.at(l);
  return {params_.data() + i.offset, static_cast<Eigen::Index>(i.out), static_cast<Eigen::Index>(i.in)};
}
Eigen::Map<const Eigen::VectorXd> NeuralField::bias(std::size_t l) const {
  const auto& i = layers_.at(l);
  return {params_.data() + i.offset + i.out * i.in, static_cast<Eigen::Index>(i.out)};
}
Eigen::Map<Eigen::VectorXd> NeuralField::bias(std::size_t l) {
  const auto& i = layers_.at(l);
  return {params_.data() + i.offset + i.out * i.in, static_cast<Eigen::Index>(i.out)};
}

// ---------------------------------------------------------------------------

ForwardCache make_forward_cache(std::span<const NormalizedPoint> points, const EncodingConfig& encoding) {
  ForwardCache cache;
  encode_batch(points, encoding, cache.features, nullptr, nullptr);
  cache.bands = encoding.bands;
  return cache;
}

void forward_into(const NeuralField& field, ForwardCache& cache) {
  if (cache.bands != field.shape().encoding.bands) throw InvalidArgument("forward_into: encoding mismatch");
  const std::size_t hidden = field.num_layers() - 1;
  cache.sin_act.resize(hidden);
  cache.cos_act.resize(hidden);
  MatrixXd& a = cache.scratch[0];
  for (std::size_t l = 0; l < hidden; ++l) {
    const MatrixXd& in = l == 0 ? cache.features : cache.sin_act[l - 1];
    a.noalias() = field.weight(l) * in;
    a.colwise() += field.bias(l);
    sin_cos(a, cache.sin_act[l], cache.cos_act[l]);
  }
  MatrixXd& y = cache.scratch[1];
  y.noalias() = field.weight(hidden) * cache.sin_act.back();
  y.colwise() += field.bias(hidden);
  cache.output = to_complex(y, field.shape().output_scale);
}

ForwardCache forward_cached(const NeuralField& field, std::span<const NormalizedPoint> points) {
  ForwardCache cache = make_forward_cache(points, field.shape().encoding);
  forward_into(field, cache);
  return cache;
}

std::vector<cplx> forward(const NeuralField& field, std::span<const NormalizedPoint> points) {
  return forward_cached(field, points).output;
}

cplx forward(const NeuralField& field, const NormalizedPoint& point) {
  return forward(field, std::span(&point, 1)).front();
}

std::vector<double> param_gradient(const NeuralField& field, ForwardCache& cache, std::span<const cplx> adjoint) {
  std::vector<double> grad(field.num_params());
  param_gradient(field, cache, adjoint, grad);
  return grad;
}

void param_gradient(const NeuralField& field, ForwardCache& cache, std::span<const cplx> adjoint,
                    std::span<double> grad) {
  if (adjoint.size() != cache.output.size()) throw InvalidArgument("param_gradient: adjoint size mismatch");
  if (grad.size() != field.num_params()) throw InvalidArgument("param_gradient: gradient size mismatch");
  const std::size_t hidden = field.num_layers() - 1;
  const double s = field.shape().output_scale;
  // Accumulate in an aligned buffer so results do not depend on where the
  // caller's storage happens to sit.
  Eigen::VectorXd& buf = cache.grad;
  buf.resize(static_cast<Eigen::Index>(field.num_params()));

  auto gw = [&](std::size_t l) {
    const auto& i = field.layer(l);
    return Eigen::Map<MatrixXd>(buf.data() + i.offset, static_cast<Eigen::Index>(i.out),
                                static_cast<Eigen::Index>(i.in));
  };
  auto gb = [&](std::size_t l) {
    const auto& i = field.layer(l);
    return Eigen::Map<Eigen::VectorXd>(buf.data() + i.offset + i.out * i.in, static_cast<Eigen::Index>(i.out));
  };

  const MatrixXd ybar = s * adjoint_matrix(adjoint);
  gw(hidden).noalias() = ybar * cache.sin_act.back().transpose();
  gb(hidden) = ybar.rowwise().sum();
  MatrixXd& hbar = cache.scratch[0];
  MatrixXd& abar = cache.scratch[1];
  hbar.noalias() = field.weight(hidden).transpose() * ybar;
  for (std::size_t l = hidden; l-- > 0;) {
    abar = hbar.cwiseProduct(cache.cos_act[l]);
    const MatrixXd& in = l == 0 ? cache.features : cache.sin_act[l - 1];
    gw(l).noalias() = abar * in.transpose();
    gb(l) = abar.rowwise().sum();
    if (l > 0) hbar.noalias() = field.weight(l).transpose() * abar;
  }
  std::copy(buf.data(), buf.data() + buf.size(), grad.begin());
}

std::vector<cplx> jvp(const NeuralField& field, const ForwardCache& cache, std::span<const double> tangent) {
  if (tangent.size() != field.num_params()) throw InvalidArgument("jvp: tangent size mismatch");
  const std::size_t hidden = field.num_layers() - 1;
  auto tw = [&](std::size_t l) {
    const auto& i = field.layer(l);
    return Eigen::Map<const MatrixXd>(tangent.data() + i.offset, static_cast<Eigen::Index>(i.out),
                                      static_cast<Eigen::Index>(i.in));
  };
  auto tb = [&](std::size_t l) {
    const auto& i = field.layer(l);
    return Eigen::Map<const Eigen::VectorXd>(tangent.data() + i.offset + i.out * i.in,
                                             static_cast<Eigen::Index>(i.out));
  };
  MatrixXd hdot;  // tangent of the current layer input; empty = zero (encoding has no parameters)
  for (std::size_t l = 0; l < hidden; ++l) {
    const MatrixXd& in = l == 0 ? cache.features : cache.sin_act[l - 1];
    MatrixXd adot = tw(l) * in;
    if (l > 0) adot.noalias() += field.weight(l) * hdot;
    adot.colwise() += tb(l);
    hdot = adot.cwiseProduct(cache.cos_act[l]);
  }
  MatrixXd ydot = tw(hidden) * cache.sin_act.back();
  ydot.noalias() += field.weight(hidden) * hdot;
  ydot.colwise() += tb(hidden);
  return to_complex(ydot, field.shape().output_scale);
}

// ---------------------------------------------------------------------------

LaplacianCache laplacian_cached(const NeuralField& field, std::span<const NormalizedPoint> points) {
  LaplacianCache cache;
  const std::size_t hidden = field.num_layers() - 1;
  cache.layers.resize(hidden);
  {
    auto& first = cache.layers[0];
    encode_batch(points, field.shape().encoding, first.in, &first.in_d, &first.in_dd);
  }
  MatrixXd a;
  for (std::size_t l = 0; l < hidden; ++l) {
    auto& L = cache.layers[l];
    const auto W = field.weight(l);
    a.noalias() = W * L.in;
    a.colwise() += field.bias(l);
    sin_cos(a, L.s, L.c);
    std::array<MatrixXd, 2> h_d, h_dd;
    for (int d = 0; d < 2; ++d) {
      L.a_d[d].noalias() = W * L.in_d[d];
      L.a_dd[d].noalias() = W * L.in_dd[d];
      h_d[d] = L.c.cwiseProduct(L.a_d[d]);
      h_dd[d] = L.c.cwiseProduct(L.a_dd[d]) - L.s.cwiseProduct(L.a_d[d].cwiseAbs2());
    }
    if (l + 1 < hidden) {
      auto& next = cache.layers[l + 1];
      next.in = L.s;
      next.in_d = std::move(h_d);
      next.in_dd = std::move(h_dd);
    } else {
      cache.last = L.s;
      const auto Wo = field.weight(hidden);
      const double sc = field.shape().output_scale;
      MatrixXd y = Wo * L.s;
      y.colwise() += field.bias(hidden);
      cache.result.value = to_complex(y, sc);
      cache.result.grad_z = to_complex(Wo * h_d[0], sc);
      cache.result.grad_x = to_complex(Wo * h_d[1], sc);
      cache.result.laplacian = to_complex(Wo * (h_dd[0] + h_dd[1]), sc);
      cache.last_dd = std::move(h_dd);
    }
  }
  return cache;
}

LaplacianResult laplacian(const NeuralField& field, std::span<const NormalizedPoint> points) {
  return laplacian_cached(field, points).result;
}

std::vector<double> laplacian_param_gradient(const NeuralField& field, const LaplacianCache& cache,
                                             std::span<const cplx> value_adjoint,
                                             std::span<const cplx> laplacian_adjoint) {
  const std::size_t n = cache.result.value.size();
  if (value_adjoint.size() != n || laplacian_adjoint.size() != n) {
    throw InvalidArgument("laplacian_param_gradient: adjoint size mismatch");
  }
  Eigen::VectorXd buf = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(field.num_params()));
  const std::size_t hidden = field.num_layers() - 1;
  const double s = field.shape().output_scale;
  auto gw = [&](std::size_t l) {
    const auto& i = field.layer(l);
    return Eigen::Map<MatrixXd>(buf.data() + i.offset, static_cast<Eigen::Index>(i.out),
                                static_cast<Eigen::Index>(i.in));
  };
  auto gb = [&](std::size_t l) {
    const auto& i = field.layer(l);
    return Eigen::Map<Eigen::VectorXd>(buf.data() + i.offset + i.out * i.in, static_cast<Eigen::Index>(i.out));
  };

  const MatrixXd ybar = s * adjoint_matrix(value_adjoint);
  const MatrixXd lbar = s * adjoint_matrix(laplacian_adjoint);
  const auto Wo = field.weight(hidden);
  gw(hidden).noalias() = ybar * cache.last.transpose();
  gw(hidden).noalias() += lbar * (cache.last_dd[0] + cache.last_dd[1]).transpose();
  gb(hidden) = ybar.rowwise().sum();

  MatrixXd hbar = Wo.transpose() * ybar;
  std::array<MatrixXd, 2> hbar_d;  // zero at the output: the loss ignores gradients
  bool hbar_d_zero = true;
  std::array<MatrixXd, 2> hbar_dd;
  hbar_dd[0] = Wo.transpose() * lbar;
  hbar_dd[1] = hbar_dd[0];

  for (std::size_t l = hidden; l-- > 0;) {
    const auto& L = cache.layers[l];
    MatrixXd abar = hbar.cwiseProduct(L.c);
    std::array<MatrixXd, 2> abar_d, abar_dd;
    for (int d = 0; d < 2; ++d) {
      abar_dd[d] = hbar_dd[d].cwiseProduct(L.c);
      abar_d[d] = -2.0 * hbar_dd[d].cwiseProduct(L.s).cwiseProduct(L.a_d[d]);
      abar -= hbar_dd[d].cwiseProduct(L.c.cwiseProduct(L.a_d[d].cwiseAbs2()) + L.s.cwiseProduct(L.a_dd[d]));
      if (!hbar_d_zero) {
        abar_d[d] += hbar_d[d].cwiseProduct(L.c);
        abar -= hbar_d[d].cwiseProduct(L.s).cwiseProduct(L.a_d[d]);
      }
    }
    auto GW = gw(l);
    GW.noalias() = abar * L.in.transpose();
    for (int d = 0; d < 2; ++d) {
      GW.noalias() += abar_d[d] * L.in_d[d].transpose();
      GW.noalias() += abar_dd[d] * L.in_dd[d].transpose();
    }
    gb(l) = abar.rowwise().sum();
    if (l > 0) {
      const auto W = field.weight(l);
      hbar.noalias() = W.transpose() * abar;
      for (int d = 0; d < 2; ++d) {
        hbar_d[d].noalias() = W.transpose() * abar_d[d];
        hbar_dd[d].noalias() = W.transpose() * abar_dd[d];
      }
      hbar_d_zero = false;
    }
  }
  return std::vector<double>(buf.data(), buf.data() + buf.size());
}

// ---------------------------------------------------------------------------

std::vector<cplx> ntk_apply(const NeuralField& field, std::span<const NormalizedPoint> points,
                            std::span<const cplx> v) {
  if (points.size() > kNtkPointCap) {
    throw ResourceLimit("ntk_apply: " + std::to_string(points.size()) + " points exceeds cap " +
                        std::to_string(kNtkPointCap));
  }
  if (v.size() != points.size()) throw InvalidArgument("ntk_apply: vector size mismatch");
  ForwardCache cache = forward_cached(field, points);
  const std::vector<double> jt_v = param_gradient(field, cache, v);
  return jvp(field, cache, jt_v);
}

// ---------------------------------------------------------------------------

namespace {
constexpr char kCheckpointMagic[4] = {'G', 'I', 'H', 'N'};
constexpr std::uint16_t kCheckpointVersion = 1;
constexpr std::size_t kCheckpointHeader = 4 + 2 + 4 + 4 + 4 + 8 + 8;
}  // namespace

std::string encode_checkpoint(const NeuralField& field) {
  std::string out(kCheckpointMagic, 4);
  binary::put<std::uint16_t>(out, kCheckpointVersion);
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(field.shape().encoding.bands));
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(field.shape().hidden_layers));
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(field.shape().width));
  binary::put<double>(out, field.shape().output_scale);
  binary::put<std::uint64_t>(out, field.num_params());
  for (double p : field.params()) binary::put<double>(out, p);
  return out;
}

NeuralField decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < kCheckpointHeader) throw FormatError("checkpoint header truncated", bytes.size());
  if (bytes.compare(0, 4, kCheckpointMagic, 4) != 0) throw FormatError("bad checkpoint magic", 0);
  const char* p = bytes.data();
  const auto version = binary::get<std::uint16_t>(p + 4);
  if (version != kCheckpointVersion) throw FormatError("unsupported checkpoint version " + std::to_string(version), 4);
  NetworkShape shape;
  shape.encoding.bands = binary::get<std::uint32_t>(p + 6);
  shape.hidden_layers = binary::get<std::uint32_t>(p + 10);
  shape.width = binary::get<std::uint32_t>(p + 14);
  shape.output_scale = binary::get<double>(p + 18);
  const auto count = binary::get<std::uint64_t>(p + 26);
  NeuralField field(shape);
  if (count != field.num_params()) throw FormatError("parameter count does not match architecture", 26);
  const std::size_t need = kCheckpointHeader + 8 * count;
  if (bytes.size() < need) throw FormatError("checkpoint parameters truncated", bytes.size());
  if (bytes.size() > need) throw FormatError("trailing bytes after checkpoint", need);
  auto params = field.params();
  for (std::size_t i = 0; i < count; ++i) params[i] = binary::get<double>(p + kCheckpointHeader + 8 * i);
  return field;
}

void save_checkpoint(const NeuralField& field, const std::filesystem::path& path) {
  binary::write_file(path, encode_checkpoint(field));
}

NeuralField load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(binary::read_file(path)); }

}  // namespace gihelm
