#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "gihelm/grid.hpp"

namespace gihelm {

/// Point in wavelength-normalized coordinates.
struct NormalizedPoint {
  double z = 0.0;
  double x = 0.0;
};

/// Sinusoidal positional encoding with bands k = 0..K-1 at angular
/// frequency 2^k pi. Features: [x, z, then per band sin(cx), cos(cx),
/// sin(cz), cos(cz)], dimension 2 + 4K.
struct EncodingConfig {
  std::size_t bands = 3;
  std::size_t dim() const noexcept { return 2 + 4 * bands; }
  double max_frequency() const;
};

std::vector<double> encode(const NormalizedPoint& p, const EncodingConfig& cfg);

struct NetworkShape {
  EncodingConfig encoding;
  std::size_t hidden_layers = 5;
  std::size_t width = 128;
  /// Fixed, non-trainable factor applied to both outputs.
  double output_scale = 1.0;

  friend bool operator==(const NetworkShape& a, const NetworkShape& b) {
    return a.encoding.bands == b.encoding.bands && a.hidden_layers == b.hidden_layers && a.width == b.width &&
           a.output_scale == b.output_scale;
  }
};

struct InitConfig {
  /// First-layer weights ~ U(-first_omega/fan_in, first_omega/fan_in).
  double first_omega = 3.0;
  /// Output-layer weights are the hidden-layer bound divided by this.
  double output_damping = 30.0;
};

/// Sine-activated MLP: `hidden_layers` layers y = sin(W x + b) followed by a
/// linear layer with two outputs, Re(Us) and Im(Us).
///
/// All parameters live in one flat vector. Per layer the weight matrix
/// (out x in, column-major) precedes its bias.
class NeuralField {
 public:
  /// All-zero parameters.
  explicit NeuralField(NetworkShape shape);

  static NeuralField initialized(NetworkShape shape, std::uint64_t seed, const InitConfig& init = {});

  const NetworkShape& shape() const noexcept { return shape_; }
  std::size_t num_layers() const noexcept { return layers_.size(); }
  std::size_t num_params() const noexcept { return params_.size(); }
  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }

  Eigen::Map<const Eigen::MatrixXd> weight(std::size_t layer) const;
  Eigen::Map<Eigen::MatrixXd> weight(std::size_t layer);
  Eigen::Map<const Eigen::VectorXd> bias(std::size_t layer) const;
  Eigen::Map<Eigen::VectorXd> bias(std::size_t layer);

  struct LayerInfo {
    std::size_t in = 0;
    std::size_t out = 0;
    std::size_t offset = 0;  // of the weight block in params()
  };
  const LayerInfo& layer(std::size_t l) const { return layers_.at(l); }

 private:
  NetworkShape shape_;
  std::vector<LayerInfo> layers_;
  std::vector<double, Eigen::aligned_allocator<double>> params_;
};

/// Batched evaluation, one output per point.
std::vector<cplx> forward(const NeuralField& field, std::span<const NormalizedPoint> points);
cplx forward(const NeuralField& field, const NormalizedPoint& point);

/// Encoded inputs plus activations retained for reverse and tangent passes.
/// A cache can be reused across parameter updates for a fixed point set.
struct ForwardCache {
  Eigen::MatrixXd features;
  std::size_t bands = 0;
  std::vector<Eigen::MatrixXd> sin_act;  // hidden outputs
  std::vector<Eigen::MatrixXd> cos_act;
  std::vector<cplx> output;
  std::array<Eigen::MatrixXd, 2> scratch;
  Eigen::VectorXd grad;
};

ForwardCache make_forward_cache(std::span<const NormalizedPoint> points, const EncodingConfig& encoding);
/// Evaluates the network on the cached features, reusing buffers.
void forward_into(const NeuralField& field, ForwardCache& cache);
ForwardCache forward_cached(const NeuralField& field, std::span<const NormalizedPoint> points);

/// Reverse pass. `adjoint[i]` = dL/dRe(u_i) + i dL/dIm(u_i) for a real loss L.
/// Returns dL/dtheta (flat, same layout as params()).
std::vector<double> param_gradient(const NeuralField& field, ForwardCache& cache, std::span<const cplx> adjoint);
void param_gradient(const NeuralField& field, ForwardCache& cache, std::span<const cplx> adjoint,
                    std::span<double> grad);

/// Forward-tangent pass: J * tangent for a parameter-space direction.
std::vector<cplx> jvp(const NeuralField& field, const ForwardCache& cache, std::span<const double> tangent);

/// Value, normalized-coordinate gradient and Laplacian, propagated exactly
/// through the sine layers.
struct LaplacianResult {
  std::vector<cplx> value;
  std::vector<cplx> grad_z;
  std::vector<cplx> grad_x;
  std::vector<cplx> laplacian;
};

struct LaplacianCache {
  // Per hidden layer l: inputs (value, d/dz, d/dx, d2/dz2, d2/dx2) and the
  // pre-activation derivatives needed by the reverse pass.
  struct Layer {
    Eigen::MatrixXd in;
    std::array<Eigen::MatrixXd, 2> in_d;
    std::array<Eigen::MatrixXd, 2> in_dd;
    Eigen::MatrixXd s, c;
    std::array<Eigen::MatrixXd, 2> a_d;
    std::array<Eigen::MatrixXd, 2> a_dd;
  };
  std::vector<Layer> layers;
  Eigen::MatrixXd last;  // final hidden output
  std::array<Eigen::MatrixXd, 2> last_dd;
  LaplacianResult result;
};

LaplacianResult laplacian(const NeuralField& field, std::span<const NormalizedPoint> points);
LaplacianCache laplacian_cached(const NeuralField& field, std::span<const NormalizedPoint> points);

/// Reverse pass through the Laplacian propagation for a loss depending on
/// value and Laplacian; adjoints use the same complex convention as
/// param_gradient.
std::vector<double> laplacian_param_gradient(const NeuralField& field, const LaplacianCache& cache,
                                             std::span<const cplx> value_adjoint,
                                             std::span<const cplx> laplacian_adjoint);

inline constexpr std::size_t kNtkPointCap = 2000;

/// J Re(J^H v): the Gram operator of the real-parameter Jacobian acting on
/// v viewed as a real 2N vector. Throws ResourceLimit above kNtkPointCap points.
std::vector<cplx> ntk_apply(const NeuralField& field, std::span<const NormalizedPoint> points,
                            std::span<const cplx> v);

/// Versioned binary checkpoint: magic "GIHN", u16 version, architecture,
/// u64 parameter count, little-endian f64 parameters.
void save_checkpoint(const NeuralField& field, const std::filesystem::path& path);
NeuralField load_checkpoint(const std::filesystem::path& path);
std::string encode_checkpoint(const NeuralField& field);
NeuralField decode_checkpoint(const std::string& bytes);

}  // namespace gihelm
