#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "voxscore/common.hpp"

namespace voxscore {

using Shape = std::vector<std::size_t>;

struct Tensor {
  Shape shape;
  std::vector<double> values;

  Tensor() = default;
  explicit Tensor(Shape s, double fill = 0.0);

  std::size_t size() const { return values.size(); }
  bool operator==(const Tensor&) const = default;
};

std::size_t shape_product(const Shape& s);
std::string shape_string(const Shape& s);

enum class PoolMode : std::uint8_t { Max, Average };

// Layer descriptions. Kernel, stride and padding of convolutions are fixed
// at 3, 1 and 1; pooling stride always equals its kernel.
struct Convolution3D {
  int filters = 0;
  static constexpr int kernel = 3;
  static constexpr int stride = 1;
  static constexpr int pad = 1;
};
struct Pooling {
  PoolMode mode = PoolMode::Max;
  int kernel = 2;
};
struct ReLU {};
struct Dropout {
  double ratio = 0.5;
};
struct FullyConnected {
  int outputs = 0;
};
struct Softmax {};

using LayerSpec =
    std::variant<Convolution3D, Pooling, ReLU, Dropout, FullyConnected, Softmax>;

std::string describe_layer(const LayerSpec& layer);

struct NetworkSpec {
  int input_channels = 0;
  int input_side = 0;
  std::vector<LayerSpec> layers;

  Shape input_shape() const;
  /// Output shape of every layer; throws if the stack is inconsistent.
  std::vector<Shape> output_shapes() const;
  void validate() const;
  /// Canonical one-line description, e.g. "in=34x48^3;conv32;relu;...".
  std::string describe() const;
  std::uint64_t fingerprint() const;
};

/// Free architecture parameters. The defaults give the final three-block
/// model: conv32-relu-pool, conv64-relu-pool, conv128-relu-pool, dropout,
/// fc2, softmax.
struct ModelOptions {
  std::vector<int> conv_widths{32, 64, 128};
  PoolMode pool_mode = PoolMode::Max;
  int pool_kernel = 2;
  int hidden_units = 0;  // optional hidden fully connected layer
  double dropout_ratio = 0.5;
};

NetworkSpec build_model(int channels, int grid_side, const ModelOptions& options);
NetworkSpec build_final_model(int channels, int grid_side);

/// Kernels and biases per layer; both empty for parameterless layers.
/// Convolution kernels are [filters, in_channels, 3, 3, 3], fully connected
/// weights [outputs, inputs].
struct LayerParams {
  Tensor weights;
  Tensor bias;

  bool operator==(const LayerParams&) const = default;
};

struct WeightSet {
  std::vector<LayerParams> layers;

  std::size_t parameter_count() const;
  bool operator==(const WeightSet&) const = default;
};

/// Zero weights and biases with shapes matching the spec.
WeightSet zero_weights(const NetworkSpec& spec);
/// Uniform in ±sqrt(3 / fan_in), biases zero.
WeightSet init_weights(const NetworkSpec& spec, Rng& rng);
void check_weights(const NetworkSpec& spec, const WeightSet& weights);

enum class Mode : std::uint8_t { Train, Test };

/// Intermediate state of one forward evaluation, kept for backward.
struct ForwardPass {
  std::uint64_t spec_fingerprint = 0;
  Mode mode = Mode::Test;
  std::vector<Tensor> activations;  // [0] is the input, [i+1] output of layer i
  std::vector<std::vector<std::uint8_t>> dropout_keep;   // per layer
  std::vector<std::vector<std::uint32_t>> pool_argmax;   // per layer (max)

  std::array<double, 2> probabilities() const;
};

/// Train mode draws dropout masks from `rng` (required); test mode ignores it.
ForwardPass forward_pass(const NetworkSpec& spec, const WeightSet& weights,
                         const Tensor& input, Mode mode, Rng* rng = nullptr);
std::array<double, 2> forward(const NetworkSpec& spec, const WeightSet& weights,
                              const Tensor& input, Mode mode, Rng* rng = nullptr);

inline constexpr double kProbabilityFloor = 1e-15;

struct LossValue {
  double value = 0.0;
  bool clamped = false;
};

/// Multinomial logistic loss −log p[label], floored at 1e-15.
LossValue loss(std::span<const double> probabilities, int label);

struct Gradients {
  WeightSet weights;
  Tensor input;
};

Gradients backward(const NetworkSpec& spec, const WeightSet& weights,
                   const ForwardPass& pass, int label);

/// Reruns forward with the given mode and rng, then backward.
Gradients backward(const NetworkSpec& spec, const WeightSet& weights,
                   const Tensor& input, int label, Mode mode, Rng* rng = nullptr);

/// Binary checkpoint: "VXCK", u32 version, u64 spec fingerprint, u32 layer
/// count, per-layer weight/bias shapes, then binary32 values, little-endian.
std::vector<std::byte> save_checkpoint(const NetworkSpec& spec, const WeightSet& weights);
WeightSet load_checkpoint(const NetworkSpec& spec, std::span<const std::byte> bytes);

}  // namespace voxscore
