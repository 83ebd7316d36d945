#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "voxscore/tensornet.hpp"

namespace voxscore {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::size_t cube(std::size_t n) { return n * n * n; }

// Valid output index range [lo, hi) along one axis for kernel offset d.
inline void span_for(long n, long d, long& lo, long& hi) {
  lo = std::max(0L, -d);
  hi = std::min(n, n - d);
}

void conv_forward(const Tensor& in, const LayerParams& p, Tensor& out) {
  const std::size_t cin = in.shape[0];
  const long n = static_cast<long>(in.shape[1]);
  const std::size_t filters = p.weights.shape[0];
  const std::size_t n3 = cube(static_cast<std::size_t>(n));
  out = Tensor({filters, in.shape[1], in.shape[2], in.shape[3]});
  const double* w = p.weights.values.data();
  for (std::size_t f = 0; f < filters; ++f) {
    double* dst_f = out.values.data() + f * n3;
    std::fill(dst_f, dst_f + n3, p.bias.values[f]);
    for (std::size_t c = 0; c < cin; ++c) {
      const double* src_c = in.values.data() + c * n3;
      const double* wk = w + (f * cin + c) * 27;
      for (long x = 0; x < n; ++x) {
        for (long y = 0; y < n; ++y) {
          double* dst = dst_f + (x * n + y) * n;
          for (long kx = 0; kx < 3; ++kx) {
            const long sx = x + kx - 1;
            if (sx < 0 || sx >= n) continue;
            for (long ky = 0; ky < 3; ++ky) {
              const long sy = y + ky - 1;
              if (sy < 0 || sy >= n) continue;
              const double* src = src_c + (sx * n + sy) * n;
              for (long kz = 0; kz < 3; ++kz) {
                const double wv = wk[(kx * 3 + ky) * 3 + kz];
                long lo, hi;
                span_for(n, kz - 1, lo, hi);
                const double* s = src + (kz - 1);
                for (long z = lo; z < hi; ++z) dst[z] += wv * s[z];
              }
            }
          }
        }
      }
    }
  }
}

void conv_backward(const Tensor& in, const LayerParams& p, const Tensor& dout,
                   LayerParams& grad, Tensor& din) {
  const std::size_t cin = in.shape[0];
  const long n = static_cast<long>(in.shape[1]);
  const std::size_t filters = p.weights.shape[0];
  const std::size_t n3 = cube(static_cast<std::size_t>(n));
  din = Tensor(in.shape);
  const double* w = p.weights.values.data();
  for (std::size_t f = 0; f < filters; ++f) {
    const double* g_f = dout.values.data() + f * n3;
    double b = 0.0;
    for (std::size_t i = 0; i < n3; ++i) b += g_f[i];
    grad.bias.values[f] += b;
    for (std::size_t c = 0; c < cin; ++c) {
      const double* src_c = in.values.data() + c * n3;
      double* dsrc_c = din.values.data() + c * n3;
      const double* wk = w + (f * cin + c) * 27;
      double* gk = grad.weights.values.data() + (f * cin + c) * 27;
      for (long x = 0; x < n; ++x) {
        for (long y = 0; y < n; ++y) {
          const double* g = g_f + (x * n + y) * n;
          for (long kx = 0; kx < 3; ++kx) {
            const long sx = x + kx - 1;
            if (sx < 0 || sx >= n) continue;
            for (long ky = 0; ky < 3; ++ky) {
              const long sy = y + ky - 1;
              if (sy < 0 || sy >= n) continue;
              const double* src = src_c + (sx * n + sy) * n;
              double* dsrc = dsrc_c + (sx * n + sy) * n;
              for (long kz = 0; kz < 3; ++kz) {
                const long k = (kx * 3 + ky) * 3 + kz;
                const double wv = wk[k];
                long lo, hi;
                span_for(n, kz - 1, lo, hi);
                const double* s = src + (kz - 1);
                double* ds = dsrc + (kz - 1);
                double acc = 0.0;
                for (long z = lo; z < hi; ++z) {
                  acc += g[z] * s[z];
                  ds[z] += wv * g[z];
                }
                gk[k] += acc;
              }
            }
          }
        }
      }
    }
  }
}

void pool_forward(const Tensor& in, const Pooling& pool, Tensor& out,
                  std::vector<std::uint32_t>& argmax) {
  const std::size_t c_count = in.shape[0];
  const std::size_t n = in.shape[1];
  const std::size_t k = static_cast<std::size_t>(pool.kernel);
  const std::size_t m = n / k;
  out = Tensor({c_count, m, m, m});
  if (pool.mode == PoolMode::Max) argmax.assign(out.size(), 0);
  const double count = static_cast<double>(k * k * k);
  std::size_t o = 0;
  for (std::size_t c = 0; c < c_count; ++c) {
    const std::size_t base = c * cube(n);
    for (std::size_t ox = 0; ox < m; ++ox) {
      for (std::size_t oy = 0; oy < m; ++oy) {
        for (std::size_t oz = 0; oz < m; ++oz, ++o) {
          double best = 0.0, sum = 0.0;
          std::uint32_t best_i = 0;
          bool first = true;
          for (std::size_t dx = 0; dx < k; ++dx) {
            for (std::size_t dy = 0; dy < k; ++dy) {
              for (std::size_t dz = 0; dz < k; ++dz) {
                const std::size_t idx =
                    base + ((ox * k + dx) * n + (oy * k + dy)) * n + (oz * k + dz);
                const double v = in.values[idx];
                sum += v;
                if (first || v > best) {
                  best = v;
                  best_i = static_cast<std::uint32_t>(idx);
                  first = false;
                }
              }
            }
          }
          if (pool.mode == PoolMode::Max) {
            out.values[o] = best;
            argmax[o] = best_i;
          } else {
            out.values[o] = sum / count;
          }
        }
      }
    }
  }
}

void pool_backward(const Tensor& in, const Pooling& pool, const Tensor& dout,
                   const std::vector<std::uint32_t>& argmax, Tensor& din) {
  din = Tensor(in.shape);
  if (pool.mode == PoolMode::Max) {
    for (std::size_t o = 0; o < dout.size(); ++o) din.values[argmax[o]] += dout.values[o];
    return;
  }
  const std::size_t n = in.shape[1];
  const std::size_t k = static_cast<std::size_t>(pool.kernel);
  const std::size_t m = n / k;
  const double scale = 1.0 / static_cast<double>(k * k * k);
  std::size_t o = 0;
  for (std::size_t c = 0; c < in.shape[0]; ++c) {
    const std::size_t base = c * cube(n);
    for (std::size_t ox = 0; ox < m; ++ox) {
      for (std::size_t oy = 0; oy < m; ++oy) {
        for (std::size_t oz = 0; oz < m; ++oz, ++o) {
          const double g = dout.values[o] * scale;
          for (std::size_t dx = 0; dx < k; ++dx) {
            for (std::size_t dy = 0; dy < k; ++dy) {
              for (std::size_t dz = 0; dz < k; ++dz) {
                din.values[base + ((ox * k + dx) * n + (oy * k + dy)) * n +
                           (oz * k + dz)] += g;
              }
            }
          }
        }
      }
    }
  }
}

void fc_forward(const Tensor& in, const LayerParams& p, Tensor& out) {
  const std::size_t outputs = p.weights.shape[0];
  const std::size_t inputs = p.weights.shape[1];
  out = Tensor({outputs});
  for (std::size_t o = 0; o < outputs; ++o) {
    const double* w = p.weights.values.data() + o * inputs;
    double acc = 0.0;
    for (std::size_t i = 0; i < inputs; ++i) acc += w[i] * in.values[i];
    out.values[o] = acc + p.bias.values[o];
  }
}

void fc_backward(const Tensor& in, const LayerParams& p, const Tensor& dout,
                 LayerParams& grad, Tensor& din) {
  const std::size_t outputs = p.weights.shape[0];
  const std::size_t inputs = p.weights.shape[1];
  din = Tensor(in.shape);
  for (std::size_t o = 0; o < outputs; ++o) {
    const double g = dout.values[o];
    grad.bias.values[o] += g;
    const double* w = p.weights.values.data() + o * inputs;
    double* gw = grad.weights.values.data() + o * inputs;
    for (std::size_t i = 0; i < inputs; ++i) {
      gw[i] += g * in.values[i];
      din.values[i] += g * w[i];
    }
  }
}

void softmax_forward(const Tensor& in, Tensor& out) {
  out = Tensor(in.shape);
  const double mx = *std::max_element(in.values.begin(), in.values.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    out.values[i] = std::exp(in.values[i] - mx);
    sum += out.values[i];
  }
  for (double& v : out.values) v /= sum;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

Tensor::Tensor(Shape s, double fill) : shape(std::move(s)) {
  values.assign(shape_product(shape), fill);
}

std::size_t shape_product(const Shape& s) {
  std::size_t p = 1;
  for (auto d : s) p *= d;
  return p;
}

std::string shape_string(const Shape& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    out += (i ? "x" : "") + std::to_string(s[i]);
  }
  return out;
}

std::string describe_layer(const LayerSpec& layer) {
  return std::visit(
      overloaded{
          [](const Convolution3D& c) { return "conv" + std::to_string(c.filters); },
          [](const Pooling& p) {
            return std::string(p.mode == PoolMode::Max ? "maxpool" : "avgpool") +
                   std::to_string(p.kernel);
          },
          [](const ReLU&) { return std::string("relu"); },
          [](const Dropout& d) {
            std::ostringstream s;
            s << "dropout" << d.ratio;
            return s.str();
          },
          [](const FullyConnected& f) { return "fc" + std::to_string(f.outputs); },
          [](const Softmax&) { return std::string("softmax"); },
      },
      layer);
}

Shape NetworkSpec::input_shape() const {
  const auto n = static_cast<std::size_t>(input_side);
  return {static_cast<std::size_t>(input_channels), n, n, n};
}

std::vector<Shape> NetworkSpec::output_shapes() const {
  if (input_channels <= 0 || input_side <= 0) {
    throw InvalidArgument("network input channels and side must be positive");
  }
  std::vector<Shape> shapes;
  Shape cur = input_shape();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string where = "layer " + std::to_string(i) + " (" +
                              describe_layer(layers[i]) + "): ";
    std::visit(
        overloaded{
            [&](const Convolution3D& c) {
              if (cur.size() != 4) throw InvalidArgument(where + "needs a volume input");
              if (c.filters <= 0) throw InvalidArgument(where + "filters must be > 0");
              cur[0] = static_cast<std::size_t>(c.filters);
            },
            [&](const Pooling& p) {
              if (cur.size() != 4) throw InvalidArgument(where + "needs a volume input");
              if (p.kernel != 2 && p.kernel != 4) {
                throw InvalidArgument(where + "pooling kernel must be 2 or 4");
              }
              const auto k = static_cast<std::size_t>(p.kernel);
              if (cur[1] % k != 0) {
                throw InvalidArgument(where + "side " + std::to_string(cur[1]) +
                                      " not divisible by pooling kernel");
              }
              for (std::size_t d = 1; d < 4; ++d) cur[d] /= k;
            },
            [&](const ReLU&) {},
            [&](const Dropout& d) {
              if (!(d.ratio >= 0.0 && d.ratio < 1.0)) {
                throw InvalidArgument(where + "dropout ratio must be in [0, 1)");
              }
            },
            [&](const FullyConnected& f) {
              if (f.outputs <= 0) throw InvalidArgument(where + "outputs must be > 0");
              cur = {static_cast<std::size_t>(f.outputs)};
            },
            [&](const Softmax&) {
              if (cur.size() != 1) throw InvalidArgument(where + "needs a vector input");
            },
        },
        layers[i]);
    shapes.push_back(cur);
  }
  return shapes;
}

void NetworkSpec::validate() const {
  const auto shapes = output_shapes();
  const std::size_t n = layers.size();
  if (n < 2 || !std::holds_alternative<Softmax>(layers[n - 1]) ||
      !std::holds_alternative<FullyConnected>(layers[n - 2]) ||
      std::get<FullyConnected>(layers[n - 2]).outputs != 2) {
    throw InvalidArgument("network must end with fc2 followed by softmax");
  }
}

std::string NetworkSpec::describe() const {
  std::string s = "in=" + std::to_string(input_channels) + "x" +
                  std::to_string(input_side) + "^3";
  for (const auto& l : layers) s += ";" + describe_layer(l);
  return s;
}

std::uint64_t NetworkSpec::fingerprint() const { return fnv1a(describe()); }

NetworkSpec build_model(int channels, int grid_side, const ModelOptions& options) {
  if (channels <= 0) throw InvalidArgument("channel count must be positive");
  if (options.conv_widths.empty()) throw InvalidArgument("model needs at least one convolution");
  long divisor = 1;
  for (std::size_t i = 0; i < options.conv_widths.size(); ++i) divisor *= options.pool_kernel;
  if (grid_side <= 0 || grid_side % divisor != 0) {
    throw InvalidArgument("grid side " + std::to_string(grid_side) +
                          " is not divisible by " + std::to_string(divisor));
  }
  NetworkSpec spec;
  spec.input_channels = channels;
  spec.input_side = grid_side;
  for (int width : options.conv_widths) {
    spec.layers.emplace_back(Convolution3D{width});
    spec.layers.emplace_back(ReLU{});
    spec.layers.emplace_back(Pooling{options.pool_mode, options.pool_kernel});
  }
  if (options.hidden_units > 0) {
    spec.layers.emplace_back(FullyConnected{options.hidden_units});
    spec.layers.emplace_back(ReLU{});
  }
  if (options.dropout_ratio > 0.0) spec.layers.emplace_back(Dropout{options.dropout_ratio});
  spec.layers.emplace_back(FullyConnected{2});
  spec.layers.emplace_back(Softmax{});
  spec.validate();
  return spec;
}

NetworkSpec build_final_model(int channels, int grid_side) {
  return build_model(channels, grid_side, ModelOptions{});
}

std::size_t WeightSet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

WeightSet zero_weights(const NetworkSpec& spec) {
  const auto shapes = spec.output_shapes();
  WeightSet ws;
  ws.layers.resize(spec.layers.size());
  Shape in = spec.input_shape();
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    if (const auto* c = std::get_if<Convolution3D>(&spec.layers[i])) {
      const auto f = static_cast<std::size_t>(c->filters);
      ws.layers[i].weights = Tensor({f, in[0], 3, 3, 3});
      ws.layers[i].bias = Tensor({f});
    } else if (const auto* fc = std::get_if<FullyConnected>(&spec.layers[i])) {
      const auto o = static_cast<std::size_t>(fc->outputs);
      ws.layers[i].weights = Tensor({o, shape_product(in)});
      ws.layers[i].bias = Tensor({o});
    }
    in = shapes[i];
  }
  return ws;
}

WeightSet init_weights(const NetworkSpec& spec, Rng& rng) {
  WeightSet ws = zero_weights(spec);
  for (auto& l : ws.layers) {
    if (l.weights.shape.empty()) continue;
    const double fan_in =
        static_cast<double>(l.weights.size() / l.weights.shape[0]);
    const double limit = std::sqrt(3.0 / fan_in);
    for (double& v : l.weights.values) v = rng.uniform(-limit, limit);
  }
  return ws;
}

void check_weights(const NetworkSpec& spec, const WeightSet& weights) {
  const WeightSet ref = zero_weights(spec);
  if (ref.layers.size() != weights.layers.size()) {
    throw InvalidArgument("weight set has " + std::to_string(weights.layers.size()) +
                          " layers, spec has " + std::to_string(ref.layers.size()));
  }
  for (std::size_t i = 0; i < ref.layers.size(); ++i) {
    if (ref.layers[i].weights.shape != weights.layers[i].weights.shape ||
        ref.layers[i].bias.shape != weights.layers[i].bias.shape ||
        weights.layers[i].weights.values.size() != ref.layers[i].weights.size() ||
        weights.layers[i].bias.values.size() != ref.layers[i].bias.size()) {
      throw InvalidArgument("weight shapes of layer " + std::to_string(i) +
                            " do not match the network spec");
    }
  }
}

std::array<double, 2> ForwardPass::probabilities() const {
  const Tensor& out = activations.back();
  return {out.values[0], out.values[1]};
}

ForwardPass forward_pass(const NetworkSpec& spec, const WeightSet& weights,
                         const Tensor& input, Mode mode, Rng* rng) {
  spec.validate();
  check_weights(spec, weights);
  if (input.shape != spec.input_shape() || input.values.size() != shape_product(input.shape)) {
    throw InvalidArgument("input shape " + shape_string(input.shape) +
                          " does not match network input " +
                          shape_string(spec.input_shape()));
  }
  for (double v : input.values) {
    if (!std::isfinite(v)) throw InvalidArgument("non-finite network input");
  }
  if (mode == Mode::Train && rng == nullptr) {
    throw InvalidArgument("train-mode forward requires a random generator");
  }

  ForwardPass pass;
  pass.spec_fingerprint = spec.fingerprint();
  pass.mode = mode;
  const std::size_t n = spec.layers.size();
  pass.activations.reserve(n + 1);
  pass.activations.push_back(input);
  pass.dropout_keep.resize(n);
  pass.pool_argmax.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Tensor& in = pass.activations.back();
    Tensor out;
    std::visit(
        overloaded{
            [&](const Convolution3D&) { conv_forward(in, weights.layers[i], out); },
            [&](const Pooling& p) { pool_forward(in, p, out, pass.pool_argmax[i]); },
            [&](const ReLU&) {
              out = in;
              for (double& v : out.values) v = v > 0.0 ? v : 0.0;
            },
            [&](const Dropout& d) {
              out = in;
              if (mode == Mode::Test || d.ratio == 0.0) return;
              auto& keep = pass.dropout_keep[i];
              keep.resize(in.size());
              const double scale = 1.0 / (1.0 - d.ratio);
              for (std::size_t j = 0; j < in.size(); ++j) {
                keep[j] = rng->bernoulli(d.ratio) ? 0 : 1;
                out.values[j] = keep[j] ? in.values[j] * scale : 0.0;
              }
            },
            [&](const FullyConnected&) {
              Tensor flat{{in.size()}};
              flat.values = in.values;
              fc_forward(flat, weights.layers[i], out);
            },
            [&](const Softmax&) { softmax_forward(in, out); },
        },
        spec.layers[i]);
    pass.activations.push_back(std::move(out));
  }
  return pass;
}

std::array<double, 2> forward(const NetworkSpec& spec, const WeightSet& weights,
                              const Tensor& input, Mode mode, Rng* rng) {
  return forward_pass(spec, weights, input, mode, rng).probabilities();
}

LossValue loss(std::span<const double> probabilities, int label) {
  if (probabilities.size() != 2 || (label != 0 && label != 1)) {
    throw InvalidArgument("loss expects a probability pair and a 0/1 label");
  }
  const double p = probabilities[static_cast<std::size_t>(label)];
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("loss: invalid probability");
  if (p < kProbabilityFloor) return {-std::log(kProbabilityFloor), true};
  return {-std::log(p), false};
}

Gradients backward(const NetworkSpec& spec, const WeightSet& weights,
                   const ForwardPass& pass, int label) {
  if (label != 0 && label != 1) throw InvalidArgument("label must be 0 or 1");
  const std::size_t n = spec.layers.size();
  if (pass.spec_fingerprint != spec.fingerprint() || pass.activations.size() != n + 1 ||
      pass.dropout_keep.size() != n || pass.pool_argmax.size() != n) {
    throw InvalidArgument("backward: forward state does not belong to this network");
  }
  const auto shapes = spec.output_shapes();
  for (std::size_t i = 0; i < n; ++i) {
    if (pass.activations[i + 1].shape != shapes[i]) {
      throw InvalidArgument("backward: forward state does not belong to this network");
    }
  }
  check_weights(spec, weights);

  Gradients grads;
  grads.weights = zero_weights(spec);

  // d loss / d probabilities
  const auto probs = pass.probabilities();
  const double p_label = std::max(probs[static_cast<std::size_t>(label)], kProbabilityFloor);
  Tensor grad({2});
  grad.values[static_cast<std::size_t>(label)] = -1.0 / p_label;

  for (std::size_t li = n; li-- > 0;) {
    const Tensor& in = pass.activations[li];
    const Tensor& out = pass.activations[li + 1];
    Tensor din;
    std::visit(
        overloaded{
            [&](const Convolution3D&) {
              conv_backward(in, weights.layers[li], grad, grads.weights.layers[li], din);
            },
            [&](const Pooling& p) {
              pool_backward(in, p, grad, pass.pool_argmax[li], din);
            },
            [&](const ReLU&) {
              din = Tensor(in.shape);
              for (std::size_t j = 0; j < in.size(); ++j) {
                din.values[j] = in.values[j] > 0.0 ? grad.values[j] : 0.0;
              }
            },
            [&](const Dropout& d) {
              din = grad;
              din.shape = in.shape;
              const auto& keep = pass.dropout_keep[li];
              if (pass.mode == Mode::Test || d.ratio == 0.0) return;
              if (keep.size() != in.size()) {
                throw InvalidArgument("backward: dropout mask missing");
              }
              const double scale = 1.0 / (1.0 - d.ratio);
              for (std::size_t j = 0; j < in.size(); ++j) {
                din.values[j] = keep[j] ? grad.values[j] * scale : 0.0;
              }
            },
            [&](const FullyConnected&) {
              Tensor flat{{in.size()}};
              flat.values = in.values;
              fc_backward(flat, weights.layers[li], grad, grads.weights.layers[li], din);
              din.shape = in.shape;
            },
            [&](const Softmax&) {
              double dot = 0.0;
              for (std::size_t j = 0; j < out.size(); ++j) dot += grad.values[j] * out.values[j];
              din = Tensor(in.shape);
              for (std::size_t j = 0; j < out.size(); ++j) {
                din.values[j] = out.values[j] * (grad.values[j] - dot);
              }
            },
        },
        spec.layers[li]);
    grad = std::move(din);
  }
  grads.input = std::move(grad);
  return grads;
}

Gradients backward(const NetworkSpec& spec, const WeightSet& weights,
                   const Tensor& input, int label, Mode mode, Rng* rng) {
  return backward(spec, weights, forward_pass(spec, weights, input, mode, rng), label);
}

// Checkpoint I/O --------------------------------------------------------------

namespace {

constexpr char kCheckpointMagic[4] = {'V', 'X', 'C', 'K'};
constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
void put(std::vector<std::byte>& out, T v) {
  const auto* p = reinterpret_cast<const std::byte*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T get(std::span<const std::byte> bytes, std::size_t& off) {
  if (off + sizeof(T) > bytes.size()) throw DataError("checkpoint: truncated");
  T v;
  std::memcpy(&v, bytes.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}

void put_shape(std::vector<std::byte>& out, const Shape& s) {
  put(out, static_cast<std::uint32_t>(s.size()));
  for (auto d : s) put(out, static_cast<std::uint32_t>(d));
}

Shape get_shape(std::span<const std::byte> bytes, std::size_t& off) {
  const auto rank = get<std::uint32_t>(bytes, off);
  if (rank > 8) throw DataError("checkpoint: implausible tensor rank");
  Shape s(rank);
  for (auto& d : s) d = get<std::uint32_t>(bytes, off);
  return s;
}

}  // namespace

std::vector<std::byte> save_checkpoint(const NetworkSpec& spec, const WeightSet& weights) {
  check_weights(spec, weights);
  std::vector<std::byte> out;
  const auto* m = reinterpret_cast<const std::byte*>(kCheckpointMagic);
  out.insert(out.end(), m, m + 4);
  put(out, kCheckpointVersion);
  put(out, spec.fingerprint());
  put(out, static_cast<std::uint32_t>(weights.layers.size()));
  for (const auto& l : weights.layers) {
    put_shape(out, l.weights.shape);
    put_shape(out, l.bias.shape);
  }
  for (const auto& l : weights.layers) {
    for (double v : l.weights.values) put(out, static_cast<float>(v));
    for (double v : l.bias.values) put(out, static_cast<float>(v));
  }
  return out;
}

WeightSet load_checkpoint(const NetworkSpec& spec, std::span<const std::byte> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw DataError("checkpoint: bad magic");
  }
  std::size_t off = 4;
  if (get<std::uint32_t>(bytes, off) != kCheckpointVersion) {
    throw DataError("checkpoint: unsupported version");
  }
  if (get<std::uint64_t>(bytes, off) != spec.fingerprint()) {
    throw DataError("checkpoint: network fingerprint mismatch (expected " +
                    spec.describe() + ")");
  }
  const auto count = get<std::uint32_t>(bytes, off);
  WeightSet ws = zero_weights(spec);
  if (count != ws.layers.size()) throw DataError("checkpoint: layer count mismatch");
  for (auto& l : ws.layers) {
    if (get_shape(bytes, off) != l.weights.shape || get_shape(bytes, off) != l.bias.shape) {
      throw DataError("checkpoint: layer shape mismatch");
    }
  }
  for (auto& l : ws.layers) {
    for (double& v : l.weights.values) v = get<float>(bytes, off);
    for (double& v : l.bias.values) v = get<float>(bytes, off);
  }
  if (off != bytes.size()) throw DataError("checkpoint: trailing bytes");
  return ws;
}

}  // namespace voxscore
