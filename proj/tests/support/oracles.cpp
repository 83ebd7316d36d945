#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace voxtest {

double closed_form_density(double d, double r) {
  const double e2 = std::exp(2.0);
  if (d < r) return std::exp(-2.0 * d * d / (r * r));
  if (d < 1.5 * r) {
    const double x = d / r;
    return 4.0 / e2 * x * x - 12.0 / e2 * x + 9.0 / e2;
  }
  return 0.0;
}

std::array<double, 3> solved_tail(double r, double m) {
  // Unknowns (a, b, c) of a d² + b d + c.
  const double g = std::exp(-2.0);
  const double A[3][3] = {{r * r, r, 1.0}, {2.0 * r, 1.0, 0.0}, {m * m * r * r, m * r, 1.0}};
  const double rhs[3] = {g, -4.0 * g / r, 0.0};
  auto det = [](const double M[3][3]) {
    return M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) -
           M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
           M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
  };
  const double D = det(A);
  std::array<double, 3> out{};
  for (int col = 0; col < 3; ++col) {
    double M[3][3];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) M[i][j] = j == col ? rhs[i] : A[i][j];
    }
    out[col] = det(M) / D;
  }
  return out;
}

DensityGrid naive_voxelize(const Molecule& receptor, const Molecule& ligand,
                           const Vec3& center, const GridConfig& config) {
  const std::size_t n = config.side();
  const std::size_t channels = static_cast<std::size_t>(config.scheme.channel_count());
  DensityGrid g;
  g.channels = channels;
  g.side = n;
  g.center = center;
  g.config = config;
  g.values.assign(channels * n * n * n, 0.0f);
  const double half = (static_cast<double>(n) - 1.0) / 2.0;
  for (const Molecule* mol : {&receptor, &ligand}) {
    for (const TypedAtom& a : mol->atoms) {
      if (a.channel < 0) continue;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          for (std::size_t k = 0; k < n; ++k) {
            const double px = center.x + (static_cast<double>(i) - half) * config.resolution;
            const double py = center.y + (static_cast<double>(j) - half) * config.resolution;
            const double pz = center.z + (static_cast<double>(k) - half) * config.resolution;
            const double dx = px - a.position.x;
            const double dy = py - a.position.y;
            const double dz = pz - a.position.z;
            const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
            float& v = g.values[((static_cast<std::size_t>(a.channel) * n + i) * n + j) * n + k];
            if (config.occupancy == Occupancy::Boolean) {
              if (d < a.vdw_radius) v = 1.0f;
            } else {
              v += static_cast<float>(atom_density(d, a.vdw_radius, config.radius_multiplier));
            }
          }
        }
      }
    }
  }
  return g;
}

PairCount pairwise_auc(std::span<const double> scores, std::span<const int> labels) {
  PairCount pc;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pc.pairs;
      if (scores[i] > scores[j]) pc.twice_wins += 2;
      else if (scores[i] == scores[j]) pc.twice_wins += 1;
    }
  }
  return pc;
}

Tensor direct_conv(const Tensor& input, const Tensor& kernel, const Tensor& bias) {
  const std::size_t c_in = input.shape[0], n = input.shape[1], f_out = kernel.shape[0];
  Tensor out({f_out, n, n, n});
  auto in_at = [&](std::size_t c, long x, long y, long z) -> double {
    const long m = static_cast<long>(n);
    if (x < 0 || y < 0 || z < 0 || x >= m || y >= m || z >= m) return 0.0;
    return input.values[((c * n + x) * n + y) * n + z];
  };
  for (std::size_t f = 0; f < f_out; ++f) {
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t z = 0; z < n; ++z) {
          double s = bias.values[f];
          for (std::size_t c = 0; c < c_in; ++c) {
            for (int a = 0; a < 3; ++a) {
              for (int b = 0; b < 3; ++b) {
                for (int e = 0; e < 3; ++e) {
                  const double w = kernel.values[(((f * c_in + c) * 3 + a) * 3 + b) * 3 + e];
                  s += w * in_at(c, static_cast<long>(x) + a - 1, static_cast<long>(y) + b - 1,
                                 static_cast<long>(z) + e - 1);
                }
              }
            }
          }
          out.values[((f * n + x) * n + y) * n + z] = s;
        }
      }
    }
  }
  return out;
}

namespace {

// True when the ReLU sign pattern or max-pool choices differ between passes.
bool kink_between(const NetworkSpec& spec, const ForwardPass& a, const ForwardPass& b) {
  if (a.pool_argmax != b.pool_argmax) return true;
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    if (!std::holds_alternative<ReLU>(spec.layers[l])) continue;
    const auto& x = a.activations[l];
    const auto& y = b.activations[l];
    for (std::size_t i = 0; i < x.size(); ++i) {
      if ((x.values[i] > 0.0) != (y.values[i] > 0.0)) return true;
    }
  }
  return false;
}

}  // namespace

GradCheck gradient_check(const NetworkSpec& spec, const WeightSet& weights,
                         const Tensor& input, int label, Mode mode, const Rng& rng) {
  GradCheck out;
  Rng r0 = rng;
  const ForwardPass base = forward_pass(spec, weights, input, mode, &r0);
  const Gradients g = backward(spec, weights, base, label);

  auto probe = [&](double& slot, double analytic, WeightSet& w, Tensor& x) {
    const double v = slot;
    // Shrink the step when it straddles a kink; skip if it still does.
    for (double h = 1e-3 * std::max(std::abs(v), 0.1), tries = 0; tries < 3; h /= 10, ++tries) {
      slot = v + h;
      Rng rp = rng;
      const ForwardPass plus = forward_pass(spec, w, x, mode, &rp);
      slot = v - h;
      Rng rm = rng;
      const ForwardPass minus = forward_pass(spec, w, x, mode, &rm);
      slot = v;
      if (kink_between(spec, plus, minus)) continue;
      const double lp = loss(plus.probabilities(), label).value;
      const double lm = loss(minus.probabilities(), label).value;
      const double numeric = (lp - lm) / (2.0 * h);
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
      out.max_rel_error = std::max(out.max_rel_error, std::abs(analytic - numeric) / denom);
      ++out.checked;
      return;
    }
    ++out.skipped;
  };

  WeightSet w = weights;
  Tensor x = input;
  for (std::size_t l = 0; l < w.layers.size(); ++l) {
    for (std::size_t i = 0; i < w.layers[l].weights.size(); ++i) {
      probe(w.layers[l].weights.values[i], g.weights.layers[l].weights.values[i], w, x);
    }
    for (std::size_t i = 0; i < w.layers[l].bias.size(); ++i) {
      probe(w.layers[l].bias.values[i], g.weights.layers[l].bias.values[i], w, x);
    }
  }
  for (std::size_t i = 0; i < x.size(); ++i) probe(x.values[i], g.input.values[i], w, x);
  return out;
}

}  // namespace voxtest
