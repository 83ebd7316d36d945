#pragma once

// Reference implementations written independently of the library, used as
// test oracles.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "voxscore/gridgen.hpp"
#include "voxscore/moldata.hpp"
#include "voxscore/tensornet.hpp"

namespace voxtest {

using namespace voxscore;

/// Density written out literally: Gaussian core, then
/// 4/e² (d/r)² − 12/e² (d/r) + 9/e² up to 1.5r.
double closed_form_density(double d, double r);

/// Tail for a general multiplier, found by solving the 3x3 system
/// q(r) = e⁻², q'(r) = −4e⁻²/r, q(mr) = 0 with Cramer's rule.
std::array<double, 3> solved_tail(double r, double m);

/// Loops over every grid point for every atom (identity transform).
DensityGrid naive_voxelize(const Molecule& receptor, const Molecule& ligand,
                           const Vec3& center, const GridConfig& config);

/// Fraction of (positive, negative) pairs ordered correctly, ties count half,
/// as an exact rational numerator over 2·P·N.
struct PairCount {
  std::uint64_t twice_wins = 0;
  std::uint64_t pairs = 0;
  double auc() const { return static_cast<double>(twice_wins) / (2.0 * pairs); }
};
PairCount pairwise_auc(std::span<const double> scores, std::span<const int> labels);

/// Direct 3x3x3, pad 1 convolution of one [C, n, n, n] input.
Tensor direct_conv(const Tensor& input, const Tensor& kernel, const Tensor& bias);

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // finite difference straddles a ReLU or max-pool kink
};

/// Central differences over every weight, bias and input value. The step is
/// 1e-3 of the value, with magnitudes below 0.1 treated as 0.1, shrunk up to
/// twice by 10x when it straddles a ReLU or max-pool kink. Relative
/// error uses max(|analytic|, |numeric|, 1e-6) as the denominator. Dropout
/// masks are replayed from a copy of `rng`.
GradCheck gradient_check(const NetworkSpec& spec, const WeightSet& weights,
                         const Tensor& input, int label, Mode mode, const Rng& rng);

}  // namespace voxtest
