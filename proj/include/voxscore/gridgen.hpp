#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "voxscore/common.hpp"
#include "voxscore/moldata.hpp"

namespace voxscore {

enum class Occupancy : std::uint8_t { Gaussian, Boolean };

struct GridConfig {
  double dimension = 24.0;  // Å, edge length
  double resolution = 0.5;  // Å
  double radius_multiplier = 1.5;
  Occupancy occupancy = Occupancy::Gaussian;
  AtomTypeScheme scheme{SchemeName::Smina34};

  /// Points per axis; throws unless dimension/resolution is a positive integer
  /// and radius_multiplier >= 1.
  std::size_t side() const;
  void validate() const;
};

struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
  Vec3 rotate(const Vec3& v) const;
  static Quaternion axis_angle(const Vec3& axis, double radians);
};

/// Rigid-body motion applied about the grid center: rotate, then translate.
struct Transform {
  Quaternion rotation;
  Vec3 translation;

  static Transform identity() { return {}; }
  bool is_identity() const;
  Vec3 apply(const Vec3& p, const Vec3& center) const {
    if (is_identity()) return p;
    return center + rotation.rotate(p - center) + translation;
  }
};

/// Atom density A(d, r) with a Gaussian core out to r and a quadratic tail
/// reaching zero at multiplier*r. The quadratic matches the Gaussian's value
/// and slope at r; at multiplier 1.5 it is also flat at 1.5r. For multipliers
/// above 1.5 the tail is clamped at zero where the quadratic would dip below.
double atom_density(double d, double r, double multiplier = 1.5);

/// Coefficients (a, b, c) of the tail a*d^2 + b*d + c.
std::array<double, 3> density_tail_coefficients(double r, double multiplier);

struct DensityGrid {
  std::size_t channels = 0;
  std::size_t side = 0;
  Vec3 center;
  GridConfig config;
  Transform transform;
  /// channel-major: ((c*side + i)*side + j)*side + k, i along x, k along z.
  std::vector<float> values;

  std::size_t index(std::size_t c, std::size_t i, std::size_t j, std::size_t k) const {
    return ((c * side + i) * side + j) * side + k;
  }
  float at(std::size_t c, std::size_t i, std::size_t j, std::size_t k) const {
    return values[index(c, i, j, k)];
  }
  double channel_sum(std::size_t c) const;
  double total() const;
};

/// Coordinate of grid point index i along one axis.
inline double grid_coordinate(double center, std::size_t i, std::size_t side,
                              double resolution) {
  return center + (static_cast<double>(i) - (static_cast<double>(side) - 1.0) / 2.0) *
                      resolution;
}

/// Rasterizes the typed atoms of both molecules. Same-channel contributions
/// are summed in atom order (receptor first, then ligand) at every point.
DensityGrid voxelize(const Molecule& receptor, const Molecule& ligand,
                     const Vec3& center, const GridConfig& config,
                     const Transform& transform = Transform::identity());

/// Uniform rotation (when rotate is set) and a translation uniform in the
/// ball of radius max_translate.
Transform sample_transform(Rng& rng, double max_translate, bool rotate);

/// Centroid of typed, non-dropped atoms (all atoms when none are typed).
Vec3 molecule_center(const Molecule& mol);

/// Self-describing dump: "VXGD", u32 side, u32 channels, f32 resolution,
/// then channel-major binary32 values, little-endian.
std::vector<std::byte> write_grid_dump(const DensityGrid& grid);
DensityGrid read_grid_dump(std::span<const std::byte> bytes);

}  // namespace voxscore
