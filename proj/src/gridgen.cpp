#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

#include "voxscore/gridgen.hpp"

namespace voxscore {

namespace {

constexpr char kGridMagic[4] = {'V', 'X', 'G', 'D'};

template <typename T>
void put(std::vector<std::byte>& out, T v) {
  const auto* p = reinterpret_cast<const std::byte*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T get(std::span<const std::byte> bytes, std::size_t& off) {
  if (off + sizeof(T) > bytes.size()) throw DataError("grid dump: truncated");
  T v;
  std::memcpy(&v, bytes.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}

void check_typed(const Molecule& mol, const GridConfig& config) {
  if (mol.atoms.empty()) return;
  if (mol.typed_with != config.scheme.name()) {
    throw InvalidArgument("voxelize: molecule '" + mol.name +
                          "' is not typed under " +
                          std::string(scheme_name(config.scheme.name())));
  }
  for (const auto& a : mol.atoms) {
    if (a.channel == kUntyped) throw InvalidArgument("voxelize: untyped atom");
    if (a.channel >= config.scheme.channel_count()) {
      throw InvalidArgument("voxelize: channel out of range");
    }
  }
}

}  // namespace

std::size_t GridConfig::side() const {
  validate();
  return static_cast<std::size_t>(std::llround(dimension / resolution));
}

void GridConfig::validate() const {
  if (!(resolution > 0.0) || !(dimension > 0.0)) {
    throw InvalidArgument("grid dimension and resolution must be positive");
  }
  const double n = dimension / resolution;
  if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n) || std::round(n) < 1.0) {
    throw InvalidArgument("grid dimension must be an integer multiple of the resolution");
  }
  if (!(radius_multiplier >= 1.0)) {
    throw InvalidArgument("radius multiplier must be >= 1");
  }
}

Vec3 Quaternion::rotate(const Vec3& v) const {
  // v' = v + 2w (u x v) + 2 u x (u x v), u = (x, y, z)
  const Vec3 u{x, y, z};
  const Vec3 t{2.0 * (u.y * v.z - u.z * v.y), 2.0 * (u.z * v.x - u.x * v.z),
               2.0 * (u.x * v.y - u.y * v.x)};
  return {v.x + w * t.x + (u.y * t.z - u.z * t.y),
          v.y + w * t.y + (u.z * t.x - u.x * t.z),
          v.z + w * t.z + (u.x * t.y - u.y * t.x)};
}

Quaternion Quaternion::axis_angle(const Vec3& axis, double radians) {
  const double n = axis.norm();
  if (!(n > 0.0)) throw InvalidArgument("rotation axis must be nonzero");
  const double s = std::sin(radians / 2.0) / n;
  return {std::cos(radians / 2.0), axis.x * s, axis.y * s, axis.z * s};
}

bool Transform::is_identity() const {
  return rotation.w == 1.0 && rotation.x == 0.0 && rotation.y == 0.0 &&
         rotation.z == 0.0 && translation == Vec3{};
}

std::array<double, 3> density_tail_coefficients(double r, double m) {
  const double g = std::exp(-2.0);
  const double slope = -4.0 * g / r;
  const double k = g * (4.0 * m - 5.0) / ((m - 1.0) * (m - 1.0) * r * r);
  return {k, slope - 2.0 * k * r, g - slope * r + k * r * r};
}

double atom_density(double d, double r, double multiplier) {
  if (!(r > 0.0)) throw InvalidArgument("atom_density: radius must be positive");
  if (!(multiplier >= 1.0)) throw InvalidArgument("atom_density: multiplier must be >= 1");
  if (d < r) return std::exp(-2.0 * d * d / (r * r));
  if (d >= multiplier * r) return 0.0;
  const auto [a, b, c] = density_tail_coefficients(r, multiplier);
  return std::max(0.0, a * d * d + b * d + c);
}

double DensityGrid::channel_sum(std::size_t c) const {
  const std::size_t n3 = side * side * side;
  double s = 0.0;
  for (std::size_t i = 0; i < n3; ++i) s += values[c * n3 + i];
  return s;
}

double DensityGrid::total() const {
  double s = 0.0;
  for (float v : values) s += v;
  return s;
}

DensityGrid voxelize(const Molecule& receptor, const Molecule& ligand,
                     const Vec3& center, const GridConfig& config,
                     const Transform& transform) {
  if (!center.finite()) throw InvalidArgument("voxelize: center is not finite");
  const std::size_t n = config.side();
  check_typed(receptor, config);
  check_typed(ligand, config);

  DensityGrid grid;
  grid.channels = static_cast<std::size_t>(config.scheme.channel_count());
  grid.side = n;
  grid.center = center;
  grid.config = config;
  grid.transform = transform;
  grid.values.assign(grid.channels * n * n * n, 0.0f);

  const double res = config.resolution;
  std::vector<double> xs(n), ys(n), zs(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = grid_coordinate(center.x, i, n, res);
    ys[i] = grid_coordinate(center.y, i, n, res);
    zs[i] = grid_coordinate(center.z, i, n, res);
  }
  const bool boolean = config.occupancy == Occupancy::Boolean;

  // Index range along one axis whose points may lie within `cut` of `a`.
  // Padded by one point; the exact distance test happens per point.
  auto range = [&](double a, double first, double cut, long& lo, long& hi) {
    lo = static_cast<long>(std::floor((a - cut - first) / res)) - 1;
    hi = static_cast<long>(std::ceil((a + cut - first) / res)) + 1;
    lo = std::max(lo, 0L);
    hi = std::min(hi, static_cast<long>(n) - 1);
  };

  for (const Molecule* mol : {&receptor, &ligand}) {
    for (const auto& atom : mol->atoms) {
      if (atom.channel < 0) continue;
      const Vec3 p = transform.apply(atom.position, center);
      const double r = atom.vdw_radius;
      const double cut = boolean ? r : config.radius_multiplier * r;
      long ilo, ihi, jlo, jhi, klo, khi;
      range(p.x, xs[0], cut, ilo, ihi);
      range(p.y, ys[0], cut, jlo, jhi);
      range(p.z, zs[0], cut, klo, khi);
      const auto c = static_cast<std::size_t>(atom.channel);
      for (long i = ilo; i <= ihi; ++i) {
        const double dx = xs[i] - p.x;
        for (long j = jlo; j <= jhi; ++j) {
          const double dy = ys[j] - p.y;
          float* row = &grid.values[grid.index(c, i, j, 0)];
          for (long k = klo; k <= khi; ++k) {
            const double dz = zs[k] - p.z;
            const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
            if (boolean) {
              if (d < r) row[k] = 1.0f;
            } else if (d < cut) {
              row[k] += static_cast<float>(atom_density(d, r, config.radius_multiplier));
            }
          }
        }
      }
    }
  }
  return grid;
}

Transform sample_transform(Rng& rng, double max_translate, bool rotate) {
  if (!(max_translate >= 0.0)) {
    throw InvalidArgument("sample_transform: max_translate must be >= 0");
  }
  Transform t;
  if (rotate) {
    // Shoemake's subgroup algorithm: uniform over SO(3).
    const double u1 = rng.uniform();
    const double u2 = rng.uniform();
    const double u3 = rng.uniform();
    const double a = std::sqrt(1.0 - u1);
    const double b = std::sqrt(u1);
    const double tau = 2.0 * std::numbers::pi;
    t.rotation = {b * std::cos(tau * u3), a * std::sin(tau * u2),
                  a * std::cos(tau * u2), b * std::sin(tau * u3)};
    const double nrm = t.rotation.norm();
    t.rotation = {t.rotation.w / nrm, t.rotation.x / nrm, t.rotation.y / nrm,
                  t.rotation.z / nrm};
  }
  if (max_translate > 0.0) {
    Vec3 v;
    do {
      v = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    } while (v.dot(v) > 1.0);
    t.translation = v * max_translate;
  }
  return t;
}

Vec3 molecule_center(const Molecule& mol) {
  Vec3 sum;
  std::size_t count = 0;
  for (const auto& a : mol.atoms) {
    if (a.channel >= 0) {
      sum += a.position;
      ++count;
    }
  }
  if (count == 0) {
    for (const auto& a : mol.atoms) {
      if (a.channel == kDropped) continue;
      sum += a.position;
      ++count;
    }
  }
  if (count == 0) {
    for (const auto& a : mol.atoms) sum += a.position;
    count = mol.atoms.size();
  }
  return count == 0 ? Vec3{} : sum * (1.0 / static_cast<double>(count));
}

std::vector<std::byte> write_grid_dump(const DensityGrid& grid) {
  std::vector<std::byte> out;
  out.reserve(16 + grid.values.size() * 4);
  const auto* m = reinterpret_cast<const std::byte*>(kGridMagic);
  out.insert(out.end(), m, m + 4);
  put(out, static_cast<std::uint32_t>(grid.side));
  put(out, static_cast<std::uint32_t>(grid.channels));
  put(out, static_cast<float>(grid.config.resolution));
  for (float v : grid.values) put(out, v);
  return out;
}

DensityGrid read_grid_dump(std::span<const std::byte> bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kGridMagic, 4) != 0) {
    throw DataError("grid dump: bad magic");
  }
  std::size_t off = 4;
  DensityGrid g;
  g.side = get<std::uint32_t>(bytes, off);
  g.channels = get<std::uint32_t>(bytes, off);
  g.config.resolution = get<float>(bytes, off);
  g.config.dimension = g.config.resolution * static_cast<double>(g.side);
  const std::size_t count = g.channels * g.side * g.side * g.side;
  if (bytes.size() - off != count * sizeof(float)) {
    throw DataError("grid dump: payload size does not match header");
  }
  g.values.resize(count);
  std::memcpy(g.values.data(), bytes.data() + off, count * sizeof(float));
  return g;
}

}  // namespace voxscore
