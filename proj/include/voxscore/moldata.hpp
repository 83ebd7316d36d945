#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "voxscore/common.hpp"

namespace voxscore {

enum class Role : std::uint8_t { Ligand, Receptor };

std::string_view role_name(Role role);

/// Typing annotations carried on each atom. Perception is external; the
/// flags arrive with the structure.
namespace flags {
inline constexpr std::uint8_t kAromatic = 1u << 0;
inline constexpr std::uint8_t kDonor = 1u << 1;
inline constexpr std::uint8_t kAcceptor = 1u << 2;
inline constexpr std::uint8_t kHydrophobe = 1u << 3;
}  // namespace flags

/// Channel sentinel values.
inline constexpr int kUntyped = -2;
inline constexpr int kDropped = -1;

struct TypedAtom {
  Vec3 position;
  std::string element;
  double vdw_radius = 0.0;
  Role role = Role::Ligand;
  std::uint8_t flags = 0;
  std::string residue_id;                 // receptor atoms
  std::vector<std::string> fragment_ids;  // ligand atoms, possibly empty
  int channel = kUntyped;

  bool has(std::uint8_t f) const { return (flags & f) == f; }
  bool typed() const { return channel >= 0; }
};

/// smina atom types. The first 22 entries are the rows of the published type
/// table in table order; the rest are types that can be resolved from input
/// annotations but never receive a smina34 channel.
enum class SminaType : std::uint8_t {
  AliphaticCarbonXSHydrophobe,
  AliphaticCarbonXSNonHydrophobe,
  AromaticCarbonXSHydrophobe,
  AromaticCarbonXSNonHydrophobe,
  Bromine,
  Calcium,
  Chlorine,
  Fluorine,
  Iodine,
  Iron,
  Magnesium,
  Nitrogen,
  NitrogenXSAcceptor,
  NitrogenXSDonor,
  NitrogenXSDonorAcceptor,
  Oxygen,
  OxygenXSAcceptor,
  OxygenXSDonorAcceptor,
  Phosphorus,
  Sulfur,
  SulfurAcceptor,
  Zinc,
  OxygenXSDonor,
  Hydrogen,
  Other,  // a recognised element with no smina type (Na, Se, ...)
};

inline constexpr std::size_t kTableTypeCount = 22;

std::string_view smina_type_name(SminaType t);
std::optional<SminaType> smina_type_from_name(std::string_view name);

/// Resolves annotations to a smina type. Nitrogen/oxygen use the priority
/// donor+acceptor > donor > acceptor > plain; sulfur becomes SulfurAcceptor
/// when the acceptor flag is set.
SminaType resolve_smina_type(std::string_view element, std::uint8_t atom_flags);

/// Whether the published table enables this type for this role.
bool table_allows(SminaType t, Role role);

/// True for element symbols the parsers accept.
bool is_known_element(std::string_view symbol);

enum class SchemeName : std::uint8_t { Smina34, Element18, Binary2 };

std::string_view scheme_name(SchemeName name);
SchemeName scheme_from_name(std::string_view name);

/// Mapping from (element, flags, role) to a density-grid channel.
class AtomTypeScheme {
 public:
  explicit AtomTypeScheme(SchemeName name = SchemeName::Smina34)
      : name_(name) {}

  SchemeName name() const { return name_; }
  int channel_count() const;
  /// Channel index, or kDropped.
  int channel_for(std::string_view element, std::uint8_t atom_flags,
                  Role role) const;
  Role channel_role(int channel) const;
  std::string channel_name(int channel) const;

  bool operator==(const AtomTypeScheme&) const = default;

 private:
  SchemeName name_;
};

/// smina34 channel <-> (role, type).
int smina34_channel(SminaType t, Role role);  // kDropped when not in table
std::pair<Role, SminaType> smina34_type(int channel);

/// Canonical element and flags for a smina type, used when reading files
/// that only carry the type index.
std::pair<std::string, std::uint8_t> smina_type_annotations(SminaType t);

/// Van der Waals radii keyed by smina type name, with per-element entries for
/// elements outside the smina types.
class RadiusTable {
 public:
  /// The documented defaults (smina's xs radii).
  static RadiusTable defaults();
  /// Parses "key = value" (or "key value") lines, '#' comments. Entries
  /// override the defaults.
  static RadiusTable parse(std::string_view text);

  double radius(std::string_view element, std::uint8_t atom_flags) const;
  void set(const std::string& key, double value);
  const std::map<std::string, double>& entries() const { return entries_; }

 private:
  std::map<std::string, double> entries_;
};

struct Molecule {
  std::vector<TypedAtom> atoms;
  Role role = Role::Ligand;
  std::string name;
  /// Scheme the channels were assigned under, if any.
  std::optional<SchemeName> typed_with;

  bool empty() const { return atoms.empty(); }
  std::size_t size() const { return atoms.size(); }
};

struct TypingReport {
  std::size_t typed = 0;
  std::size_t hydrogens = 0;
  std::size_t dropped_by_table = 0;  // pairs the scheme excludes
  std::size_t unsupported = 0;       // combinations with no type (warnings)
};

enum class StructureFormat : std::uint8_t { Text, Gninatypes };

/// Format by file extension: ".gninatypes" is binary, anything else text.
StructureFormat format_for_path(std::string_view path);

/// Parses a structure. Errors carry the line (text) or byte offset (binary).
Molecule parse_structure(std::span<const std::byte> bytes,
                         StructureFormat format,
                         const RadiusTable& radii = RadiusTable::defaults());
Molecule parse_structure_text(std::string_view text,
                              const RadiusTable& radii = RadiusTable::defaults());

/// Serializes to the text format (inverse of parse_structure_text).
std::string format_structure_text(const Molecule& mol);

Molecule assign_types(Molecule mol, const AtomTypeScheme& scheme,
                      TypingReport* report = nullptr);

inline constexpr std::size_t kGninatypesRecordSize = 16;

/// Little-endian records {float x, y, z; int32 smina34 type}. No header.
Molecule read_gninatypes(std::span<const std::byte> bytes,
                         const RadiusTable& radii = RadiusTable::defaults());
/// Requires a smina34-typed molecule; dropped atoms are not written.
std::vector<std::byte> write_gninatypes(const Molecule& mol);

Molecule load_structure(const std::string& path,
                        const RadiusTable& radii = RadiusTable::defaults());
std::vector<std::byte> read_file_bytes(const std::string& path);

}  // namespace voxscore
