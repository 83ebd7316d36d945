#include <bit>
#include <cctype>
#include <cmath>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <tuple>

#include "voxscore/moldata.hpp"

namespace voxscore {

namespace {

static_assert(std::endian::native == std::endian::little,
              "gninatypes I/O assumes a little-endian host");

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string> split_commas(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t end = s.find(',', start);
    if (end == std::string_view::npos) end = s.size();
    if (end > start) out.emplace_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

[[noreturn]] void fail_line(int lineno, const std::string& what) {
  throw DataError("line " + std::to_string(lineno) + ": " + what);
}

double parse_coord(const std::string& tok, int lineno) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    fail_line(lineno, "malformed coordinate '" + tok + "'");
  }
  return v;
}

std::string normalize_element(std::string_view s) {
  std::string e(s);
  for (std::size_t i = 0; i < e.size(); ++i) {
    e[i] = static_cast<char>(i == 0 ? std::toupper(static_cast<unsigned char>(e[i]))
                                    : std::tolower(static_cast<unsigned char>(e[i])));
  }
  return e;
}

std::optional<std::uint8_t> parse_flag(std::string_view tok) {
  if (tok == "aromatic") return flags::kAromatic;
  if (tok == "donor" || tok == "h_donor") return flags::kDonor;
  if (tok == "acceptor" || tok == "h_acceptor") return flags::kAcceptor;
  if (tok == "hydrophobe") return flags::kHydrophobe;
  return std::nullopt;
}

std::optional<Role> parse_role(std::string_view tok) {
  if (tok == "ligand") return Role::Ligand;
  if (tok == "receptor") return Role::Receptor;
  return std::nullopt;
}

template <typename T>
T read_le(const std::byte* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

template <typename T>
void append_le(std::vector<std::byte>& out, T v) {
  std::byte buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.insert(out.end(), std::begin(buf), std::end(buf));
}

}  // namespace

StructureFormat format_for_path(std::string_view path) {
  constexpr std::string_view ext = ".gninatypes";
  if (path.size() >= ext.size() && path.substr(path.size() - ext.size()) == ext) {
    return StructureFormat::Gninatypes;
  }
  return StructureFormat::Text;
}

Molecule parse_structure_text(std::string_view text, const RadiusTable& radii) {
  Molecule mol;
  std::optional<Role> role;
  int lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    const auto tok = split_ws(line);
    if (tok.empty()) continue;

    if (tok[0] == "molecule") {
      if (!mol.atoms.empty()) fail_line(lineno, "header after atom records");
      for (std::size_t i = 1; i < tok.size(); ++i) {
        mol.name += (i > 1 ? " " : "") + tok[i];
      }
      continue;
    }
    if (tok.size() < 5) fail_line(lineno, "expected 'element x y z role ...'");

    TypedAtom atom;
    atom.element = normalize_element(tok[0]);
    if (!is_known_element(atom.element)) {
      fail_line(lineno, "unknown element symbol '" + tok[0] + "'");
    }
    atom.position = {parse_coord(tok[1], lineno), parse_coord(tok[2], lineno),
                     parse_coord(tok[3], lineno)};
    auto r = parse_role(tok[4]);
    if (!r) fail_line(lineno, "role must be 'ligand' or 'receptor', got '" + tok[4] + "'");
    if (role && *role != *r) fail_line(lineno, "atoms of mixed roles in one molecule");
    role = r;
    atom.role = *r;

    std::size_t next = 5;
    if (atom.role == Role::Receptor) {
      if (tok.size() < 6 || parse_flag(tok[5])) {
        fail_line(lineno, "receptor atom without residue id");
      }
      atom.residue_id = tok[5];
      next = 6;
    }
    for (std::size_t i = next; i < tok.size(); ++i) {
      const std::string& t = tok[i];
      if (auto f = parse_flag(t)) {
        atom.flags |= *f;
      } else if (atom.role == Role::Ligand && t.rfind("frag=", 0) == 0) {
        for (auto& id : split_commas(std::string_view(t).substr(5))) {
          atom.fragment_ids.push_back(std::move(id));
        }
      } else {
        fail_line(lineno, "unrecognised field '" + t + "'");
      }
    }
    atom.vdw_radius = radii.radius(atom.element, atom.flags);
    mol.atoms.push_back(std::move(atom));
  }
  if (mol.atoms.empty()) throw DataError("no atoms");
  mol.role = *role;
  return mol;
}

std::string format_structure_text(const Molecule& mol) {
  std::ostringstream out;
  out.precision(17);
  if (!mol.name.empty()) out << "molecule " << mol.name << '\n';
  for (const auto& a : mol.atoms) {
    out << a.element << ' ' << a.position.x << ' ' << a.position.y << ' '
        << a.position.z << ' ' << role_name(a.role);
    if (a.role == Role::Receptor) {
      out << ' ' << (a.residue_id.empty() ? "?" : a.residue_id);
    } else if (!a.fragment_ids.empty()) {
      out << " frag=";
      for (std::size_t i = 0; i < a.fragment_ids.size(); ++i) {
        out << (i ? "," : "") << a.fragment_ids[i];
      }
    }
    if (a.has(flags::kAromatic)) out << " aromatic";
    if (a.has(flags::kDonor)) out << " donor";
    if (a.has(flags::kAcceptor)) out << " acceptor";
    if (a.has(flags::kHydrophobe)) out << " hydrophobe";
    out << '\n';
  }
  return out.str();
}

Molecule parse_structure(std::span<const std::byte> bytes, StructureFormat format,
                         const RadiusTable& radii) {
  if (bytes.empty()) throw DataError("empty input");
  if (format == StructureFormat::Gninatypes) return read_gninatypes(bytes, radii);
  return parse_structure_text(
      std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
      radii);
}

Molecule assign_types(Molecule mol, const AtomTypeScheme& scheme,
                      TypingReport* report) {
  TypingReport rep;
  for (auto& a : mol.atoms) {
    a.channel = scheme.channel_for(a.element, a.flags, a.role);
    if (a.channel >= 0) {
      ++rep.typed;
    } else if (a.element == "H") {
      ++rep.hydrogens;
    } else {
      const SminaType t = resolve_smina_type(a.element, a.flags);
      const bool has_row = static_cast<std::size_t>(t) < kTableTypeCount;
      if (has_row) {
        ++rep.dropped_by_table;
      } else {
        ++rep.unsupported;
      }
    }
  }
  mol.typed_with = scheme.name();
  if (report) *report = rep;
  return mol;
}

Molecule read_gninatypes(std::span<const std::byte> bytes, const RadiusTable& radii) {
  if (bytes.size() % kGninatypesRecordSize != 0) {
    throw DataError("gninatypes: truncated file, length " +
                    std::to_string(bytes.size()) +
                    " is not a multiple of the record size " +
                    std::to_string(kGninatypesRecordSize));
  }
  Molecule mol;
  mol.typed_with = SchemeName::Smina34;
  std::optional<Role> role;
  const std::size_t n = bytes.size() / kGninatypesRecordSize;
  mol.atoms.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::byte* p = bytes.data() + i * kGninatypesRecordSize;
    const auto x = read_le<float>(p);
    const auto y = read_le<float>(p + 4);
    const auto z = read_le<float>(p + 8);
    const auto type = read_le<std::int32_t>(p + 12);
    if (type < 0 || type >= AtomTypeScheme(SchemeName::Smina34).channel_count()) {
      throw DataError("gninatypes: type index out of range (" +
                      std::to_string(type) + ") at byte offset " +
                      std::to_string(i * kGninatypesRecordSize + 12));
    }
    auto [r, st] = smina34_type(type);
    if (role && *role != r) {
      throw DataError("gninatypes: mixed ligand/receptor types at byte offset " +
                      std::to_string(i * kGninatypesRecordSize + 12));
    }
    role = r;
    TypedAtom a;
    a.position = {x, y, z};
    std::tie(a.element, a.flags) = smina_type_annotations(st);
    a.role = r;
    a.channel = type;
    a.vdw_radius = radii.radius(a.element, a.flags);
    if (r == Role::Receptor) a.residue_id = "?";
    mol.atoms.push_back(std::move(a));
  }
  if (role) mol.role = *role;
  return mol;
}

std::vector<std::byte> write_gninatypes(const Molecule& mol) {
  if (mol.typed_with != SchemeName::Smina34) {
    throw InvalidArgument("write_gninatypes requires a smina34-typed molecule");
  }
  std::vector<std::byte> out;
  out.reserve(mol.atoms.size() * kGninatypesRecordSize);
  for (const auto& a : mol.atoms) {
    if (a.channel == kDropped) continue;
    if (a.channel < 0) throw InvalidArgument("write_gninatypes: untyped atom");
    append_le(out, static_cast<float>(a.position.x));
    append_le(out, static_cast<float>(a.position.y));
    append_le(out, static_cast<float>(a.position.z));
    append_le(out, static_cast<std::int32_t>(a.channel));
  }
  return out;
}

std::vector<std::byte> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<char> raw((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  std::vector<std::byte> out(raw.size());
  std::memcpy(out.data(), raw.data(), raw.size());
  return out;
}

Molecule load_structure(const std::string& path, const RadiusTable& radii) {
  const auto bytes = read_file_bytes(path);
  try {
    Molecule m = parse_structure(bytes, format_for_path(path), radii);
    if (m.name.empty()) m.name = path;
    return m;
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace voxscore
