#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "voxscore/maskviz.hpp"
#include "voxscore/training.hpp"

namespace voxscore {

double score_complex(const NetworkSpec& spec, const WeightSet& weights,
                     const Molecule& receptor, const Molecule& ligand,
                     const GridConfig& grid, const Vec3& center) {
  const DensityGrid g = voxelize(receptor, ligand, center, grid, Transform::identity());
  return forward(spec, weights, grid_tensor(g), Mode::Test)[1];
}

double score_complex(const NetworkSpec& spec, const WeightSet& weights,
                     const Molecule& receptor, const Molecule& ligand,
                     const GridConfig& grid) {
  return score_complex(spec, weights, receptor, ligand, grid, molecule_center(ligand));
}

MaskContext MaskContext::make(const NetworkSpec& spec, const WeightSet& weights,
                              const Molecule& receptor, const Molecule& ligand,
                              const GridConfig& grid, int threads) {
  MaskContext ctx;
  ctx.spec = &spec;
  ctx.weights = &weights;
  ctx.receptor = &receptor;
  ctx.ligand = &ligand;
  ctx.grid = grid;
  ctx.center = molecule_center(ligand);
  ctx.threads = threads;
  return ctx;
}

double MaskContext::original_score() const {
  return score_complex(*spec, *weights, *receptor, *ligand, grid, center);
}

namespace {

Molecule without(const Molecule& mol, const std::vector<std::uint8_t>& drop) {
  Molecule out;
  out.role = mol.role;
  out.name = mol.name;
  out.typed_with = mol.typed_with;
  for (std::size_t i = 0; i < mol.atoms.size(); ++i) {
    if (!drop[i]) out.atoms.push_back(mol.atoms[i]);
  }
  return out;
}

void check_context(const MaskContext& ctx) {
  if (!ctx.spec || !ctx.weights || !ctx.receptor || !ctx.ligand) {
    throw InvalidArgument("mask context is incomplete");
  }
}

}  // namespace

std::vector<double> atom_removal_scores(const MaskContext& ctx) {
  check_context(ctx);
  const Molecule& lig = *ctx.ligand;
  if (lig.empty()) throw InvalidArgument("atom removal needs a nonempty ligand");
  const double original = ctx.original_score();
  std::vector<double> deltas(lig.size());
  parallel_for(lig.size(), ctx.threads, [&](std::size_t i) {
    std::vector<std::uint8_t> drop(lig.size(), 0);
    drop[i] = 1;
    deltas[i] = original - score_complex(*ctx.spec, *ctx.weights, *ctx.receptor,
                                         without(lig, drop), ctx.grid, ctx.center);
  });
  return deltas;
}

std::vector<Fragment> ligand_fragments(const Molecule& ligand) {
  std::vector<Fragment> out;
  std::map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < ligand.atoms.size(); ++i) {
    for (const auto& id : ligand.atoms[i].fragment_ids) {
      auto [it, inserted] = slot.emplace(id, out.size());
      if (inserted) out.push_back({id, {}});
      auto& atoms = out[it->second].atoms;
      if (atoms.empty() || atoms.back() != i) atoms.push_back(i);
    }
  }
  return out;
}

std::optional<FragmentScores> fragment_removal_scores(const MaskContext& ctx) {
  check_context(ctx);
  const Molecule& lig = *ctx.ligand;
  const auto fragments = ligand_fragments(lig);
  if (fragments.empty()) return std::nullopt;
  const double original = ctx.original_score();

  FragmentScores out;
  out.fragment_delta.resize(fragments.size());
  parallel_for(fragments.size(), ctx.threads, [&](std::size_t f) {
    std::vector<std::uint8_t> drop(lig.size(), 0);
    for (auto a : fragments[f].atoms) drop[a] = 1;
    const double s = score_complex(*ctx.spec, *ctx.weights, *ctx.receptor, without(lig, drop),
                                   ctx.grid, ctx.center);
    out.fragment_delta[f] = (original - s) / static_cast<double>(fragments[f].atoms.size());
  });

  std::vector<double> sum(lig.size(), 0.0);
  std::vector<int> count(lig.size(), 0);
  for (std::size_t f = 0; f < fragments.size(); ++f) {
    for (auto a : fragments[f].atoms) {
      sum[a] += out.fragment_delta[f];
      ++count[a];
    }
  }
  out.atom_delta.resize(lig.size());
  for (std::size_t a = 0; a < lig.size(); ++a) {
    if (count[a] > 0) out.atom_delta[a] = sum[a] / count[a];
  }
  return out;
}

std::vector<ResidueDelta> residue_removal_scores(const MaskContext& ctx) {
  check_context(ctx);
  const Molecule& rec = *ctx.receptor;
  std::vector<ResidueDelta> out;
  std::vector<std::vector<std::size_t>> members;
  std::map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < rec.atoms.size(); ++i) {
    auto [it, inserted] = slot.emplace(rec.atoms[i].residue_id, out.size());
    if (inserted) {
      out.push_back({rec.atoms[i].residue_id, 0, 0.0});
      members.emplace_back();
    }
    members[it->second].push_back(i);
    ++out[it->second].atoms;
  }
  const double original = ctx.original_score();
  parallel_for(out.size(), ctx.threads, [&](std::size_t r) {
    std::vector<std::uint8_t> drop(rec.size(), 0);
    for (auto a : members[r]) drop[a] = 1;
    out[r].delta = original - score_complex(*ctx.spec, *ctx.weights, without(rec, drop),
                                            *ctx.ligand, ctx.grid, ctx.center);
  });
  return out;
}

MaskReport mask_report(const MaskContext& ctx, bool residues) {
  MaskReport report;
  report.original_score = ctx.original_score();
  const auto individual = atom_removal_scores(ctx);
  const auto fragments = fragment_removal_scores(ctx);
  report.atoms.resize(individual.size());
  for (std::size_t i = 0; i < individual.size(); ++i) {
    AtomMask& m = report.atoms[i];
    m.individual_delta = individual[i];
    if (fragments) m.fragment_delta = fragments->atom_delta[i];
    m.final_score = m.fragment_delta ? (m.individual_delta + *m.fragment_delta) / 2.0
                                     : m.individual_delta;
  }
  if (residues) report.residues = residue_removal_scores(ctx);
  return report;
}

std::string format_mask_report(const MaskReport& report, const Molecule& ligand) {
  if (report.atoms.size() != ligand.size()) {
    throw InvalidArgument("mask report does not match the ligand");
  }
  std::ostringstream out;
  out.precision(9);
  out << "original_score\t" << report.original_score << '\n';
  out << "kind\tindex\tid\tindividual_delta\tfragment_delta\tfinal_score\n";
  for (std::size_t i = 0; i < report.atoms.size(); ++i) {
    const AtomMask& m = report.atoms[i];
    out << "atom\t" << i << '\t' << ligand.atoms[i].element << '\t' << m.individual_delta
        << '\t';
    if (m.fragment_delta) out << *m.fragment_delta; else out << '-';
    out << '\t' << m.final_score << '\n';
  }
  for (std::size_t r = 0; r < report.residues.size(); ++r) {
    const ResidueDelta& d = report.residues[r];
    out << "residue\t" << r << '\t' << d.residue_id << '\t' << d.delta << "\t-\t" << d.delta
        << '\n';
  }
  return out.str();
}

void apply_fragment_file(Molecule& ligand, std::string_view text) {
  for (auto& a : ligand.atoms) a.fragment_ids.clear();
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "fragment line " + std::to_string(lineno) + ": ";
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw DataError(where + "expected 'id: atom indices'");
    std::istringstream idin(line.substr(0, colon));
    std::string id, extra;
    if (!(idin >> id) || (idin >> extra)) throw DataError(where + "bad fragment id");
    std::istringstream rest(line.substr(colon + 1));
    std::size_t n = 0;
    for (std::string tok; rest >> tok; ++n) {
      std::size_t idx = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), idx);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw DataError(where + "bad atom index '" + tok + "'");
      }
      if (idx >= ligand.size()) {
        throw DataError(where + "fragment " + id + " references unknown atom " + tok +
                        " (ligand has " + std::to_string(ligand.size()) + " atoms)");
      }
      auto& ids = ligand.atoms[idx].fragment_ids;
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
    }
    if (n == 0) throw DataError(where + "fragment " + id + " has no atoms");
  }
}

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void join(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

std::vector<Fragment> fragments_from_bonds(
    std::size_t atom_count, std::span<const std::pair<std::size_t, std::size_t>> bonds,
    std::span<const std::size_t> cut_bonds) {
  std::vector<std::uint8_t> is_cut(bonds.size(), 0);
  for (auto c : cut_bonds) {
    if (c >= bonds.size()) throw InvalidArgument("cut bond index out of range");
    is_cut[c] = 1;
  }
  for (const auto& [a, b] : bonds) {
    if (a >= atom_count || b >= atom_count) throw InvalidArgument("bond references unknown atom");
  }
  for (auto c : cut_bonds) {
    DisjointSets ds(atom_count);
    for (std::size_t i = 0; i < bonds.size(); ++i) {
      if (i != c) ds.join(bonds[i].first, bonds[i].second);
    }
    if (ds.find(bonds[c].first) == ds.find(bonds[c].second)) {
      throw InvalidArgument("bond " + std::to_string(c) + " lies in a ring and cannot be cut");
    }
  }
  DisjointSets ds(atom_count);
  for (std::size_t i = 0; i < bonds.size(); ++i) {
    if (!is_cut[i]) ds.join(bonds[i].first, bonds[i].second);
  }
  std::vector<Fragment> out;
  std::map<std::size_t, std::size_t> slot;
  for (std::size_t a = 0; a < atom_count; ++a) {
    auto [it, inserted] = slot.emplace(ds.find(a), out.size());
    if (inserted) out.push_back({"f" + std::to_string(out.size()), {}});
    out[it->second].atoms.push_back(a);
  }
  return out;
}

namespace {

struct ResidueFields {
  char chain = 'A';
  std::string name = "UNK";
  int number = 0;
};

// Best effort split of ids like "A:HIS57", "HIS57" or "57".
ResidueFields residue_fields(const std::string& id, int ordinal) {
  ResidueFields f;
  f.number = ordinal;
  std::string rest = id;
  if (rest.size() > 2 && rest[1] == ':' && std::isalpha(static_cast<unsigned char>(rest[0]))) {
    f.chain = rest[0];
    rest = rest.substr(2);
  }
  std::size_t digits = rest.size();
  while (digits > 0 && std::isdigit(static_cast<unsigned char>(rest[digits - 1]))) --digits;
  const std::string letters = rest.substr(0, digits);
  const std::string number = rest.substr(digits);
  if (!number.empty() && number.size() <= 4 &&
      std::all_of(letters.begin(), letters.end(),
                  [](unsigned char c) { return std::isalpha(c); })) {
    f.number = std::stoi(number);
    if (!letters.empty()) f.name = letters.substr(0, 3);
  }
  return f;
}

}  // namespace

std::string write_colored_structure(const Molecule& mol, std::span<const double> atom_scores,
                                    std::size_t* clamped) {
  if (atom_scores.size() != mol.size()) {
    throw InvalidArgument("score count " + std::to_string(atom_scores.size()) +
                          " does not match atom count " + std::to_string(mol.size()));
  }
  std::size_t n_clamped = 0;
  std::map<std::string, int> ordinals;
  std::string out;
  char line[96];
  for (std::size_t i = 0; i < mol.size(); ++i) {
    const TypedAtom& a = mol.atoms[i];
    double b = atom_scores[i];
    if (!std::isfinite(b)) throw InvalidArgument("non-finite score for atom " + std::to_string(i));
    if (std::fabs(b) > kTemperatureFactorLimit) {
      b = std::copysign(kTemperatureFactorLimit, b);
      ++n_clamped;
    }
    std::string name = a.element + std::to_string(i + 1);
    if (name.size() > 4) name.resize(4);
    if (a.element.size() == 1 && name.size() < 4) name = " " + name;
    ResidueFields res;
    const bool ligand = a.role == Role::Ligand;
    if (ligand) {
      res = {'L', "LIG", 1};
    } else {
      auto [it, inserted] =
          ordinals.emplace(a.residue_id, static_cast<int>(ordinals.size()) + 1);
      res = residue_fields(a.residue_id, it->second);
    }
    std::string element = a.element;
    for (auto& c : element) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    std::snprintf(line, sizeof line,
                  "%-6s%5d %-4s %3s %c%4d    %8.3f%8.3f%8.3f%6.2f%6.2f          %2s\n",
                  ligand ? "HETATM" : "ATOM", static_cast<int>((i + 1) % 100000), name.c_str(),
                  res.name.c_str(), res.chain, res.number % 10000, a.position.x, a.position.y,
                  a.position.z, 1.0, b, element.c_str());
    out += line;
  }
  out += "END\n";
  if (clamped) *clamped = n_clamped;
  return out;
}

std::vector<double> residue_scores_to_atoms(const Molecule& receptor,
                                            std::span<const ResidueDelta> residues) {
  std::map<std::string, double> by_id;
  for (const auto& r : residues) by_id[r.residue_id] = r.delta;
  std::vector<double> out;
  out.reserve(receptor.size());
  for (const auto& a : receptor.atoms) {
    auto it = by_id.find(a.residue_id);
    if (it == by_id.end()) throw InvalidArgument("no score for residue " + a.residue_id);
    out.push_back(it->second);
  }
  return out;
}

std::vector<double> read_temperature_factors(std::string_view text) {
  std::vector<double> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.rfind("ATOM  ", 0) != 0 && line.rfind("HETATM", 0) != 0) continue;
    if (line.size() < 66) {
      throw DataError("structure line " + std::to_string(lineno) + ": record too short");
    }
    std::string field = line.substr(60, 6);
    field.erase(0, field.find_first_not_of(' '));
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      throw DataError("structure line " + std::to_string(lineno) +
                      ": bad temperature factor '" + field + "'");
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace voxscore
