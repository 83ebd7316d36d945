#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "voxscore/gridgen.hpp"
#include "voxscore/moldata.hpp"
#include "voxscore/tensornet.hpp"

namespace voxscore {

/// Positive-class probability with the identity transform in test mode.
double score_complex(const NetworkSpec& spec, const WeightSet& weights,
                     const Molecule& receptor, const Molecule& ligand,
                     const GridConfig& grid, const Vec3& center);
/// Same, centered on the ligand.
double score_complex(const NetworkSpec& spec, const WeightSet& weights,
                     const Molecule& receptor, const Molecule& ligand,
                     const GridConfig& grid);

/// Everything a removal experiment needs. The grid center stays fixed for
/// every rescoring, so removing an atom never moves the box.
struct MaskContext {
  const NetworkSpec* spec = nullptr;
  const WeightSet* weights = nullptr;
  const Molecule* receptor = nullptr;
  const Molecule* ligand = nullptr;
  GridConfig grid;
  Vec3 center;
  int threads = 1;

  static MaskContext make(const NetworkSpec& spec, const WeightSet& weights,
                          const Molecule& receptor, const Molecule& ligand,
                          const GridConfig& grid, int threads = 1);
  double original_score() const;
};

/// delta_a = S_original - S(complex without ligand atom a), per ligand atom.
std::vector<double> atom_removal_scores(const MaskContext& ctx);

struct Fragment {
  std::string id;
  std::vector<std::size_t> atoms;  // ligand atom indices
};

/// Fragments from the ligand's per-atom annotations, in order of first use.
std::vector<Fragment> ligand_fragments(const Molecule& ligand);

struct FragmentScores {
  std::vector<double> fragment_delta;            // per fragment, size-normalized
  std::vector<std::optional<double>> atom_delta;  // mean over containing fragments
};

/// Empty optional when the ligand has no fragment annotations.
std::optional<FragmentScores> fragment_removal_scores(const MaskContext& ctx);

struct ResidueDelta {
  std::string residue_id;
  std::size_t atoms = 0;
  double delta = 0.0;
};

/// Whole-residue removals, each rescored from the original complex with the
/// ligand present. Residues in order of first appearance.
std::vector<ResidueDelta> residue_removal_scores(const MaskContext& ctx);

struct AtomMask {
  double individual_delta = 0.0;
  std::optional<double> fragment_delta;
  double final_score = 0.0;
};

struct MaskReport {
  double original_score = 0.0;
  std::vector<AtomMask> atoms;  // per ligand atom
  std::vector<ResidueDelta> residues;
};

/// final_score = (individual + fragment)/2, or individual when the atom is in
/// no fragment.
MaskReport mask_report(const MaskContext& ctx, bool residues = true);

/// Tab-separated report of every delta.
std::string format_mask_report(const MaskReport& report, const Molecule& ligand);

/// Annotation file: "fragment_id: i j k ..." per line, 0-based ligand atom
/// indices in file order. Replaces existing fragment annotations.
void apply_fragment_file(Molecule& ligand, std::string_view text);

/// Components left after cutting the marked bonds. Each cut bond must be
/// acyclic (a bridge of the bond graph).
std::vector<Fragment> fragments_from_bonds(std::size_t atom_count,
                                           std::span<const std::pair<std::size_t, std::size_t>> bonds,
                                           std::span<const std::size_t> cut_bonds);

inline constexpr double kTemperatureFactorLimit = 99.99;

/// Fixed-column ATOM/HETATM records with the per-atom score in the
/// temperature-factor column (61-66, two decimals, clamped to ±99.99).
/// `clamped` receives the number of clamped values.
std::string write_colored_structure(const Molecule& mol, std::span<const double> atom_scores,
                                    std::size_t* clamped = nullptr);
/// Spreads per-residue deltas onto receptor atoms.
std::vector<double> residue_scores_to_atoms(const Molecule& receptor,
                                            std::span<const ResidueDelta> residues);
/// Temperature-factor column of every ATOM/HETATM record.
std::vector<double> read_temperature_factors(std::string_view text);

}  // namespace voxscore
