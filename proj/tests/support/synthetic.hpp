#pragma once

// Small synthetic pose sets for learning and masking tests.

#include <cstdint>
#include <string>
#include <vector>

#include "voxscore/training.hpp"

namespace voxtest {

using namespace voxscore;

/// Untyped molecule of carbons at the given positions.
Molecule carbons(const std::vector<Vec3>& positions, Role role,
                 const std::string& residue_prefix = "R");

/// Grid, model and solver settings for the toy problems: binary2 channels,
/// a 16 Å box at 1 Å (16³ points) and conv widths 4, 8, 16.
ExperimentConfig toy_config();

struct SyntheticSet {
  DatasetIndex index;
  StructureStore store;
};

/// One receptor cluster per complex. Positives put a single ligand atom
/// 3.6 Å from a receptor atom; negatives move that atom a further 6 Å away
/// from the cluster. Records alternate positive, negative; each complex is
/// its own target and cluster, with its own receptor.
SyntheticSet make_synthetic_set(int complexes, std::uint64_t seed,
                                const AtomTypeScheme& scheme);

}  // namespace voxtest
