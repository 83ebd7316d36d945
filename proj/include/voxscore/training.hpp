#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "voxscore/common.hpp"
#include "voxscore/evalkit.hpp"
#include "voxscore/gridgen.hpp"
#include "voxscore/moldata.hpp"
#include "voxscore/tensornet.hpp"

namespace voxscore {

// Labels ---------------------------------------------------------------------

enum class PoseLabel : std::uint8_t { Positive, Negative, Omitted };

/// < 2 Å positive, > 4 Å negative, anything in [2, 4] omitted.
PoseLabel label_pose(double rmsd);

// Dataset index --------------------------------------------------------------

enum class Source : std::uint8_t { Csar, Dude };

std::string_view source_name(Source s);
Source source_from_name(std::string_view s);

struct PoseRecord {
  int label = 0;  // 1 positive, 0 negative
  std::optional<double> rmsd;
  std::string target_id;
  std::string cluster_id;
  Source source = Source::Csar;
  std::string receptor_ref;
  std::string ligand_ref;
  std::optional<int> vina_rank;
};

/// Named groups of record indices in order of first appearance.
using Grouping = std::vector<std::pair<std::string, std::vector<std::size_t>>>;

class DatasetIndex {
 public:
  DatasetIndex() = default;
  explicit DatasetIndex(std::vector<PoseRecord> records);

  /// One record per line: label rmsd|- target cluster source receptor ligand
  /// [vina_rank]. Paths are resolved relative to `base_dir` when given.
  static DatasetIndex parse(std::string_view text, const std::string& base_dir = "");
  static DatasetIndex load(const std::string& path);
  std::string format() const;

  const std::vector<PoseRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  const PoseRecord& operator[](std::size_t i) const { return records_[i]; }

  Grouping by_target() const;
  Grouping by_cluster() const;
  DatasetIndex subset(const std::vector<std::size_t>& rows) const;

 private:
  std::vector<PoseRecord> records_;
};

// Folds ----------------------------------------------------------------------

struct FoldAssignment {
  std::vector<std::vector<std::size_t>> folds;  // record indices per fold
  std::vector<int> fold_of;                      // per record
};

/// Clusters are placed largest first into the currently smallest fold
/// (lowest fold index on ties); cluster ties keep index order.
FoldAssignment make_folds(const DatasetIndex& index, int k);

// Solver configuration -------------------------------------------------------

enum class LrPolicy : std::uint8_t { Inverse, Fixed };

struct SolverConfig {
  int batch_size = 10;
  double base_lr = 0.01;
  double momentum = 0.9;
  LrPolicy lr_policy = LrPolicy::Inverse;
  double power = 1.0;
  double gamma = 0.001;
  double weight_decay = 0.001;
  double dropout_ratio = 0.5;
  long iterations = 10000;
  std::uint64_t seed = 0;
  double max_translate = 2.0;
  bool rotate = true;
  long test_interval = 1000;
  /// Batches drawn from the DUD-E-like and CSAR sources, e.g. {2, 1}.
  /// Unset: all training records form one pool.
  std::optional<std::pair<int, int>> source_ratio;

  void validate() const;
};

/// Everything a flat key=value configuration file can set.
struct ExperimentConfig {
  GridConfig grid;
  ModelOptions model;
  SolverConfig solver;
  RadiusTable radii = RadiusTable::defaults();

  /// Applies one key; throws InvalidArgument for unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  /// Parses "key = value" lines with '#' comments. Relative file values
  /// (radius_table) are resolved against `base_dir`.
  static ExperimentConfig parse(std::string_view text, const std::string& base_dir = "");
  static ExperimentConfig load(const std::string& path);

  NetworkSpec network() const;
};

std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text);

double lr_at(long iter, const SolverConfig& config);

/// v <- momentum*v - lr*(grad + weight_decay*w); w <- w + v. Biases are not
/// decayed. Throws on non-finite gradients.
void sgd_step(WeightSet& weights, const WeightSet& grads, WeightSet& velocity,
              long iter, const SolverConfig& config);

// Sampling -------------------------------------------------------------------

/// Endless shuffled cycle over a fixed set of items; reshuffles each epoch.
class ClassCycler {
 public:
  explicit ClassCycler(std::vector<std::size_t> items);
  std::size_t next(Rng& rng);
  std::size_t size() const { return items_.size(); }

 private:
  std::vector<std::size_t> items_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

struct BatchItem {
  std::size_t record = 0;
  int label = 0;
  Transform transform;
};

/// Class-balanced batch planner over a subset of an index.
class BalancedSampler {
 public:
  BalancedSampler(const DatasetIndex& index, const std::vector<std::size_t>& rows);

  /// batch_size/2 positives and batch_size/2 negatives in shuffled order,
  /// each with a freshly sampled transform.
  std::vector<BatchItem> next_batch(Rng& rng, const SolverConfig& config);

 private:
  ClassCycler positives_;
  ClassCycler negatives_;
};

/// Deterministic a:b interleaving: in every cycle of a+b draws the first a
/// come from stream 0 and the next b from stream 1.
class SourceMixer {
 public:
  SourceMixer(int ratio_a, int ratio_b);
  int next();

 private:
  int a_;
  int b_;
  long count_ = 0;
};

/// Draws `draws` items alternating between two nonempty streams at a:b.
template <typename T>
std::vector<T> mix_sources(const std::vector<T>& a, const std::vector<T>& b,
                           int ratio_a, int ratio_b, std::size_t draws) {
  if ((ratio_a > 0 && a.empty()) || (ratio_b > 0 && b.empty())) {
    throw InvalidArgument("mix_sources: empty stream");
  }
  SourceMixer mixer(ratio_a, ratio_b);
  std::vector<T> out;
  out.reserve(draws);
  std::size_t ia = 0, ib = 0;
  for (std::size_t i = 0; i < draws; ++i) {
    if (mixer.next() == 0) {
      out.push_back(a[ia++ % a.size()]);
    } else {
      out.push_back(b[ib++ % b.size()]);
    }
  }
  return out;
}

// Structures and examples ----------------------------------------------------

/// Typed molecules keyed by reference (file path). Files are loaded on first
/// use; in-memory molecules can be registered directly.
class StructureStore {
 public:
  explicit StructureStore(AtomTypeScheme scheme = AtomTypeScheme(),
                          RadiusTable radii = RadiusTable::defaults());

  void add(const std::string& ref, Molecule mol);
  const Molecule& get(const std::string& ref);
  const AtomTypeScheme& scheme() const { return scheme_; }

 private:
  AtomTypeScheme scheme_;
  RadiusTable radii_;
  std::map<std::string, Molecule> cache_;
};

/// Grid for one record, centered on its ligand.
DensityGrid example_grid(StructureStore& store, const PoseRecord& record,
                         const GridConfig& grid, const Transform& transform);
Tensor grid_tensor(const DensityGrid& grid);

struct LabeledGrid {
  Tensor grid;
  int label = 0;
  std::size_t record = 0;
};

std::vector<LabeledGrid> next_batch(Rng& rng, BalancedSampler& sampler,
                                    const DatasetIndex& index, StructureStore& store,
                                    const ExperimentConfig& config);

// Training -------------------------------------------------------------------

struct TraceRow {
  long iteration = 0;
  double learning_rate = 0.0;
  double mean_loss = 0.0;  // mean batch loss since the previous row
  double train_auc = 0.0;  // NaN when undefined
  double test_auc = 0.0;   // NaN when there is no held-out set
};

struct TrainResult {
  WeightSet weights;
  std::vector<TraceRow> trace;
};

/// Positive-class probability of every listed record, identity transform.
/// Structures are loaded up front; scoring fans out over `threads`.
std::vector<double> score_records(const NetworkSpec& spec, const WeightSet& weights,
                                  const DatasetIndex& index,
                                  const std::vector<std::size_t>& rows,
                                  StructureStore& store, const GridConfig& grid,
                                  int threads = 1);

/// Scores joined with their records: ligand_id is the ligand reference and
/// pose_rank the record's vina_rank.
std::vector<ScoredExample> scored_examples(const DatasetIndex& index,
                                           const std::vector<std::size_t>& rows,
                                           const std::vector<double>& scores);

/// Runs config.solver.iterations SGD steps on `train_rows`; AUC on
/// `train_rows` and `test_rows` is logged every test_interval iterations.
TrainResult train(const DatasetIndex& index, const std::vector<std::size_t>& train_rows,
                  const std::vector<std::size_t>& test_rows, StructureStore& store,
                  const ExperimentConfig& config);

std::string format_trace(const std::vector<TraceRow>& trace);

}  // namespace voxscore
