#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "voxscore/common.hpp"

namespace voxscore {

struct ScoredExample {
  double score = 0.0;
  int label = 0;
  std::string target_id;
  std::string ligand_id;
  std::optional<int> pose_rank;
  std::optional<double> rmsd;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocResult {
  std::vector<RocPoint> curve;  // (0,0) ... (1,1)
  double auc = 0.0;
};

/// ROC curve and trapezoidal AUC. Tied scores form one diagonal segment, so
/// the area equals P(pos > neg) + P(tie)/2. Requires both classes.
RocResult roc_auc(std::span<const double> scores, std::span<const int> labels);
RocResult roc_auc(std::span<const ScoredExample> examples);

struct TargetAuc {
  std::string target_id;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::optional<double> auc;  // absent when a class is missing
};

/// roc_auc applied to each target's examples, in order of first appearance.
std::vector<TargetAuc> per_target_auc(std::span<const ScoredExample> examples);

using TargetGroups = std::vector<std::vector<ScoredExample>>;

TargetGroups group_by_target(std::span<const ScoredExample> examples);

inline constexpr double kGoodPoseRmsd = 2.0;

/// Fraction of targets with a pose under 2 Å among their n best-scored poses.
/// Score ties keep input order.
double intra_target_topn(const TargetGroups& groups, int n);

struct BaselineStats {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Top-n success fraction when each target's poses are ranked at random.
BaselineStats random_baseline(const TargetGroups& groups, int n, int trials, Rng& rng);

enum class PoseMode : std::uint8_t { Single, Multi };

/// One example per (target, ligand): the rank-1 pose's score (single) or the
/// best score over poses (multi). The ligand is positive if any pose is.
std::vector<ScoredExample> pool_ligand_scores(std::span<const ScoredExample> poses,
                                              PoseMode mode);

double pearson(std::span<const double> x, std::span<const double> y);

inline constexpr double kLogitClamp = 1e-7;

struct LogitValue {
  double value = 0.0;
  bool clamped = false;
};

/// ln(p / (1 - p)) with p clamped into [1e-7, 1 - 1e-7].
LogitValue logit(double p);

/// Scores file: "target ligand pose_rank|- rmsd|- label score" per line.
std::vector<ScoredExample> parse_scores(std::string_view text);
std::vector<ScoredExample> load_scores(const std::string& path);
std::string format_scores(std::span<const ScoredExample> examples);

std::string format_roc_points(const RocResult& roc);

struct EvaluationOptions {
  PoseMode mode = PoseMode::Multi;
  int trials = 2000;
  std::uint64_t seed = 0;
  std::vector<int> top_n{1, 3, 5};
};

/// Tab-separated "metric value" report: pose and ligand AUC, per-target AUC,
/// top-n with random baselines (when rmsd is present), correlations.
std::string evaluation_report(std::span<const ScoredExample> examples,
                              const EvaluationOptions& options,
                              std::span<const ScoredExample> compare = {});

/// Per-target pose lists sorted by descending score (stable).
std::string ranked_pose_lists(std::span<const ScoredExample> examples);

}  // namespace voxscore
