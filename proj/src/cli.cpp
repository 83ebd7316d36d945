#include "voxscore/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "voxscore/evalkit.hpp"
#include "voxscore/gridgen.hpp"
#include "voxscore/maskviz.hpp"
#include "voxscore/moldata.hpp"
#include "voxscore/tensornet.hpp"
#include "voxscore/training.hpp"

namespace voxscore::cli {

namespace {

namespace fs = std::filesystem;

class UsageError : public Error {
 public:
  using Error::Error;
};

constexpr const char* kStructureGrammar =
    "Structure text format: optional 'molecule <name>' line, then one atom per line:\n"
    "  <element> <x> <y> <z> ligand [aromatic] [donor] [acceptor] [hydrophobe] [frag=a,b]\n"
    "  <element> <x> <y> <z> receptor <residue_id> [flags...]\n"
    "Files ending in .gninatypes hold 16-byte records: float x, y, z, int32 type.\n";

constexpr const char* kIndexGrammar =
    "Index format, one pose per line ('#' comments):\n"
    "  <label 1|0> <rmsd|-> <target> <cluster> <CSAR|DUDE> <receptor> <ligand> [vina_rank]\n"
    "Paths are relative to the index file.\n";

constexpr const char* kConfigGrammar =
    "Config format: 'key = value' lines. Keys: batch_size base_lr momentum lr_policy\n"
    "power gamma weight_decay dropout_ratio iterations seed max_translate rotate\n"
    "test_interval source_ratio dimension resolution radius_multiplier occupancy scheme\n"
    "radius_table conv_widths pool_mode pool_kernel hidden_units.\n";

constexpr const char* kScoresGrammar =
    "Scores format: '<target> <ligand> <pose_rank|-> <rmsd|-> <label> <score>' per line.\n";

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

void add_common(CLI::App* cmd, Common& c, bool with_seed) {
  cmd->add_option("--config", c.config_path, "key=value configuration file");
  cmd->add_option("--set", c.overrides, "override one key, e.g. --set base_lr=0.02");
  if (with_seed) cmd->add_option("--seed", c.seed, "random seed (default 0)");
  cmd->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
}

ExperimentConfig load_config(const Common& c) {
  ExperimentConfig cfg = c.config_path.empty() ? ExperimentConfig{}
                                               : ExperimentConfig::load(c.config_path);
  try {
    for (const auto& kv : c.overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw InvalidArgument("--set expects key=value, got '" + kv + "'");
      }
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (c.seed) cfg.solver.seed = *c.seed;
    cfg.solver.validate();
    cfg.grid.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

std::string read_text(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  return std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

void write_bytes(const std::string& path, const void* data, std::size_t size) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out) throw DataError("cannot write '" + path + "'");
}

void write_text(const std::string& path, const std::string& text) {
  write_bytes(path, text.data(), text.size());
}

void write_bytes(const std::string& path, const std::vector<std::byte>& bytes) {
  write_bytes(path, bytes.data(), bytes.size());
}

DatasetIndex load_index_absolute(const std::string& path) {
  DatasetIndex idx = DatasetIndex::load(path);
  std::vector<PoseRecord> records = idx.records();
  for (auto& r : records) {
    r.receptor_ref = fs::absolute(r.receptor_ref).lexically_normal().string();
    r.ligand_ref = fs::absolute(r.ligand_ref).lexically_normal().string();
  }
  return DatasetIndex(std::move(records));
}

std::vector<std::size_t> all_rows(const DatasetIndex& idx) {
  std::vector<std::size_t> rows(idx.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return rows;
}

Vec3 parse_center(const std::string& s) {
  std::stringstream ss(s);
  std::array<double, 3> v{};
  std::string item;
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(ss, item, ',')) throw UsageError("--center expects x,y,z");
    try {
      std::size_t used = 0;
      v[i] = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--center expects x,y,z");
    }
  }
  if (std::getline(ss, item, ',')) throw UsageError("--center expects x,y,z");
  return {v[0], v[1], v[2]};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"voxscore: voxel grid CNN scoring of protein-ligand poses"};
  app.name("voxscore");
  app.require_subcommand(1);
  app.footer(std::string(kStructureGrammar) + kIndexGrammar + kConfigGrammar + kScoresGrammar);

  Common common;

  // gridify
  auto* gridify = app.add_subcommand("gridify", "voxelize one complex into a grid dump");
  std::string g_receptor, g_ligand, g_out, g_center;
  bool g_augment = false;
  gridify->add_option("--receptor", g_receptor, "receptor structure")->required();
  gridify->add_option("--ligand", g_ligand, "ligand structure")->required();
  gridify->add_option("--out", g_out, "output grid dump")->required();
  gridify->add_option("--center", g_center, "grid center x,y,z (default: ligand centroid)");
  gridify->add_flag("--augment", g_augment, "apply a random rotation and translation");
  add_common(gridify, common, true);
  gridify->footer(std::string(kStructureGrammar) +
                  "Grid dump: 'VXGD', u32 side, u32 channels, f32 resolution, then "
                  "channel-major f32 values, little-endian.\n");

  // folds
  auto* folds = app.add_subcommand("folds", "split an index into cluster-atomic folds");
  std::string f_index, f_out;
  int f_k = 3;
  folds->add_option("--index", f_index, "dataset index")->required();
  folds->add_option("--k", f_k, "number of folds")->check(CLI::PositiveNumber);
  folds->add_option("--out", f_out, "output directory")->required();
  folds->footer(std::string(kIndexGrammar) +
                "Writes fold<i>.txt in index format with absolute paths.\n");

  // train
  auto* train_cmd = app.add_subcommand("train", "train a model on an index");
  std::string t_index, t_out, t_trace;
  std::optional<int> t_fold;
  int t_k = 3;
  train_cmd->add_option("--index", t_index, "dataset index")->required();
  train_cmd->add_option("--fold", t_fold, "hold out this fold for testing");
  train_cmd->add_option("--k", t_k, "number of folds for --fold")->check(CLI::PositiveNumber);
  train_cmd->add_option("--out", t_out, "output checkpoint")->required();
  train_cmd->add_option("--trace", t_trace, "training trace output (tab-separated)");
  add_common(train_cmd, common, true);
  train_cmd->footer(std::string(kIndexGrammar) + kConfigGrammar);

  // score
  auto* score_cmd = app.add_subcommand("score", "score every pose of an index");
  std::string s_index, s_model, s_out;
  score_cmd->add_option("--index", s_index, "dataset index")->required();
  score_cmd->add_option("--model", s_model, "checkpoint")->required();
  score_cmd->add_option("--out", s_out, "output scores file")->required();
  add_common(score_cmd, common, false);
  score_cmd->footer(std::string(kIndexGrammar) + kScoresGrammar);

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "AUC, top-N and correlation report");
  std::string e_scores, e_compare, e_mode = "multi", e_out, e_roc;
  int e_trials = 2000;
  eval_cmd->add_option("--scores", e_scores, "scores file")->required();
  eval_cmd->add_option("--compare", e_compare, "second scores file for correlation");
  eval_cmd->add_option("--mode", e_mode, "ligand pooling: single or multi")
      ->check(CLI::IsMember({"single", "multi"}));
  eval_cmd->add_option("--trials", e_trials, "random baseline trials")
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--out", e_out, "report file (default: stdout)");
  eval_cmd->add_option("--roc", e_roc, "write pose-level ROC points");
  add_common(eval_cmd, common, true);
  eval_cmd->footer(kScoresGrammar);

  // rank
  auto* rank_cmd = app.add_subcommand("rank", "per-target pose lists by descending score");
  std::string r_scores, r_out;
  rank_cmd->add_option("--scores", r_scores, "scores file")->required();
  rank_cmd->add_option("--out", r_out, "output file (default: stdout)");
  rank_cmd->footer(kScoresGrammar);

  // visualize
  auto* vis_cmd = app.add_subcommand("visualize", "masking attribution for one complex");
  std::string v_receptor, v_ligand, v_model, v_fragments, v_out_ligand, v_out_receptor,
      v_report;
  vis_cmd->add_option("--receptor", v_receptor, "receptor structure")->required();
  vis_cmd->add_option("--ligand", v_ligand, "ligand structure")->required();
  vis_cmd->add_option("--model", v_model, "checkpoint")->required();
  vis_cmd->add_option("--fragments", v_fragments, "fragment file: '<id>: <atom indices>'");
  vis_cmd->add_option("--out-ligand", v_out_ligand, "colored ligand output")->required();
  vis_cmd->add_option("--out-receptor", v_out_receptor, "colored receptor output");
  vis_cmd->add_option("--report", v_report, "delta report output");
  add_common(vis_cmd, common, false);
  vis_cmd->footer(std::string(kStructureGrammar) +
                  "Fragment file: one '<fragment_id>: <i> <j> ...' line per fragment, "
                  "0-based ligand atom indices.\n"
                  "Colored output: fixed-column ATOM/HETATM records, score in columns "
                  "61-66.\n");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gridify) {
      const ExperimentConfig cfg = load_config(common);
      const Molecule rec = assign_types(load_structure(g_receptor, cfg.radii), cfg.grid.scheme);
      const Molecule lig = assign_types(load_structure(g_ligand, cfg.radii), cfg.grid.scheme);
      const Vec3 center = g_center.empty() ? molecule_center(lig) : parse_center(g_center);
      Transform t = Transform::identity();
      if (g_augment) {
        Rng rng(cfg.solver.seed);
        t = sample_transform(rng, cfg.solver.max_translate, cfg.solver.rotate);
      }
      write_bytes(g_out, write_grid_dump(voxelize(rec, lig, center, cfg.grid, t)));
    } else if (*folds) {
      const DatasetIndex idx = load_index_absolute(f_index);
      FoldAssignment fa;
      try {
        fa = make_folds(idx, f_k);
      } catch (const InvalidArgument& e) {
        throw DataError(e.what());
      }
      for (std::size_t f = 0; f < fa.folds.size(); ++f) {
        write_text((fs::path(f_out) / ("fold" + std::to_string(f) + ".txt")).string(),
                   idx.subset(fa.folds[f]).format());
      }
      out << fa.folds.size() << " folds written to " << f_out << '\n';
    } else if (*train_cmd) {
      const ExperimentConfig cfg = load_config(common);
      const DatasetIndex idx = DatasetIndex::load(t_index);
      std::vector<std::size_t> train_rows, test_rows;
      if (t_fold) {
        if (*t_fold < 0 || *t_fold >= t_k) throw UsageError("--fold must be in [0, k)");
        FoldAssignment fa;
        try {
          fa = make_folds(idx, t_k);
        } catch (const InvalidArgument& e) {
          throw DataError(e.what());
        }
        for (std::size_t i = 0; i < idx.size(); ++i) {
          (fa.fold_of[i] == *t_fold ? test_rows : train_rows).push_back(i);
        }
      } else {
        train_rows = all_rows(idx);
      }
      StructureStore store(cfg.grid.scheme, cfg.radii);
      TrainResult result;
      try {
        result = train(idx, train_rows, test_rows, store, cfg);
      } catch (const InvalidArgument& e) {
        throw DataError(e.what());
      }
      write_bytes(t_out, save_checkpoint(cfg.network(), result.weights));
      const std::string trace = format_trace(result.trace);
      if (!t_trace.empty()) write_text(t_trace, trace); else out << trace;
    } else if (*score_cmd) {
      const ExperimentConfig cfg = load_config(common);
      const DatasetIndex idx = DatasetIndex::load(s_index);
      const NetworkSpec spec = cfg.network();
      const auto ck = read_file_bytes(s_model);
      const WeightSet weights = load_checkpoint(spec, ck);
      StructureStore store(cfg.grid.scheme, cfg.radii);
      const auto rows = all_rows(idx);
      const auto scores =
          score_records(spec, weights, idx, rows, store, cfg.grid, common.threads);
      write_text(s_out, format_scores(scored_examples(idx, rows, scores)));
    } else if (*eval_cmd) {
      EvaluationOptions opt;
      opt.mode = e_mode == "single" ? PoseMode::Single : PoseMode::Multi;
      opt.trials = e_trials;
      opt.seed = common.seed.value_or(0);
      const auto examples = load_scores(e_scores);
      std::vector<ScoredExample> compare;
      if (!e_compare.empty()) compare = load_scores(e_compare);
      std::string report;
      try {
        report = evaluation_report(examples, opt, compare);
        if (!e_roc.empty()) write_text(e_roc, format_roc_points(roc_auc(examples)));
      } catch (const InvalidArgument& e) {
        throw DataError(e.what());
      }
      if (!e_out.empty()) write_text(e_out, report); else out << report;
    } else if (*rank_cmd) {
      const std::string lists = ranked_pose_lists(load_scores(r_scores));
      if (!r_out.empty()) write_text(r_out, lists); else out << lists;
    } else if (*vis_cmd) {
      const ExperimentConfig cfg = load_config(common);
      const NetworkSpec spec = cfg.network();
      const auto ck = read_file_bytes(v_model);
      const WeightSet weights = load_checkpoint(spec, ck);
      const Molecule rec = assign_types(load_structure(v_receptor, cfg.radii), cfg.grid.scheme);
      Molecule lig = assign_types(load_structure(v_ligand, cfg.radii), cfg.grid.scheme);
      if (!v_fragments.empty()) apply_fragment_file(lig, read_text(v_fragments));
      const auto ctx = MaskContext::make(spec, weights, rec, lig, cfg.grid, common.threads);
      const MaskReport report = mask_report(ctx, !v_out_receptor.empty() || !v_report.empty());
      std::vector<double> lig_scores;
      for (const auto& a : report.atoms) lig_scores.push_back(a.final_score);
      std::size_t clamped = 0;
      write_text(v_out_ligand, write_colored_structure(lig, lig_scores, &clamped));
      std::size_t total_clamped = clamped;
      if (!v_out_receptor.empty()) {
        const auto rec_scores = residue_scores_to_atoms(rec, report.residues);
        write_text(v_out_receptor, write_colored_structure(rec, rec_scores, &clamped));
        total_clamped += clamped;
      }
      if (!v_report.empty()) write_text(v_report, format_mask_report(report, lig));
      if (total_clamped > 0) {
        err << "warning: " << total_clamped << " scores clamped to +/-"
            << kTemperatureFactorLimit << '\n';
      }
      out << "original_score " << report.original_score << '\n';
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  }
  return kExitOk;
}

}  // namespace voxscore::cli
