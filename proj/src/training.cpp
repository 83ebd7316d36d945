#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include "voxscore/training.hpp"

namespace voxscore {

namespace {

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

template <typename T>
T parse_value(const std::string& key, const std::string& v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw InvalidArgument("bad value '" + v + "' for " + key);
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw InvalidArgument("bad boolean '" + v + "' for " + key);
}

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (base_dir.empty() || path.empty() || path.front() == '/') return path;
  return (std::filesystem::path(base_dir) / path).string();
}

Grouping group_rows(const std::vector<PoseRecord>& records,
                    std::string PoseRecord::*field) {
  Grouping out;
  std::map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string& key = records[i].*field;
    auto [it, inserted] = slot.emplace(key, out.size());
    if (inserted) out.emplace_back(key, std::vector<std::size_t>{});
    out[it->second].second.push_back(i);
  }
  return out;
}

}  // namespace

PoseLabel label_pose(double rmsd) {
  if (!(rmsd >= 0.0)) throw InvalidArgument("label_pose: rmsd must be >= 0");
  if (rmsd < 2.0) return PoseLabel::Positive;
  if (rmsd > 4.0) return PoseLabel::Negative;
  return PoseLabel::Omitted;
}

std::string_view source_name(Source s) { return s == Source::Csar ? "CSAR" : "DUDE"; }

Source source_from_name(std::string_view s) {
  if (s == "CSAR" || s == "csar") return Source::Csar;
  if (s == "DUDE" || s == "dude" || s == "DUD-E") return Source::Dude;
  throw InvalidArgument("unknown source '" + std::string(s) + "' (CSAR or DUDE)");
}

// DatasetIndex ----------------------------------------------------------------

DatasetIndex::DatasetIndex(std::vector<PoseRecord> records) : records_(std::move(records)) {
  for (const auto& r : records_) {
    if (r.cluster_id.empty()) throw InvalidArgument("record without cluster id");
    if (r.label != 0 && r.label != 1) throw InvalidArgument("record label must be 0 or 1");
    if (r.rmsd) {
      const PoseLabel l = label_pose(*r.rmsd);
      if (l == PoseLabel::Omitted || (l == PoseLabel::Positive) != (r.label == 1)) {
        throw InvalidArgument("record label inconsistent with rmsd " +
                              std::to_string(*r.rmsd));
      }
    }
  }
}

DatasetIndex DatasetIndex::parse(std::string_view text, const std::string& base_dir) {
  std::vector<PoseRecord> records;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto tok = tokens(line);
    if (tok.empty()) continue;
    const std::string where = "index line " + std::to_string(lineno) + ": ";
    if (tok.size() != 7 && tok.size() != 8) {
      throw DataError(where +
                      "expected 'label rmsd target cluster source receptor ligand [rank]'");
    }
    try {
      PoseRecord r;
      r.label = parse_value<int>("label", tok[0]);
      if (tok[1] != "-") r.rmsd = parse_value<double>("rmsd", tok[1]);
      r.target_id = tok[2];
      r.cluster_id = tok[3];
      r.source = source_from_name(tok[4]);
      r.receptor_ref = resolve(base_dir, tok[5]);
      r.ligand_ref = resolve(base_dir, tok[6]);
      if (tok.size() == 8 && tok[7] != "-") r.vina_rank = parse_value<int>("vina_rank", tok[7]);
      records.push_back(std::move(r));
      DatasetIndex check({records.back()});
    } catch (const InvalidArgument& e) {
      throw DataError(where + e.what());
    }
  }
  return DatasetIndex(std::move(records));
}

DatasetIndex DatasetIndex::load(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  const std::string dir = std::filesystem::path(path).parent_path().string();
  try {
    return parse(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                 dir);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string DatasetIndex::format() const {
  std::ostringstream out;
  out.precision(17);
  for (const auto& r : records_) {
    out << r.label << ' ';
    if (r.rmsd) out << *r.rmsd; else out << '-';
    out << ' ' << r.target_id << ' ' << r.cluster_id << ' ' << source_name(r.source) << ' '
        << r.receptor_ref << ' ' << r.ligand_ref;
    if (r.vina_rank) out << ' ' << *r.vina_rank;
    out << '\n';
  }
  return out.str();
}

Grouping DatasetIndex::by_target() const { return group_rows(records_, &PoseRecord::target_id); }
Grouping DatasetIndex::by_cluster() const { return group_rows(records_, &PoseRecord::cluster_id); }

DatasetIndex DatasetIndex::subset(const std::vector<std::size_t>& rows) const {
  std::vector<PoseRecord> out;
  out.reserve(rows.size());
  for (auto i : rows) out.push_back(records_.at(i));
  return DatasetIndex(std::move(out));
}

// Folds -----------------------------------------------------------------------

FoldAssignment make_folds(const DatasetIndex& index, int k) {
  if (k < 1) throw InvalidArgument("make_folds: k must be >= 1");
  auto clusters = index.by_cluster();
  if (clusters.size() < static_cast<std::size_t>(k)) {
    throw InvalidArgument("make_folds: " + std::to_string(clusters.size()) +
                          " clusters cannot fill " + std::to_string(k) + " folds");
  }
  std::stable_sort(clusters.begin(), clusters.end(), [](const auto& a, const auto& b) {
    return a.second.size() > b.second.size();
  });
  FoldAssignment fa;
  fa.folds.resize(static_cast<std::size_t>(k));
  fa.fold_of.assign(index.size(), -1);
  for (const auto& [id, rows] : clusters) {
    std::size_t target = 0;
    for (std::size_t f = 1; f < fa.folds.size(); ++f) {
      if (fa.folds[f].size() < fa.folds[target].size()) target = f;
    }
    for (auto r : rows) {
      fa.folds[target].push_back(r);
      fa.fold_of[r] = static_cast<int>(target);
    }
  }
  for (auto& f : fa.folds) std::sort(f.begin(), f.end());
  return fa;
}

// Configuration -----------------------------------------------------------------

void SolverConfig::validate() const {
  if (batch_size <= 0 || batch_size % 2 != 0) {
    throw InvalidArgument("batch_size must be a positive even number");
  }
  if (!(base_lr > 0.0)) throw InvalidArgument("base_lr must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw InvalidArgument("momentum must be in [0, 1)");
  if (!(power > 0.0)) throw InvalidArgument("power must be positive");
  if (!(gamma >= 0.0)) throw InvalidArgument("gamma must be >= 0");
  if (!(weight_decay >= 0.0)) throw InvalidArgument("weight_decay must be >= 0");
  if (!(dropout_ratio >= 0.0 && dropout_ratio < 1.0)) {
    throw InvalidArgument("dropout_ratio must be in [0, 1)");
  }
  if (iterations < 0) throw InvalidArgument("iterations must be >= 0");
  if (!(max_translate >= 0.0)) throw InvalidArgument("max_translate must be >= 0");
  if (test_interval <= 0) throw InvalidArgument("test_interval must be positive");
  if (source_ratio) {
    const auto [a, b] = *source_ratio;
    if (a < 0 || b < 0 || a + b == 0) throw InvalidArgument("source_ratio must be a:b with a+b > 0");
  }
}

std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (tokens(line).empty()) continue;
      throw DataError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const auto k = tokens(line.substr(0, eq));
    const auto v = tokens(line.substr(eq + 1));
    if (k.size() != 1 || v.size() != 1) {
      throw DataError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    out.emplace_back(k[0], v[0]);
  }
  return out;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  auto& s = solver;
  if (key == "batch_size") {
    s.batch_size = parse_value<int>(key, value);
  } else if (key == "base_lr") {
    s.base_lr = parse_value<double>(key, value);
  } else if (key == "momentum") {
    s.momentum = parse_value<double>(key, value);
  } else if (key == "lr_policy") {
    if (value == "inv" || value == "inverse") {
      s.lr_policy = LrPolicy::Inverse;
    } else if (value == "fixed") {
      s.lr_policy = LrPolicy::Fixed;
    } else {
      throw InvalidArgument("lr_policy must be 'inv' or 'fixed'");
    }
  } else if (key == "power") {
    s.power = parse_value<double>(key, value);
  } else if (key == "gamma") {
    s.gamma = parse_value<double>(key, value);
  } else if (key == "weight_decay") {
    s.weight_decay = parse_value<double>(key, value);
  } else if (key == "dropout_ratio") {
    s.dropout_ratio = parse_value<double>(key, value);
    model.dropout_ratio = s.dropout_ratio;
  } else if (key == "iterations" || key == "max_iter") {
    s.iterations = parse_value<long>(key, value);
  } else if (key == "seed" || key == "random_seed") {
    s.seed = parse_value<std::uint64_t>(key, value);
  } else if (key == "max_translate") {
    s.max_translate = parse_value<double>(key, value);
  } else if (key == "rotate") {
    s.rotate = parse_bool(key, value);
  } else if (key == "test_interval") {
    s.test_interval = parse_value<long>(key, value);
  } else if (key == "source_ratio") {
    const auto colon = value.find(':');
    if (colon == std::string::npos) throw InvalidArgument("source_ratio must look like 2:1");
    s.source_ratio = std::make_pair(parse_value<int>(key, value.substr(0, colon)),
                                    parse_value<int>(key, value.substr(colon + 1)));
  } else if (key == "dimension") {
    grid.dimension = parse_value<double>(key, value);
  } else if (key == "resolution") {
    grid.resolution = parse_value<double>(key, value);
  } else if (key == "radius_multiplier") {
    grid.radius_multiplier = parse_value<double>(key, value);
  } else if (key == "occupancy") {
    if (value == "gaussian") {
      grid.occupancy = Occupancy::Gaussian;
    } else if (value == "boolean") {
      grid.occupancy = Occupancy::Boolean;
    } else {
      throw InvalidArgument("occupancy must be 'gaussian' or 'boolean'");
    }
  } else if (key == "scheme" || key == "atom_types") {
    grid.scheme = AtomTypeScheme(scheme_from_name(value));
  } else if (key == "radius_table") {
    const auto bytes = read_file_bytes(value);
    radii = RadiusTable::parse(
        std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  } else if (key == "conv_widths") {
    model.conv_widths.clear();
    std::stringstream ss(value);
    for (std::string item; std::getline(ss, item, ',');) {
      model.conv_widths.push_back(parse_value<int>(key, item));
    }
  } else if (key == "pool_mode") {
    if (value == "max") {
      model.pool_mode = PoolMode::Max;
    } else if (value == "average" || value == "ave") {
      model.pool_mode = PoolMode::Average;
    } else {
      throw InvalidArgument("pool_mode must be 'max' or 'average'");
    }
  } else if (key == "pool_kernel") {
    model.pool_kernel = parse_value<int>(key, value);
  } else if (key == "hidden_units") {
    model.hidden_units = parse_value<int>(key, value);
  } else {
    throw InvalidArgument("unknown configuration key '" + key + "'");
  }
}

ExperimentConfig ExperimentConfig::parse(std::string_view text, const std::string& base_dir) {
  ExperimentConfig c;
  for (const auto& [k, v] : parse_key_values(text)) {
    c.set(k, k == "radius_table" ? resolve(base_dir, v) : v);
  }
  c.solver.validate();
  c.grid.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return parse(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                 std::filesystem::path(path).parent_path().string());
  } catch (const Error& e) {
    throw DataError(path + ": " + e.what());
  }
}

NetworkSpec ExperimentConfig::network() const {
  ModelOptions m = model;
  m.dropout_ratio = solver.dropout_ratio;
  return build_model(grid.scheme.channel_count(), static_cast<int>(grid.side()), m);
}

// Solver ------------------------------------------------------------------------

double lr_at(long iter, const SolverConfig& config) {
  if (iter < 0) throw InvalidArgument("lr_at: iteration must be >= 0");
  if (config.lr_policy == LrPolicy::Fixed) return config.base_lr;
  return config.base_lr /
         std::pow(1.0 + config.gamma * static_cast<double>(iter), config.power);
}

void sgd_step(WeightSet& weights, const WeightSet& grads, WeightSet& velocity, long iter,
              const SolverConfig& config) {
  if (grads.layers.size() != weights.layers.size() ||
      velocity.layers.size() != weights.layers.size()) {
    throw InvalidArgument("sgd_step: layer count mismatch");
  }
  const double lr = lr_at(iter, config);
  for (std::size_t li = 0; li < weights.layers.size(); ++li) {
    auto& w = weights.layers[li];
    const auto& g = grads.layers[li];
    auto& v = velocity.layers[li];
    if (g.weights.size() != w.weights.size() || g.bias.size() != w.bias.size() ||
        v.weights.size() != w.weights.size() || v.bias.size() != w.bias.size()) {
      throw InvalidArgument("sgd_step: shape mismatch in layer " + std::to_string(li));
    }
    auto update = [&](std::vector<double>& wv, const std::vector<double>& gv,
                      std::vector<double>& vv, double decay, const char* what) {
      for (std::size_t i = 0; i < wv.size(); ++i) {
        if (!std::isfinite(gv[i])) {
          throw DataError("sgd_step: non-finite gradient at iteration " + std::to_string(iter) +
                          ", layer " + std::to_string(li) + " " + what + "[" +
                          std::to_string(i) + "] = " + std::to_string(gv[i]));
        }
        vv[i] = config.momentum * vv[i] - lr * (gv[i] + decay * wv[i]);
        wv[i] += vv[i];
      }
    };
    update(w.weights.values, g.weights.values, v.weights.values, config.weight_decay, "weights");
    update(w.bias.values, g.bias.values, v.bias.values, 0.0, "bias");
  }
}

// Sampling ----------------------------------------------------------------------

ClassCycler::ClassCycler(std::vector<std::size_t> items)
    : items_(std::move(items)), pos_(items_.size()) {}

std::size_t ClassCycler::next(Rng& rng) {
  if (items_.empty()) throw InvalidArgument("cannot sample from an empty class");
  if (pos_ >= order_.size()) {
    order_ = items_;
    rng.shuffle(order_);
    pos_ = 0;
  }
  return order_[pos_++];
}

namespace {

std::vector<std::size_t> rows_with_label(const DatasetIndex& index,
                                         const std::vector<std::size_t>& rows, int label) {
  std::vector<std::size_t> out;
  for (auto r : rows) {
    if (index[r].label == label) out.push_back(r);
  }
  return out;
}

}  // namespace

BalancedSampler::BalancedSampler(const DatasetIndex& index, const std::vector<std::size_t>& rows)
    : positives_(rows_with_label(index, rows, 1)), negatives_(rows_with_label(index, rows, 0)) {
  if (positives_.size() == 0 || negatives_.size() == 0) {
    throw InvalidArgument("balanced sampling needs at least one positive and one negative");
  }
}

std::vector<BatchItem> BalancedSampler::next_batch(Rng& rng, const SolverConfig& config) {
  if (config.batch_size <= 0 || config.batch_size % 2 != 0) {
    throw InvalidArgument("batch_size must be a positive even number");
  }
  const auto half = static_cast<std::size_t>(config.batch_size / 2);
  std::vector<BatchItem> batch;
  batch.reserve(2 * half);
  for (std::size_t i = 0; i < half; ++i) batch.push_back({positives_.next(rng), 1, {}});
  for (std::size_t i = 0; i < half; ++i) batch.push_back({negatives_.next(rng), 0, {}});
  rng.shuffle(batch);
  for (auto& item : batch) {
    item.transform = sample_transform(rng, config.max_translate, config.rotate);
  }
  return batch;
}

SourceMixer::SourceMixer(int ratio_a, int ratio_b) : a_(ratio_a), b_(ratio_b) {
  if (a_ < 0 || b_ < 0 || a_ + b_ == 0) throw InvalidArgument("mixing ratio must be a:b, a+b > 0");
}

int SourceMixer::next() {
  const long slot = count_++ % (a_ + b_);
  return slot < a_ ? 0 : 1;
}

// Examples ------------------------------------------------------------------------

StructureStore::StructureStore(AtomTypeScheme scheme, RadiusTable radii)
    : scheme_(scheme), radii_(std::move(radii)) {}

void StructureStore::add(const std::string& ref, Molecule mol) {
  cache_[ref] = assign_types(std::move(mol), scheme_);
}

const Molecule& StructureStore::get(const std::string& ref) {
  auto it = cache_.find(ref);
  if (it != cache_.end()) return it->second;
  Molecule m = load_structure(ref, radii_);
  if (m.typed_with != scheme_.name()) m = assign_types(std::move(m), scheme_);
  return cache_.emplace(ref, std::move(m)).first->second;
}

DensityGrid example_grid(StructureStore& store, const PoseRecord& record,
                         const GridConfig& grid, const Transform& transform) {
  const Molecule& rec = store.get(record.receptor_ref);
  const Molecule& lig = store.get(record.ligand_ref);
  return voxelize(rec, lig, molecule_center(lig), grid, transform);
}

Tensor grid_tensor(const DensityGrid& grid) {
  Tensor t({grid.channels, grid.side, grid.side, grid.side});
  std::copy(grid.values.begin(), grid.values.end(), t.values.begin());
  return t;
}

std::vector<LabeledGrid> next_batch(Rng& rng, BalancedSampler& sampler,
                                    const DatasetIndex& index, StructureStore& store,
                                    const ExperimentConfig& config) {
  std::vector<LabeledGrid> out;
  for (const auto& item : sampler.next_batch(rng, config.solver)) {
    out.push_back({grid_tensor(example_grid(store, index[item.record], config.grid,
                                            item.transform)),
                   item.label, item.record});
  }
  return out;
}

// Training ----------------------------------------------------------------------

std::vector<double> score_records(const NetworkSpec& spec, const WeightSet& weights,
                                  const DatasetIndex& index,
                                  const std::vector<std::size_t>& rows, StructureStore& store,
                                  const GridConfig& grid, int threads) {
  std::vector<std::pair<const Molecule*, const Molecule*>> mols;
  mols.reserve(rows.size());
  for (auto r : rows) {
    mols.emplace_back(&store.get(index[r].receptor_ref), &store.get(index[r].ligand_ref));
  }
  std::vector<double> scores(rows.size());
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    const auto& [rec, lig] = mols[i];
    const DensityGrid g = voxelize(*rec, *lig, molecule_center(*lig), grid, Transform::identity());
    scores[i] = forward(spec, weights, grid_tensor(g), Mode::Test)[1];
  });
  return scores;
}

std::vector<ScoredExample> scored_examples(const DatasetIndex& index,
                                           const std::vector<std::size_t>& rows,
                                           const std::vector<double>& scores) {
  if (rows.size() != scores.size()) throw InvalidArgument("scored_examples: size mismatch");
  std::vector<ScoredExample> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const PoseRecord& r = index[rows[i]];
    out.push_back({scores[i], r.label, r.target_id, r.ligand_ref, r.vina_rank, r.rmsd});
  }
  return out;
}

namespace {

double auc_or_nan(const DatasetIndex& index, const std::vector<std::size_t>& rows,
                  const std::vector<double>& scores) {
  std::vector<int> labels;
  for (auto r : rows) labels.push_back(index[r].label);
  const bool has_pos = std::count(labels.begin(), labels.end(), 1) > 0;
  const bool has_neg = std::count(labels.begin(), labels.end(), 0) > 0;
  if (!has_pos || !has_neg) return NAN;
  return roc_auc(scores, labels).auc;
}

}  // namespace

TrainResult train(const DatasetIndex& index, const std::vector<std::size_t>& train_rows,
                  const std::vector<std::size_t>& test_rows, StructureStore& store,
                  const ExperimentConfig& config) {
  const SolverConfig& sc = config.solver;
  sc.validate();
  if (!(store.scheme() == config.grid.scheme)) {
    throw InvalidArgument("structure store and grid use different atom type schemes");
  }
  const NetworkSpec spec = config.network();
  Rng rng(sc.seed);

  TrainResult result;
  result.weights = init_weights(spec, rng);
  if (sc.iterations == 0) return result;

  // One balanced sampler per source when mixing, otherwise a single pool.
  std::vector<BalancedSampler> samplers;
  std::optional<SourceMixer> mixer;
  if (sc.source_ratio) {
    const auto [a, b] = *sc.source_ratio;
    std::vector<std::size_t> dude, csar;
    for (auto r : train_rows) (index[r].source == Source::Dude ? dude : csar).push_back(r);
    if ((a > 0 && dude.empty()) || (b > 0 && csar.empty())) {
      throw InvalidArgument("source mixing: a source with nonzero ratio has no records");
    }
    samplers.emplace_back(index, a > 0 ? dude : csar);
    samplers.emplace_back(index, b > 0 ? csar : dude);
    mixer.emplace(a, b);
  } else {
    samplers.emplace_back(index, train_rows);
  }

  WeightSet velocity = zero_weights(spec);
  double loss_sum = 0.0;
  long loss_count = 0;
  for (long iter = 0; iter < sc.iterations; ++iter) {
    BalancedSampler& sampler = samplers[mixer ? static_cast<std::size_t>(mixer->next()) : 0];
    const auto batch = next_batch(rng, sampler, index, store, config);

    WeightSet grad_sum = zero_weights(spec);
    for (const auto& ex : batch) {
      const ForwardPass pass = forward_pass(spec, result.weights, ex.grid, Mode::Train, &rng);
      const auto probs = pass.probabilities();
      loss_sum += loss(probs, ex.label).value;
      ++loss_count;
      const Gradients g = backward(spec, result.weights, pass, ex.label);
      for (std::size_t li = 0; li < grad_sum.layers.size(); ++li) {
        auto& dst = grad_sum.layers[li];
        const auto& src = g.weights.layers[li];
        for (std::size_t i = 0; i < dst.weights.size(); ++i) dst.weights.values[i] += src.weights.values[i];
        for (std::size_t i = 0; i < dst.bias.size(); ++i) dst.bias.values[i] += src.bias.values[i];
      }
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (auto& l : grad_sum.layers) {
      for (double& v : l.weights.values) v *= inv;
      for (double& v : l.bias.values) v *= inv;
    }
    sgd_step(result.weights, grad_sum, velocity, iter, sc);

    const long done = iter + 1;
    if (done % sc.test_interval == 0 || done == sc.iterations) {
      TraceRow row;
      row.iteration = done;
      row.learning_rate = lr_at(iter, sc);
      row.mean_loss = loss_sum / static_cast<double>(loss_count);
      row.train_auc = auc_or_nan(
          index, train_rows,
          score_records(spec, result.weights, index, train_rows, store, config.grid));
      row.test_auc = test_rows.empty()
                         ? NAN
                         : auc_or_nan(index, test_rows,
                                      score_records(spec, result.weights, index, test_rows,
                                                    store, config.grid));
      result.trace.push_back(row);
      loss_sum = 0.0;
      loss_count = 0;
    }
  }
  return result;
}

std::string format_trace(const std::vector<TraceRow>& trace) {
  std::ostringstream out;
  out << "iteration\tlr\tloss\ttrain_auc\ttest_auc\n";
  out.precision(6);
  for (const auto& r : trace) {
    out << r.iteration << '\t' << r.learning_rate << '\t' << r.mean_loss << '\t';
    if (std::isnan(r.train_auc)) out << "NA"; else out << r.train_auc;
    out << '\t';
    if (std::isnan(r.test_auc)) out << "NA"; else out << r.test_auc;
    out << '\n';
  }
  return out.str();
}

}  // namespace voxscore
