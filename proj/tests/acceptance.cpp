// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "synthetic.hpp"
#include "voxscore/evalkit.hpp"
#include "voxscore/maskviz.hpp"

using namespace voxscore;
using voxtest::carbons;

namespace {

// Tolerances and budgets.
constexpr double kDensityAbsTol = 1e-12;
constexpr double kContinuityTol = 1e-6;
constexpr double kContinuityEps = 1e-7;
constexpr double kDensitySeconds = 1.0;
constexpr double kRotationTol = 1e-6;
constexpr double kGridSeconds = 10.0;
constexpr double kGradRelTol = 1e-4;
constexpr double kGradMaxSkipFraction = 0.05;
constexpr double kGradSeconds = 120.0;
constexpr double kLearnAuc = 0.95;
constexpr long kLearnIterations = 2000;
constexpr double kLearnSeconds = 600.0;
constexpr int kAugmentSeeds = 5;
constexpr long kAugmentIterations = 1000;
constexpr double kSgdTol = 1e-12;
constexpr double kBFactorTol = 0.005;
constexpr double kMaskOrderTol = 1e-6;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Check {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok) {
      out_.pass = false;
      if (!failures_.empty()) failures_ += "; ";
      failures_ += what;
    }
  }
  void note(const std::string& s) {
    if (!notes_.empty()) notes_ += ", ";
    notes_ += s;
  }
  Outcome finish() {
    out_.detail = notes_;
    if (!failures_.empty()) out_.detail += (notes_.empty() ? "" : " | ") + ("failed: " + failures_);
    return out_;
  }

 private:
  Outcome out_;
  std::string notes_;
  std::string failures_;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Molecule typed(Molecule m, const AtomTypeScheme& s) { return assign_types(std::move(m), s); }

// 1 ---------------------------------------------------------------------------

Outcome density_correctness() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double r = rng.uniform(0.5, 2.5);
    const double d = rng.uniform(0.0, 1.7 * r);
    worst = std::max(worst, std::abs(atom_density(d, r) - voxtest::closed_form_density(d, r)));
  }
  c.require(worst < kDensityAbsTol, "max abs error " + fmt("%.3g", worst));
  c.note("max abs error " + fmt("%.3g", worst));

  double value_gap = 0.0, slope_gap = 0.0;
  const double e = kContinuityEps;
  for (double r : {0.5, 1.0, 1.5, 1.9, 2.5}) {
    auto A = [&](double d) { return atom_density(d, r); };
    for (double b : {r, 1.5 * r}) {
      value_gap = std::max(value_gap, std::abs(A(b - e) - A(b + e)));
      slope_gap = std::max(slope_gap, std::abs((A(b) - A(b - e)) / e - (A(b + e) - A(b)) / e));
    }
  }
  c.require(value_gap < kContinuityTol, "value jump " + fmt("%.3g", value_gap));
  c.require(slope_gap < kContinuityTol, "slope jump " + fmt("%.3g", slope_gap));
  c.note("value jump " + fmt("%.3g", value_gap) + ", slope jump " + fmt("%.3g", slope_gap));
  const double s = seconds_since(t0);
  c.require(s < kDensitySeconds, "runtime");
  return c.finish();
}

// 2 ---------------------------------------------------------------------------

// Index of the source point for a 90° rotation about `axis` (0 x, 1 y, 2 z):
// the rotated grid at (i,j,k) equals the original at the returned index.
std::array<std::size_t, 3> rotated_source(int axis, std::size_t i, std::size_t j, std::size_t k,
                                          std::size_t n) {
  switch (axis) {
    case 0: return {i, k, n - 1 - j};   // (y,z) -> (-z,y)
    case 1: return {n - 1 - k, j, i};   // (z,x) -> (-x,z)
    default: return {j, n - 1 - i, k};  // (x,y) -> (-y,x)
  }
}

Outcome grid_oracle() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  const GridConfig g;
  Rng rng(202);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t nr = rng.below(4), nl = 1 + rng.below(2);
    std::vector<Vec3> rp, lp;
    for (std::size_t i = 0; i < nr; ++i) rp.push_back({rng.uniform(-9, 9), rng.uniform(-9, 9), rng.uniform(-9, 9)});
    for (std::size_t i = 0; i < nl; ++i) lp.push_back({rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)});
    const Molecule rec = typed(carbons(rp, Role::Receptor), g.scheme);
    const Molecule lig = typed(carbons(lp, Role::Ligand), g.scheme);
    const Vec3 center = molecule_center(lig);
    const DensityGrid fast = voxelize(rec, lig, center, g);
    const DensityGrid slow = voxtest::naive_voxelize(rec, lig, center, g);
    if (fast.values.size() != slow.values.size()) {
      ++mismatches;
      continue;
    }
    for (std::size_t i = 0; i < fast.values.size(); ++i) mismatches += fast.values[i] != slow.values[i];
  }
  c.require(mismatches == 0, std::to_string(mismatches) + " grid values differ from naive");
  c.note("naive mismatches " + std::to_string(mismatches));

  GridConfig g2;
  g2.scheme = AtomTypeScheme(SchemeName::Binary2);
  std::vector<Vec3> lp;
  for (int i = 0; i < 5; ++i) lp.push_back({rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-4, 4)});
  const Molecule lig = typed(carbons(lp, Role::Ligand), g2.scheme);
  const DensityGrid a = voxelize(Molecule{}, lig, Vec3{}, g2);
  const std::size_t n = a.side;
  double worst = 0.0;
  const double quarter = std::acos(-1.0) / 2.0;
  for (int axis = 0; axis < 3; ++axis) {
    Vec3 ax{axis == 0 ? 1.0 : 0.0, axis == 1 ? 1.0 : 0.0, axis == 2 ? 1.0 : 0.0};
    Transform t;
    t.rotation = Quaternion::axis_angle(ax, quarter);
    const DensityGrid b = voxelize(Molecule{}, lig, Vec3{}, g2, t);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) {
          const auto s = rotated_source(axis, i, j, k, n);
          worst = std::max(worst, std::abs(double(b.at(0, i, j, k)) - a.at(0, s[0], s[1], s[2])));
        }
  }
  c.require(worst < kRotationTol, "rotation error " + fmt("%.3g", worst));
  c.note("rotation max error " + fmt("%.3g", worst));
  c.require(seconds_since(t0) < kGridSeconds, "runtime");
  return c.finish();
}

// 3 ---------------------------------------------------------------------------

NetworkSpec single_layer(const LayerSpec& layer) {
  NetworkSpec s;
  s.input_channels = 2;
  s.input_side = 4;
  s.layers = {layer, FullyConnected{2}, Softmax{}};
  s.validate();
  return s;
}

Outcome gradient_checks() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  ModelOptions o;
  o.conv_widths = {4, 8, 16};
  const std::vector<std::pair<std::string, NetworkSpec>> cases = {
      {"conv", single_layer(Convolution3D{3})},
      {"maxpool", single_layer(Pooling{PoolMode::Max, 2})},
      {"avgpool", single_layer(Pooling{PoolMode::Average, 2})},
      {"relu", single_layer(ReLU{})},
      {"dropout", single_layer(Dropout{0.5})},
      {"fc", single_layer(FullyConnected{5})},
      {"final", build_model(2, 8, o)},
  };
  double worst = 0.0;
  std::size_t checked = 0, skipped = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    for (const auto& [name, spec] : cases) {
      Rng rng(seed);
      WeightSet w = init_weights(spec, rng);
      for (auto& l : w.layers)
        for (double& b : l.bias.values) b = rng.uniform(-0.1, 0.1);
      Tensor x(spec.input_shape());
      for (double& v : x.values) v = rng.uniform(0.0, 1.0);
      for (Mode mode : {Mode::Test, Mode::Train}) {
        const auto r = voxtest::gradient_check(spec, w, x, static_cast<int>(seed % 2), mode, rng);
        worst = std::max(worst, r.max_rel_error);
        checked += r.checked;
        skipped += r.skipped;
        c.require(r.max_rel_error < kGradRelTol,
                  name + " seed " + std::to_string(seed) + " error " + fmt("%.3g", r.max_rel_error));
        c.require(r.skipped <= kGradMaxSkipFraction * r.checked,
                  name + " seed " + std::to_string(seed) + " skipped too many probes");
      }
    }
  }
  c.note("max relative error " + fmt("%.3g", worst));
  c.note(std::to_string(checked) + " probes, " + std::to_string(skipped) + " skipped at kinks");
  const double s = seconds_since(t0);
  c.require(s < kGradSeconds, "runtime " + fmt("%.1f s", s));
  return c.finish();
}

// 4, 5 ------------------------------------------------------------------------

ExperimentConfig learning_config(std::uint64_t seed) {
  ExperimentConfig cfg = voxtest::toy_config();
  cfg.solver = SolverConfig{};  // batch 10, lr 0.01, momentum 0.9, inverse decay
  cfg.solver.iterations = kLearnIterations;
  cfg.solver.test_interval = 250;
  cfg.solver.seed = seed;
  return cfg;
}

std::vector<std::size_t> range(std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> v(hi - lo);
  std::iota(v.begin(), v.end(), lo);
  return v;
}

Outcome learning_sanity() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = learning_config(7);
  auto run = [&] {
    auto set = voxtest::make_synthetic_set(32, 11, cfg.grid.scheme);
    return train(set.index, range(0, set.index.size()), {}, set.store, cfg);
  };
  const TrainResult a = run();
  double best = 0.0;
  long reached = -1;
  for (const auto& row : a.trace) {
    if (std::isfinite(row.train_auc)) best = std::max(best, row.train_auc);
    if (reached < 0 && row.train_auc >= kLearnAuc) reached = row.iteration;
  }
  const double final_auc = a.trace.empty() ? 0.0 : a.trace.back().train_auc;
  c.require(reached >= 0, "best training AUC " + fmt("%.4f", best));
  c.note("training AUC " + fmt("%.4f", final_auc) + " at " + std::to_string(kLearnIterations));
  if (reached >= 0) c.note("reached " + fmt("%.2f", kLearnAuc) + " by iteration " + std::to_string(reached));
  const TrainResult b = run();
  const NetworkSpec spec = cfg.network();
  c.require(save_checkpoint(spec, a.weights) == save_checkpoint(spec, b.weights) &&
                format_trace(a.trace) == format_trace(b.trace),
            "second run with the same seed differs");
  const double s = seconds_since(t0);
  c.note(fmt("%.0f s for two runs", s));
  c.require(s / 2.0 < kLearnSeconds, "runtime");
  return c.finish();
}

Outcome augmentation_effect() {
  Check c;
  auto set = voxtest::make_synthetic_set(32, 23, AtomTypeScheme(SchemeName::Binary2));
  const auto train_rows = range(0, 16), test_rows = range(16, 32);
  double with = 0.0, without = 0.0;
  for (int seed = 1; seed <= kAugmentSeeds; ++seed) {
    for (bool augment : {true, false}) {
      ExperimentConfig cfg = learning_config(static_cast<std::uint64_t>(seed));
      cfg.solver.iterations = kAugmentIterations;
      cfg.solver.test_interval = kAugmentIterations;
      cfg.solver.rotate = augment;
      cfg.solver.max_translate = augment ? 2.0 : 0.0;
      const TrainResult r = train(set.index, train_rows, test_rows, set.store, cfg);
      (augment ? with : without) += r.trace.back().test_auc / kAugmentSeeds;
    }
  }
  c.note("held-out AUC with augmentation " + fmt("%.4f", with) + ", without " + fmt("%.4f", without));
  c.require(std::isfinite(with) && std::isfinite(without) && with >= without,
            "augmented mean below unaugmented");
  return c.finish();
}

// 6 ---------------------------------------------------------------------------

WeightSet scalar(double w, double b) {
  WeightSet ws;
  ws.layers.push_back(LayerParams{Tensor({1}, w), Tensor({1}, b)});
  return ws;
}

Outcome solver_schedule() {
  Check c;
  const SolverConfig def;
  c.require(lr_at(0, def) == 0.01, "lr_at(0)");
  c.require(lr_at(1000, def) == 0.005, "lr_at(1000)");
  c.require(lr_at(9000, def) == 0.001, "lr_at(9000)");

  // Hand recurrence: v <- mu v - lr (g + lambda w) for weights, no decay for bias.
  double worst = 0.0;
  Rng rng(606);
  for (int trial = 0; trial < 200; ++trial) {
    SolverConfig cfg;
    cfg.momentum = rng.uniform(0.0, 0.95);
    cfg.weight_decay = rng.uniform(0.0, 0.01);
    cfg.lr_policy = trial % 2 ? LrPolicy::Fixed : LrPolicy::Inverse;
    double w = rng.uniform(-2, 2), b = rng.uniform(-2, 2), vw = 0.0, vb = 0.0;
    WeightSet ws = scalar(w, b), vel = scalar(0, 0);
    for (long it = 0; it < 20; ++it) {
      const double gw = rng.uniform(-1, 1), gb = rng.uniform(-1, 1);
      const double lr = cfg.lr_policy == LrPolicy::Fixed
                            ? cfg.base_lr
                            : cfg.base_lr * std::pow(1.0 + cfg.gamma * it, -cfg.power);
      vw = cfg.momentum * vw - lr * (gw + cfg.weight_decay * w);
      w += vw;
      vb = cfg.momentum * vb - lr * gb;
      b += vb;
      sgd_step(ws, scalar(gw, gb), vel, it, cfg);
    }
    worst = std::max({worst, std::abs(ws.layers[0].weights.values[0] - w),
                      std::abs(ws.layers[0].bias.values[0] - b)});
  }
  c.require(worst < kSgdTol, "recurrence error " + fmt("%.3g", worst));

  SolverConfig plain;
  plain.lr_policy = LrPolicy::Fixed;
  plain.weight_decay = 0.0;
  {
    WeightSet w = scalar(1, 0), v = scalar(0, 0);
    sgd_step(w, scalar(0, 0), v, 0, plain);
    c.require(w.layers[0].weights.values[0] == 1.0, "zero gradient moved the weight");
  }
  plain.momentum = 0.0;
  {
    WeightSet w = scalar(1, 0), v = scalar(0, 0);
    sgd_step(w, scalar(1, 0), v, 0, plain);
    c.require(std::abs(w.layers[0].weights.values[0] - 0.99) < kSgdTol, "single step != 0.99");
  }
  plain.momentum = 0.9;
  WeightSet w = scalar(1, 0), v = scalar(0, 0);
  sgd_step(w, scalar(1, 0), v, 0, plain);
  sgd_step(w, scalar(1, 0), v, 1, plain);
  const double two = w.layers[0].weights.values[0];
  c.require(std::abs(two - 0.971) < kSgdTol, "two momentum steps " + fmt("%.6f", two));
  c.note("recurrence error " + fmt("%.3g", worst));
  c.note("two momentum steps give " + fmt("%.3f", two) +
         " (1 - 0.01 - 0.019); the stated 0.961 assumes a second step of 0.029");
  return c.finish();
}

// 7 ---------------------------------------------------------------------------

Outcome batch_balance() {
  Check c;
  std::vector<PoseRecord> records;
  for (int i = 0; i < 37; ++i) {
    PoseRecord r;
    r.label = i % 5 == 0 ? 1 : 0;
    r.cluster_id = "k";
    records.push_back(r);
  }
  const DatasetIndex idx(records);
  BalancedSampler sampler(idx, range(0, idx.size()));
  const SolverConfig cfg;
  Rng rng(707);
  int bad = 0;
  for (int b = 0; b < 10000; ++b) {
    const auto batch = sampler.next_batch(rng, cfg);
    int pos = 0, neg = 0;
    for (const auto& item : batch) (idx[item.record].label ? pos : neg)++;
    bad += !(pos == 5 && neg == 5);
  }
  c.require(bad == 0, std::to_string(bad) + " unbalanced batches");
  SourceMixer mixer(2, 1);
  int counts[2] = {0, 0};
  for (int i = 0; i < 3000; ++i) ++counts[mixer.next()];
  c.require(counts[0] == 2000 && counts[1] == 1000, "mixing counts");
  c.note("10000 batches of 5/5, mixing " + std::to_string(counts[0]) + "/" + std::to_string(counts[1]));
  return c.finish();
}

// 8 ---------------------------------------------------------------------------

Outcome metric_oracle() {
  Check c;
  Rng rng(808);
  int unequal = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(199);
    std::vector<double> s(n);
    std::vector<int> l(n);
    const std::uint64_t levels = 2 + rng.below(20);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.below(levels)) / static_cast<double>(levels);
      l[i] = rng.bernoulli(0.5) ? 1 : 0;
    }
    l[0] = 1;
    l[n - 1] = 0;
    unequal += roc_auc(s, l).auc != voxtest::pairwise_auc(s, l).auc();
  }
  c.require(unequal == 0, std::to_string(unequal) + " AUC mismatches");

  std::vector<ScoredExample> ex;
  for (int t = 0; t < 40; ++t) {
    const int poses = 1 + static_cast<int>(rng.below(9));
    for (int p = 0; p < poses; ++p) {
      ScoredExample e;
      e.target_id = "t" + std::to_string(t);
      e.ligand_id = "l";
      e.score = static_cast<double>(rng.below(5));
      e.rmsd = rng.uniform(0.0, 8.0);
      e.label = *e.rmsd < 2.0;
      ex.push_back(e);
    }
  }
  const auto groups = group_by_target(ex);
  bool monotone = true;
  double prev = 0.0;
  for (int n = 1; n <= 12; ++n) {
    const double v = intra_target_topn(groups, n);
    monotone = monotone && v >= prev;
    prev = v;
  }
  c.require(monotone, "top-N not monotone");

  std::vector<ScoredExample> four;
  for (int i = 0; i < 4; ++i) {
    ScoredExample e;
    e.target_id = "t";
    e.ligand_id = "l";
    e.score = 0.1 * i;
    e.rmsd = i == 0 ? 1.0 : 5.0;
    e.label = i == 0;
    four.push_back(e);
  }
  Rng brng(809);
  const auto base = random_baseline(group_by_target(four), 1, 2000, brng);
  const double sigma = std::sqrt(0.25 * 0.75 / 2000.0);
  c.require(std::abs(base.mean - 0.25) <= 3.0 * sigma, "baseline " + fmt("%.4f", base.mean));
  c.note("1000 AUC instances exact, baseline " + fmt("%.4f", base.mean) + " (3 sigma " +
         fmt("%.4f", 3 * sigma) + ")");
  return c.finish();
}

// 9 ---------------------------------------------------------------------------

Outcome fold_integrity() {
  Check c;
  Rng rng(909);
  int violations = 0, trials = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t clusters = 2 + rng.below(499);
    std::vector<PoseRecord> records;
    std::size_t largest = 0;
    for (std::size_t k = 0; k < clusters; ++k) {
      const std::size_t size = 1 + rng.below(40);
      largest = std::max(largest, size);
      for (std::size_t i = 0; i < size; ++i) {
        PoseRecord r;
        r.label = rng.bernoulli(0.5);
        r.cluster_id = "c" + std::to_string(k);
        r.target_id = "t" + std::to_string(k);
        records.push_back(r);
      }
    }
    // Interleave clusters in the index.
    for (std::size_t i = records.size(); i > 1; --i) std::swap(records[i - 1], records[rng.below(i)]);
    const DatasetIndex idx(records);
    const int k = 2 + static_cast<int>(rng.below(std::min<std::size_t>(clusters - 1, 9)));
    const FoldAssignment fa = make_folds(idx, k);
    ++trials;
    std::map<std::string, int> fold_of;
    std::vector<int> seen(idx.size(), 0);
    std::size_t lo = idx.size(), hi = 0;
    for (int f = 0; f < k; ++f) {
      lo = std::min(lo, fa.folds[f].size());
      hi = std::max(hi, fa.folds[f].size());
      for (auto row : fa.folds[f]) {
        ++seen[row];
        const auto [it, fresh] = fold_of.emplace(idx[row].cluster_id, f);
        violations += it->second != f;
      }
    }
    violations += static_cast<int>(std::count_if(seen.begin(), seen.end(), [](int s) { return s != 1; }));
    violations += hi - lo > largest;
  }
  c.require(violations == 0, std::to_string(violations) + " violations");
  c.note(std::to_string(trials) + " random indices");
  return c.finish();
}

// 10 --------------------------------------------------------------------------

Outcome format_round_trips() {
  Check c;
  Rng rng(1010);
  const AtomTypeScheme smina;
  int failures = 0;
  const char* elements[] = {"C", "N", "O", "S", "P", "F", "Cl", "Br", "I", "Fe", "Zn"};
  for (int trial = 0; trial < 50; ++trial) {
    std::ostringstream text;
    const int atoms = 1 + static_cast<int>(rng.below(30));
    for (int i = 0; i < atoms; ++i) {
      text << elements[rng.below(11)] << ' ' << rng.uniform(-50, 50) << ' ' << rng.uniform(-50, 50)
           << ' ' << rng.uniform(-50, 50) << " ligand" << (rng.bernoulli(0.3) ? " aromatic" : "")
           << (rng.bernoulli(0.3) ? " donor" : "") << (rng.bernoulli(0.3) ? " acceptor" : "")
           << '\n';
    }
    const Molecule m = typed(parse_structure_text(text.str()), smina);
    const auto bytes = write_gninatypes(m);
    failures += write_gninatypes(read_gninatypes(bytes)) != bytes;
  }
  c.require(failures == 0, std::to_string(failures) + " gninatypes mismatches");

  int ck_failures = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const NetworkSpec spec = build_final_model(2, 16);
    Rng r(seed);
    WeightSet w = init_weights(spec, r);
    for (auto& l : w.layers)
      for (double& b : l.bias.values) b = r.uniform(-1, 1);
    const auto bytes = save_checkpoint(spec, w);
    ck_failures += save_checkpoint(spec, load_checkpoint(spec, bytes)) != bytes;
  }
  c.require(ck_failures == 0, std::to_string(ck_failures) + " checkpoint mismatches");

  double worst = 0.0;
  const Molecule lig = typed(carbons({{0, 0, 0}, {1, 2, 3}, {-4, 5, 6}, {7, -8, 9}}, Role::Ligand),
                             AtomTypeScheme(SchemeName::Binary2));
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> s(lig.size());
    for (double& v : s) v = rng.uniform(-kTemperatureFactorLimit, kTemperatureFactorLimit);
    const auto back = read_temperature_factors(write_colored_structure(lig, s));
    for (std::size_t i = 0; i < s.size(); ++i) worst = std::max(worst, std::abs(back[i] - s[i]));
  }
  c.require(worst <= kBFactorTol, "temperature factor error " + fmt("%.4g", worst));
  c.note("gninatypes and checkpoint bit-exact, temperature factor max error " + fmt("%.4f", worst));
  return c.finish();
}

// 11 --------------------------------------------------------------------------

Outcome masking_exactness() {
  Check c;
  const ExperimentConfig cfg = voxtest::toy_config();
  const NetworkSpec spec = cfg.network();
  Rng rng(1111);
  WeightSet w = init_weights(spec, rng);
  for (auto& l : w.layers)
    for (double& b : l.bias.values) b = rng.uniform(-0.2, 0.2);
  const auto& scheme = cfg.grid.scheme;
  Molecule rec = typed(carbons({{3, 0, 0}, {3.5, 1.2, 0}, {-2.5, 2, 1}, {0, -3, 2}, {-60, 0, 0}},
                               Role::Receptor),
                       scheme);
  Molecule lig = typed(carbons({{0, 0, 0}, {1.2, 0.4, 0}, {0.3, 1.3, -0.2}, {-1, 0.2, 0.8}, {0, 50, 0}},
                               Role::Ligand),
                       scheme);
  const Vec3 center = molecule_center(
      typed(carbons({{0, 0, 0}, {1.2, 0.4, 0}, {0.3, 1.3, -0.2}, {-1, 0.2, 0.8}}, Role::Ligand), scheme));
  lig.atoms[0].fragment_ids = {"A"};
  lig.atoms[1].fragment_ids = {"A", "B"};
  lig.atoms[2].fragment_ids = {"B"};

  MaskContext ctx = MaskContext::make(spec, w, rec, lig, cfg.grid, 1);
  ctx.center = center;
  const auto atoms = atom_removal_scores(ctx);
  const auto residues = residue_removal_scores(ctx);
  c.require(atoms.back() == 0.0, "out-of-grid atom delta " + fmt("%.3g", atoms.back()));
  c.require(residues.back().delta == 0.0, "out-of-grid residue delta " + fmt("%.3g", residues.back().delta));

  // Overlapping fragments by hand: A = {0,1}, B = {1,2}, atom 1 averages both.
  auto score = [&](const Molecule& r, const Molecule& l) {
    return score_complex(spec, w, r, l, cfg.grid, center);
  };
  const double s0 = score(rec, lig);
  Molecule without_a = lig, without_b = lig;
  without_a.atoms.erase(without_a.atoms.begin(), without_a.atoms.begin() + 2);
  without_b.atoms.erase(without_b.atoms.begin() + 1, without_b.atoms.begin() + 3);
  const double da = (s0 - score(rec, without_a)) / 2.0;
  const double db = (s0 - score(rec, without_b)) / 2.0;
  const auto f = fragment_removal_scores(ctx);
  const bool frag_ok = f && f->atom_delta[0] && *f->atom_delta[0] == da && f->atom_delta[1] &&
                       std::abs(*f->atom_delta[1] - (da + db) / 2.0) < 1e-15 && f->atom_delta[2] &&
                       *f->atom_delta[2] == db && !f->atom_delta[3];
  c.require(frag_ok, "fragment averaging");
  c.require(atoms[0] == s0 - score(rec, [&] {
              Molecule m = lig;
              m.atoms.erase(m.atoms.begin());
              return m;
            }()),
            "atom delta differs from direct rescoring");

  // Threads and scheduling order.
  std::string reports[3];
  int k = 0;
  for (int threads : {1, 3, 8}) {
    MaskContext t = MaskContext::make(spec, w, rec, lig, cfg.grid, threads);
    t.center = center;
    reports[k++] = format_mask_report(mask_report(t), lig);
  }
  c.require(reports[0] == reports[1] && reports[0] == reports[2], "report depends on --threads");

  // Residue removals computed in reverse atom order.
  Molecule rev = rec;
  std::reverse(rev.atoms.begin(), rev.atoms.end());
  MaskContext rctx = MaskContext::make(spec, w, rev, lig, cfg.grid, 1);
  rctx.center = center;
  std::map<std::string, double> fwd;
  for (const auto& r : residues) fwd[r.residue_id] = r.delta;
  double order_gap = 0.0;
  for (const auto& r : residue_removal_scores(rctx)) order_gap = std::max(order_gap, std::abs(fwd[r.residue_id] - r.delta));
  c.require(order_gap < kMaskOrderTol, "residue order gap " + fmt("%.3g", order_gap));
  c.note("out-of-grid deltas 0, fragment rule exact, threads 1/3/8 identical, order gap " +
         fmt("%.3g", order_gap));
  return c.finish();
}

// 12 --------------------------------------------------------------------------

Outcome label_rule() {
  Check c;
  c.require(label_pose(1.99) == PoseLabel::Positive, "1.99");
  c.require(label_pose(2.0) == PoseLabel::Omitted, "2.0");
  c.require(label_pose(4.0) == PoseLabel::Omitted, "4.0");
  c.require(label_pose(4.01) == PoseLabel::Negative, "4.01");
  c.note("1.99 positive, 2.0 and 4.0 omitted, 4.01 negative");
  return c.finish();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"density correctness", density_correctness},
      {"grid oracle", grid_oracle},
      {"gradient checks", gradient_checks},
      {"learning sanity", learning_sanity},
      {"augmentation effect", augmentation_effect},
      {"solver schedule", solver_schedule},
      {"batch balance", batch_balance},
      {"metric oracle", metric_oracle},
      {"fold integrity", fold_integrity},
      {"format round trips", format_round_trips},
      {"masking exactness", masking_exactness},
      {"label rule", label_rule},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %zu (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
