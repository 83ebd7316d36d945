#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include "voxscore/evalkit.hpp"
#include "voxscore/moldata.hpp"

namespace voxscore {

namespace {

std::vector<std::size_t> order_by_score_desc(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

std::vector<std::size_t> order_by_score_desc(const std::vector<ScoredExample>& group) {
  std::vector<double> s(group.size());
  for (std::size_t i = 0; i < group.size(); ++i) s[i] = group[i].score;
  return order_by_score_desc(s);
}

bool is_good_pose(const ScoredExample& e) {
  if (!e.rmsd) {
    throw InvalidArgument("pose of target '" + e.target_id + "' has no rmsd");
  }
  return *e.rmsd < kGoodPoseRmsd;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "NA";
  std::ostringstream s;
  s.precision(6);
  s << std::fixed << v;
  return s.str();
}

template <typename T>
std::optional<T> parse_number(const std::string& tok) {
  T v{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) return std::nullopt;
  return v;
}

}  // namespace

RocResult roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw InvalidArgument("roc_auc: score and label counts differ");
  }
  std::uint64_t pos = 0, neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw InvalidArgument("roc_auc: non-finite score");
    if (labels[i] == 1) {
      ++pos;
    } else if (labels[i] == 0) {
      ++neg;
    } else {
      throw InvalidArgument("roc_auc: labels must be 0 or 1");
    }
  }
  if (pos == 0 || neg == 0) throw InvalidArgument("roc_auc: both classes are required");

  const auto order = order_by_score_desc(scores);
  RocResult res;
  res.curve.push_back({0.0, 0.0});
  // Twice the area in units of one (positive, negative) pair, kept integral
  // so the result equals the pairwise count exactly.
  std::uint64_t twice_area = 0;
  std::uint64_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::uint64_t dp = 0, dn = 0;
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] == 1 ? dp : dn) += 1;
      ++i;
    }
    twice_area += dn * (2 * tp + dp);
    tp += dp;
    fp += dn;
    res.curve.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                         static_cast<double>(tp) / static_cast<double>(pos)});
  }
  res.auc = static_cast<double>(twice_area) /
            (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
  return res;
}

RocResult roc_auc(std::span<const ScoredExample> examples) {
  std::vector<double> s;
  std::vector<int> l;
  s.reserve(examples.size());
  l.reserve(examples.size());
  for (const auto& e : examples) {
    s.push_back(e.score);
    l.push_back(e.label);
  }
  return roc_auc(s, l);
}

TargetGroups group_by_target(std::span<const ScoredExample> examples) {
  TargetGroups groups;
  std::map<std::string, std::size_t> slot;
  for (const auto& e : examples) {
    auto [it, inserted] = slot.emplace(e.target_id, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(e);
  }
  return groups;
}

std::vector<TargetAuc> per_target_auc(std::span<const ScoredExample> examples) {
  std::vector<TargetAuc> out;
  for (const auto& g : group_by_target(examples)) {
    TargetAuc t;
    t.target_id = g.front().target_id;
    for (const auto& e : g) (e.label == 1 ? t.positives : t.negatives) += 1;
    if (t.positives > 0 && t.negatives > 0) t.auc = roc_auc(g).auc;
    out.push_back(std::move(t));
  }
  return out;
}

double intra_target_topn(const TargetGroups& groups, int n) {
  if (n < 1) throw InvalidArgument("intra_target_topn: n must be >= 1");
  if (groups.empty()) throw InvalidArgument("intra_target_topn: no targets");
  std::size_t successes = 0;
  for (const auto& g : groups) {
    if (g.empty()) throw InvalidArgument("intra_target_topn: empty target group");
    for (const auto& e : g) is_good_pose(e);
    const auto order = order_by_score_desc(g);
    const std::size_t top = std::min(order.size(), static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < top; ++i) {
      if (is_good_pose(g[order[i]])) {
        ++successes;
        break;
      }
    }
  }
  return static_cast<double>(successes) / static_cast<double>(groups.size());
}

BaselineStats random_baseline(const TargetGroups& groups, int n, int trials, Rng& rng) {
  if (trials < 1) throw InvalidArgument("random_baseline: trials must be >= 1");
  if (n < 1) throw InvalidArgument("random_baseline: n must be >= 1");
  if (groups.empty()) throw InvalidArgument("random_baseline: no targets");
  std::vector<std::vector<char>> good(groups.size());
  for (std::size_t t = 0; t < groups.size(); ++t) {
    if (groups[t].empty()) throw InvalidArgument("random_baseline: empty target group");
    for (const auto& e : groups[t]) good[t].push_back(is_good_pose(e) ? 1 : 0);
  }
  std::vector<double> fractions;
  fractions.reserve(static_cast<std::size_t>(trials));
  std::vector<std::size_t> perm;
  for (int trial = 0; trial < trials; ++trial) {
    std::size_t successes = 0;
    for (const auto& g : good) {
      perm.resize(g.size());
      std::iota(perm.begin(), perm.end(), 0);
      const std::size_t top = std::min(g.size(), static_cast<std::size_t>(n));
      bool hit = false;
      // Partial Fisher-Yates: the first `top` slots form a uniform draw.
      for (std::size_t i = 0; i < top; ++i) {
        std::swap(perm[i], perm[i + rng.below(g.size() - i)]);
        hit = hit || g[perm[i]];
      }
      successes += hit ? 1 : 0;
    }
    fractions.push_back(static_cast<double>(successes) / static_cast<double>(good.size()));
  }
  BaselineStats st;
  st.mean = std::accumulate(fractions.begin(), fractions.end(), 0.0) /
            static_cast<double>(fractions.size());
  if (fractions.size() > 1) {
    double ss = 0.0;
    for (double f : fractions) ss += (f - st.mean) * (f - st.mean);
    st.stddev = std::sqrt(ss / static_cast<double>(fractions.size() - 1));
  }
  return st;
}

std::vector<ScoredExample> pool_ligand_scores(std::span<const ScoredExample> poses,
                                              PoseMode mode) {
  std::vector<ScoredExample> out;
  std::map<std::pair<std::string, std::string>, std::size_t> slot;
  std::vector<bool> seen_rank1;
  for (const auto& p : poses) {
    auto [it, inserted] = slot.emplace(std::make_pair(p.target_id, p.ligand_id), out.size());
    if (inserted) {
      ScoredExample e = p;
      e.pose_rank.reset();
      e.rmsd.reset();
      e.score = -INFINITY;
      e.label = 0;
      out.push_back(std::move(e));
      seen_rank1.push_back(false);
    }
    ScoredExample& lig = out[it->second];
    lig.label = std::max(lig.label, p.label);
    if (mode == PoseMode::Multi) {
      lig.score = std::max(lig.score, p.score);
    } else if (p.pose_rank && *p.pose_rank == 1) {
      if (seen_rank1[it->second]) {
        throw InvalidArgument("ligand '" + p.ligand_id + "' of target '" + p.target_id +
                              "' has more than one rank-1 pose");
      }
      seen_rank1[it->second] = true;
      lig.score = p.score;
      lig.pose_rank = 1;
      lig.rmsd = p.rmsd;
    }
  }
  if (mode == PoseMode::Single) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (!seen_rank1[i]) {
        throw InvalidArgument("ligand '" + out[i].ligand_id + "' of target '" +
                              out[i].target_id + "' has no rank-1 pose");
      }
    }
  }
  return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("pearson: length mismatch");
  if (x.size() < 2) throw InvalidArgument("pearson: need at least two values");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw InvalidArgument("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

LogitValue logit(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("logit: p must lie in [0, 1]");
  LogitValue v;
  if (p < kLogitClamp) {
    p = kLogitClamp;
    v.clamped = true;
  } else if (p > 1.0 - kLogitClamp) {
    p = 1.0 - kLogitClamp;
    v.clamped = true;
  }
  v.value = std::log(p / (1.0 - p));
  return v;
}

std::vector<ScoredExample> parse_scores(std::string_view text) {
  std::vector<ScoredExample> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    auto fail = [&](const std::string& what) -> void {
      throw DataError("scores line " + std::to_string(lineno) + ": " + what);
    };
    if (tok.size() != 6) fail("expected 6 fields: target ligand pose_rank rmsd label score");
    ScoredExample e;
    e.target_id = tok[0];
    e.ligand_id = tok[1];
    if (tok[2] != "-") {
      auto r = parse_number<int>(tok[2]);
      if (!r) fail("bad pose_rank '" + tok[2] + "'");
      e.pose_rank = *r;
    }
    if (tok[3] != "-") {
      auto r = parse_number<double>(tok[3]);
      if (!r || *r < 0.0) fail("bad rmsd '" + tok[3] + "'");
      e.rmsd = *r;
    }
    auto lab = parse_number<int>(tok[4]);
    if (!lab || (*lab != 0 && *lab != 1)) fail("label must be 0 or 1");
    e.label = *lab;
    auto sc = parse_number<double>(tok[5]);
    if (!sc || !std::isfinite(*sc)) fail("bad score '" + tok[5] + "'");
    e.score = *sc;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ScoredExample> load_scores(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return parse_scores(
        std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string format_scores(std::span<const ScoredExample> examples) {
  std::ostringstream out;
  out.precision(9);
  for (const auto& e : examples) {
    out << e.target_id << '\t' << e.ligand_id << '\t';
    if (e.pose_rank) out << *e.pose_rank; else out << '-';
    out << '\t';
    if (e.rmsd) out << *e.rmsd; else out << '-';
    out << '\t' << e.label << '\t' << e.score << '\n';
  }
  return out.str();
}

std::string format_roc_points(const RocResult& roc) {
  std::ostringstream out;
  out.precision(9);
  out << "fpr\ttpr\n";
  for (const auto& p : roc.curve) out << p.fpr << '\t' << p.tpr << '\n';
  return out.str();
}

std::string evaluation_report(std::span<const ScoredExample> examples,
                              const EvaluationOptions& options,
                              std::span<const ScoredExample> compare) {
  if (examples.empty()) throw InvalidArgument("evaluate: no scored examples");
  std::ostringstream out;
  std::size_t pos = 0;
  for (const auto& e : examples) pos += e.label == 1;
  const std::size_t neg = examples.size() - pos;
  out << "poses\t" << examples.size() << '\n';
  out << "positives\t" << pos << '\n';
  out << "negatives\t" << neg << '\n';
  const bool both = pos > 0 && neg > 0;
  out << "pose_auc\t" << (both ? fmt(roc_auc(examples).auc) : "NA") << '\n';

  const auto ligands = pool_ligand_scores(examples, options.mode);
  std::size_t lpos = 0;
  for (const auto& e : ligands) lpos += e.label == 1;
  out << "ligands\t" << ligands.size() << '\n';
  out << "ligand_auc_" << (options.mode == PoseMode::Multi ? "multi" : "single") << '\t'
      << (lpos > 0 && lpos < ligands.size() ? fmt(roc_auc(ligands).auc) : "NA") << '\n';

  for (const auto& t : per_target_auc(examples)) {
    out << "target_auc\t" << t.target_id << '\t' << (t.auc ? fmt(*t.auc) : "NA") << '\n';
  }

  const bool have_rmsd = std::all_of(examples.begin(), examples.end(),
                                     [](const ScoredExample& e) { return e.rmsd.has_value(); });
  if (have_rmsd) {
    const auto groups = group_by_target(examples);
    for (int n : options.top_n) {
      Rng rng(options.seed);
      const auto base = random_baseline(groups, n, options.trials, rng);
      out << "top" << n << "\t" << fmt(intra_target_topn(groups, n)) << '\n';
      out << "random_top" << n << "_mean\t" << fmt(base.mean) << '\n';
      out << "random_top" << n << "_sd\t" << fmt(base.stddev) << '\n';
    }
    std::vector<double> lx, ry;
    for (const auto& e : examples) {
      lx.push_back(logit(e.score).value);
      ry.push_back(*e.rmsd);
    }
    double r = NAN;
    try {
      r = pearson(lx, ry);
    } catch (const InvalidArgument&) {
    }
    out << "pearson_logit_score_rmsd\t" << fmt(r) << '\n';
  }

  if (!compare.empty()) {
    std::map<std::tuple<std::string, std::string, int>, double> other;
    for (const auto& e : compare) {
      other[{e.target_id, e.ligand_id, e.pose_rank.value_or(-1)}] = e.score;
    }
    std::vector<double> a, b;
    for (const auto& e : examples) {
      auto it = other.find({e.target_id, e.ligand_id, e.pose_rank.value_or(-1)});
      if (it == other.end()) continue;
      a.push_back(logit(e.score).value);
      b.push_back(logit(it->second).value);
    }
    double r = NAN;
    if (a.size() >= 2) {
      try {
        r = pearson(a, b);
      } catch (const InvalidArgument&) {
      }
    }
    out << "compare_matched\t" << a.size() << '\n';
    out << "pearson_logit_compare\t" << fmt(r) << '\n';
  }
  return out.str();
}

std::string ranked_pose_lists(std::span<const ScoredExample> examples) {
  std::ostringstream out;
  out.precision(9);
  out << "target\trank\tligand\tpose_rank\trmsd\tlabel\tscore\n";
  for (const auto& g : group_by_target(examples)) {
    const auto order = order_by_score_desc(g);
    for (std::size_t i = 0; i < order.size(); ++i) {
      const auto& e = g[order[i]];
      out << e.target_id << '\t' << (i + 1) << '\t' << e.ligand_id << '\t';
      if (e.pose_rank) out << *e.pose_rank; else out << '-';
      out << '\t';
      if (e.rmsd) out << *e.rmsd; else out << '-';
      out << '\t' << e.label << '\t' << e.score << '\n';
    }
  }
  return out.str();
}

}  // namespace voxscore
