// Copyright 2026 The MetaEL Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "json.hpp"
#include "metael/alignment.hpp"
#include "metael/corpus.hpp"
#include "metael/error.hpp"
#include "metael/rng.hpp"
#include "metael/unified.hpp"

namespace metael {

// ---------------------------------------------------------------------------
// Precision / recall / F1
// ---------------------------------------------------------------------------

struct PrfScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t correct = 0;
  std::size_t recognised = 0;
  std::size_t gt_total = 0;

  friend bool operator==(const PrfScore&, const PrfScore&) = default;
};

// P = 0 when nothing was recognised, R = 0 when there is no gold, and
// F1 = 0 when P + R = 0.
inline PrfScore make_prf(std::size_t correct, std::size_t recognised, std::size_t gt_total) {
  PrfScore s;
  s.correct = correct;
  s.recognised = recognised;
  s.gt_total = gt_total;
  s.precision = recognised > 0 ? static_cast<double>(correct) / static_cast<double>(recognised) : 0.0;
  s.recall = gt_total > 0 ? static_cast<double>(correct) / static_cast<double>(gt_total) : 0.0;
  const double sum = s.precision + s.recall;
  s.f1 = sum > 0.0 ? 2.0 * s.precision * s.recall / sum : 0.0;
  return s;
}

inline nlohmann::json to_json(const PrfScore& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1},
          {"correct", s.correct},     {"recognised", s.recognised}, {"gt_total", s.gt_total}};
}

// Scores an annotation list against the gold standard. An output annotation
// is correct when the gold mention it aligns with carries the same entity.
inline PrfScore el_prf(const std::vector<EntityAnnotation>& output, const GroundTruth& gt,
                       AlignmentMode mode = AlignmentMode::kStrong) {
  const AnnotationSet sets[] = {{"output", output}};
  const auto groups = build_mention_groups(sets, gt, mode);
  std::size_t correct = 0;
  for (const auto& g : groups) {
    if (g.system_correct("output")) ++correct;
  }
  return make_prf(correct, output.size(), gt.annotations.size());
}

inline PrfScore el_prf(const UnifiedAnnotationSet& output, const GroundTruth& gt,
                       AlignmentMode mode = AlignmentMode::kStrong) {
  return el_prf(output.plain(), gt, mode);
}

inline PrfScore el_prf(const AnnotationSet& output, const GroundTruth& gt,
                       AlignmentMode mode = AlignmentMode::kStrong) {
  return el_prf(output.annotations, gt, mode);
}

// ---------------------------------------------------------------------------
// Multi-label diagnostics
// ---------------------------------------------------------------------------

using LabelSet = std::set<std::string>;

struct MultiLabelReport {
  double jaccard = 0.0;
  double hamming_loss = 0.0;
  double exact_match = 0.0;
  std::map<std::string, PrfScore> per_class;
  double real_prediction_accuracy = 0.0;
  std::size_t predictions = 0;  // instances with a chosen system
  std::size_t instances = 0;
};

// Jaccard counts an instance with empty predicted and true sets as 1.
// chosen and groups may be empty; otherwise they align with the label lists
// and feed the real prediction accuracy (chosen system gives the gold entity).
inline MultiLabelReport multilabel_metrics(std::span<const LabelSet> predicted,
                                           std::span<const LabelSet> truth,
                                           std::span<const std::string> labels,
                                           std::span<const std::optional<std::string>> chosen = {},
                                           std::span<const MentionGroup> groups = {}) {
  if (predicted.size() != truth.size()) {
    throw ValidationError("multilabel_metrics: predicted and truth lengths differ");
  }
  if (chosen.size() != groups.size() || (!chosen.empty() && chosen.size() != truth.size())) {
    throw ValidationError("multilabel_metrics: chosen/groups must align with the label lists");
  }
  if (labels.empty()) throw ValidationError("multilabel_metrics: no labels");
  MultiLabelReport r;
  r.instances = truth.size();
  const double n_labels = static_cast<double>(labels.size());
  std::map<std::string, std::array<std::size_t, 3>> counts;  // tp, fp, fn
  for (const auto& l : labels) counts[l] = {0, 0, 0};
  double jac = 0.0;
  double ham = 0.0;
  std::size_t exact = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto& p = predicted[i];
    const auto& t = truth[i];
    std::size_t inter = 0;
    for (const auto& l : p) inter += t.count(l);
    const std::size_t uni = p.size() + t.size() - inter;
    const std::size_t sym = uni - inter;
    jac += uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
    ham += static_cast<double>(sym) / n_labels;
    if (sym == 0) ++exact;
    for (const auto& l : labels) {
      const bool in_p = p.count(l) > 0;
      const bool in_t = t.count(l) > 0;
      auto& c = counts[l];
      if (in_p && in_t) ++c[0];
      if (in_p && !in_t) ++c[1];
      if (!in_p && in_t) ++c[2];
    }
  }
  if (!truth.empty()) {
    const double n = static_cast<double>(truth.size());
    r.jaccard = jac / n;
    r.hamming_loss = ham / n;
    r.exact_match = static_cast<double>(exact) / n;
  }
  for (const auto& [l, c] : counts) r.per_class[l] = make_prf(c[0], c[0] + c[1], c[0] + c[2]);
  std::size_t right = 0;
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    if (!chosen[i]) continue;
    ++r.predictions;
    if (groups[i].system_correct(*chosen[i])) ++right;
  }
  if (r.predictions > 0) {
    r.real_prediction_accuracy = static_cast<double>(right) / static_cast<double>(r.predictions);
  }
  return r;
}

inline nlohmann::json to_json(const MultiLabelReport& r) {
  nlohmann::json per = nlohmann::json::object();
  for (const auto& [l, s] : r.per_class) per[l] = to_json(s);
  return {{"jaccard", r.jaccard},
          {"hamming_loss", r.hamming_loss},
          {"exact_match", r.exact_match},
          {"per_class", per},
          {"real_prediction_accuracy", r.real_prediction_accuracy},
          {"predictions", r.predictions},
          {"instances", r.instances}};
}

// ---------------------------------------------------------------------------
// Binary diagnostics
// ---------------------------------------------------------------------------

struct BinaryReport {
  PrfScore true_class;
  PrfScore false_class;
  double macro_f1 = 0.0;
  // Classes entering the macro average. A class absent from the truth is
  // included (with F1 = 0) only if it was predicted at least once.
  bool true_in_macro = false;
  bool false_in_macro = false;
};

inline BinaryReport binary_metrics(const std::vector<bool>& predictions, const std::vector<bool>& truth) {
  if (predictions.size() != truth.size()) {
    throw ValidationError("binary_metrics: predictions and truth lengths differ");
  }
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predictions[i] && truth[i]) ++tp;
    if (predictions[i] && !truth[i]) ++fp;
    if (!predictions[i] && truth[i]) ++fn;
    if (!predictions[i] && !truth[i]) ++tn;
  }
  BinaryReport r;
  r.true_class = make_prf(tp, tp + fp, tp + fn);
  r.false_class = make_prf(tn, tn + fn, tn + fp);
  r.true_in_macro = (tp + fn) > 0 || (tp + fp) > 0;
  r.false_in_macro = (tn + fp) > 0 || (tn + fn) > 0;
  double sum = 0.0;
  int k = 0;
  if (r.true_in_macro) {
    sum += r.true_class.f1;
    ++k;
  }
  if (r.false_in_macro) {
    sum += r.false_class.f1;
    ++k;
  }
  r.macro_f1 = k > 0 ? sum / k : 0.0;
  return r;
}

inline nlohmann::json to_json(const BinaryReport& r) {
  return {{"true", to_json(r.true_class)}, {"false", to_json(r.false_class)}, {"macro_f1", r.macro_f1}};
}

// ---------------------------------------------------------------------------
// Significance
// ---------------------------------------------------------------------------

struct SignificanceResult {
  std::vector<double> split_scores_a;
  std::vector<double> split_scores_b;
  double t_statistic = 0.0;
  double p_value = 1.0;
  double alpha = 0.05;
  bool degenerate = false;  // zero variance of the differences

  bool significant() const { return p_value < alpha; }
};

// Two-sided p-value of a t statistic with the given degrees of freedom.
inline double t_two_sided_p(double t, double dof) {
  if (std::isnan(t)) return 1.0;
  if (std::isinf(t)) return 0.0;
  if (t == 0.0) return 1.0;
  boost::math::students_t dist(dof);
  const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
  return std::clamp(p, 0.0, 1.0);
}

// Paired t-test on already computed per-split scores.
inline SignificanceResult paired_t_test_scores(std::vector<double> a, std::vector<double> b,
                                               double alpha = 0.05) {
  if (a.size() != b.size()) throw ValidationError("paired t-test: score vectors differ in length");
  if (a.size() < 2) throw ValidationError("paired t-test: need at least two splits");
  SignificanceResult r;
  r.alpha = alpha;
  const std::size_t k = a.size();
  std::vector<double> d(k);
  for (std::size_t i = 0; i < k; ++i) d[i] = a[i] - b[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(k);
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(k - 1));
  if (sd == 0.0) {
    r.degenerate = true;
    if (mean == 0.0) {
      r.t_statistic = 0.0;
      r.p_value = 1.0;
    } else {
      r.t_statistic = mean > 0 ? std::numeric_limits<double>::infinity()
                               : -std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
    }
  } else {
    r.t_statistic = mean / (sd / std::sqrt(static_cast<double>(k)));
    r.p_value = t_two_sided_p(r.t_statistic, static_cast<double>(k - 1));
  }
  r.split_scores_a = std::move(a);
  r.split_scores_b = std::move(b);
  return r;
}

// Assignment of gold annotations to n_splits equal-count splits. Gold is
// ordered by (doc, position) and cut into contiguous runs; the first
// (N mod n_splits) splits take one extra annotation. With a shuffle seed the
// order is permuted first.
struct SplitPlan {
  std::size_t n_splits = 0;
  std::map<MentionKey, std::size_t> gold_split;
  std::vector<MentionKey> boundaries;  // first key of each split (contiguous mode)
  std::optional<std::uint64_t> shuffle_seed;

  // Split of an arbitrary mention: its gold split when it is gold, else the
  // key range it falls in (contiguous) or a seeded hash (shuffled).
  std::size_t split_of(const MentionKey& key) const {
    if (auto it = gold_split.find(key); it != gold_split.end()) return it->second;
    if (shuffle_seed) {
      const std::string k = key.doc_id + '\x1f' + std::to_string(key.position) + '\x1f' + key.surface;
      return derive_seed(*shuffle_seed, k) % n_splits;
    }
    auto it = std::upper_bound(boundaries.begin(), boundaries.end(), key);
    return it == boundaries.begin() ? 0 : static_cast<std::size_t>(it - boundaries.begin()) - 1;
  }
};

inline SplitPlan make_split_plan(const GroundTruth& gt, std::size_t n_splits,
                                 std::optional<std::uint64_t> shuffle_seed = std::nullopt) {
  if (n_splits < 2) throw ValidationError("need at least two splits");
  if (gt.annotations.size() < n_splits) {
    throw ValidationError("ground truth has " + std::to_string(gt.annotations.size()) +
                          " annotations, fewer than " + std::to_string(n_splits) + " splits");
  }
  std::vector<MentionKey> keys;
  keys.reserve(gt.annotations.size());
  for (const auto& a : gt.annotations) keys.push_back(key_of(a.mention));
  std::sort(keys.begin(), keys.end());
  if (shuffle_seed) {
    Rng rng(*shuffle_seed);
    for (std::size_t i = keys.size(); i > 1; --i) std::swap(keys[i - 1], keys[uniform_index(rng, i)]);
  }
  SplitPlan plan;
  plan.n_splits = n_splits;
  plan.shuffle_seed = shuffle_seed;
  const std::size_t base = keys.size() / n_splits;
  const std::size_t extra = keys.size() % n_splits;
  std::size_t pos = 0;
  for (std::size_t s = 0; s < n_splits; ++s) {
    const std::size_t len = base + (s < extra ? 1 : 0);
    plan.boundaries.push_back(keys[pos]);
    for (std::size_t i = 0; i < len; ++i) plan.gold_split.emplace(keys[pos + i], s);
    pos += len;
  }
  return plan;
}

// F1 per split for each output, computed on one shared alignment.
inline std::vector<std::vector<double>> split_f1_scores(
    std::span<const std::vector<EntityAnnotation>> outputs, const GroundTruth& gt,
    const SplitPlan& plan, AlignmentMode mode = AlignmentMode::kStrong) {
  std::vector<AnnotationSet> sets;
  for (std::size_t i = 0; i < outputs.size(); ++i) sets.push_back({"out" + std::to_string(i), outputs[i]});
  const auto groups = build_mention_groups(sets, gt, mode);
  const std::size_t k = plan.n_splits;
  std::vector<std::vector<std::size_t>> correct(outputs.size(), std::vector<std::size_t>(k));
  std::vector<std::vector<std::size_t>> recognised(outputs.size(), std::vector<std::size_t>(k));
  std::vector<std::size_t> gold(k);
  for (const auto& g : groups) {
    const std::size_t s = plan.split_of(key_of(g.mention));
    if (g.gold) ++gold[s];
    for (std::size_t i = 0; i < sets.size(); ++i) {
      if (g.entity_of(sets[i].system_id) == nullptr) continue;
      ++recognised[i][s];
      if (g.system_correct(sets[i].system_id)) ++correct[i][s];
    }
  }
  std::vector<std::vector<double>> out(outputs.size(), std::vector<double>(k));
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    for (std::size_t s = 0; s < k; ++s) out[i][s] = make_prf(correct[i][s], recognised[i][s], gold[s]).f1;
  }
  return out;
}

inline SignificanceResult paired_t_test(const std::vector<EntityAnnotation>& a,
                                        const std::vector<EntityAnnotation>& b, const GroundTruth& gt,
                                        std::size_t n_splits = 20, double alpha = 0.05,
                                        AlignmentMode mode = AlignmentMode::kStrong,
                                        std::optional<std::uint64_t> shuffle_seed = std::nullopt) {
  const auto plan = make_split_plan(gt, n_splits, shuffle_seed);
  const std::vector<EntityAnnotation> outs[] = {a, b};
  auto scores = split_f1_scores(outs, gt, plan, mode);
  return paired_t_test_scores(std::move(scores[0]), std::move(scores[1]), alpha);
}

inline SignificanceResult paired_t_test(const UnifiedAnnotationSet& a, const UnifiedAnnotationSet& b,
                                        const GroundTruth& gt, std::size_t n_splits = 20,
                                        double alpha = 0.05,
                                        AlignmentMode mode = AlignmentMode::kStrong,
                                        std::optional<std::uint64_t> shuffle_seed = std::nullopt) {
  return paired_t_test(a.plain(), b.plain(), gt, n_splits, alpha, mode, shuffle_seed);
}

inline nlohmann::json to_json(const SignificanceResult& r) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
  };
  return {{"split_scores_a", r.split_scores_a},
          {"split_scores_b", r.split_scores_b},
          {"t_statistic", num(r.t_statistic)},
          {"p_value", r.p_value},
          {"alpha", r.alpha},
          {"degenerate", r.degenerate},
          {"significant", r.significant()}};
}

// ---------------------------------------------------------------------------
// Text / CSV tables
// ---------------------------------------------------------------------------

struct ScoreRow {
  std::string name;
  PrfScore score;
};

inline std::string render_prf_table(std::span<const ScoreRow> rows, const std::string& header = "Method") {
  std::size_t width = header.size();
  for (const auto& r : rows) width = std::max(width, r.name.size());
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(width + 2)) << header << std::right << std::setw(8)
     << "P (%)" << std::setw(8) << "R (%)" << std::setw(8) << "F1 (%)" << '\n';
  os << std::fixed << std::setprecision(1);
  for (const auto& r : rows) {
    os << std::left << std::setw(static_cast<int>(width + 2)) << r.name << std::right << std::setw(8)
       << 100.0 * r.score.precision << std::setw(8) << 100.0 * r.score.recall << std::setw(8)
       << 100.0 * r.score.f1 << '\n';
  }
  return os.str();
}

inline std::string render_prf_csv(std::span<const ScoreRow> rows, const std::string& header = "method") {
  std::ostringstream os;
  os << header << ",precision,recall,f1,correct,recognised,gt_total\n";
  os << std::setprecision(17);
  for (const auto& r : rows) {
    std::string name = r.name;
    if (name.find_first_of(",\"") != std::string::npos) {
      std::string q = "\"";
      for (char c : name) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      name = q + "\"";
    }
    os << name << ',' << r.score.precision << ',' << r.score.recall << ',' << r.score.f1 << ','
       << r.score.correct << ',' << r.score.recognised << ',' << r.score.gt_total << '\n';
  }
  return os.str();
}

inline std::string render_multilabel_table(const MultiLabelReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1);
  auto row = [&](const std::string& label, double v) {
    os << std::left << std::setw(40) << label << std::right << std::setw(8) << 100.0 * v << '\n';
  };
  row("Jaccard Index (%)", r.jaccard);
  row("Hamming Loss (%)", r.hamming_loss);
  row("Exact Match (%)", r.exact_match);
  for (const auto& [l, s] : r.per_class) row("Precision (%) of " + l + " class", s.precision);
  for (const auto& [l, s] : r.per_class) row("Recall (%) of " + l + " class", s.recall);
  for (const auto& [l, s] : r.per_class) row("F1 (%) of " + l + " class", s.f1);
  row("Real Prediction Accuracy (%)", r.real_prediction_accuracy);
  return os.str();
}

inline std::string render_binary_table(const std::map<std::string, BinaryReport>& reports) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1);
  auto row = [&](const std::string& label, double v) {
    os << std::left << std::setw(48) << label << std::right << std::setw(8) << 100.0 * v << '\n';
  };
  for (const auto& [sys, r] : reports) {
    row(sys + " - Precision (%) of true class", r.true_class.precision);
    row(sys + " - Precision (%) of false class", r.false_class.precision);
    row(sys + " - Recall (%) of true class", r.true_class.recall);
    row(sys + " - Recall (%) of false class", r.false_class.recall);
    row(sys + " - F1 (%) of true class", r.true_class.f1);
    row(sys + " - F1 (%) of false class", r.false_class.f1);
  }
  for (const auto& [sys, r] : reports) row(sys + " - Macro-averaged F1 (%)", r.macro_f1);
  return os.str();
}

}  // namespace metael
