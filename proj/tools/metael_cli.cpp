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

// Command-line front end: stats | train | annotate | evaluate | ablate |
// ttest | synth. Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "metael/ablation.hpp"
#include "metael/alignment.hpp"
#include "metael/baselines.hpp"
#include "metael/corpus.hpp"
#include "metael/error.hpp"
#include "metael/evaluation.hpp"
#include "metael/features.hpp"
#include "metael/pipeline.hpp"
#include "metael/synth.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace metael;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

void write_file(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create '" + path.parent_path().string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void require_exists(const fs::path& p, const std::string& what) {
  if (!fs::exists(p)) throw IoError(what + " '" + p.string() + "' does not exist");
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

// Paths and data of one split as named in the config file.
struct SplitPaths {
  fs::path documents;
  std::optional<fs::path> ground_truth;
  std::map<std::string, fs::path> annotations;
};

// Flags shared by the data-driven subcommands; unset values fall back to
// the config file.
struct Overrides {
  std::string config;
  std::string alignment;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

class RunConfig {
 public:
  static RunConfig load(const Overrides& o) {
    const fs::path path(o.config);
    require_exists(path, "config file");
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path.string() + "'");
    RunConfig c;
    try {
      c.j_ = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ValidationError(path.string() + ": malformed JSON: " + e.what());
    }
    if (!c.j_.is_object()) throw ValidationError(path.string() + ": config must be a JSON object");
    c.base_ = path.has_parent_path() ? path.parent_path() : fs::path(".");
    c.source_ = path.string();

    if (!c.j_.contains("systems") || !c.j_["systems"].is_array() || c.j_["systems"].empty()) {
      throw ValidationError(c.source_ + ": 'systems' must be a non-empty list");
    }
    c.systems_ = c.j_["systems"].get<std::vector<std::string>>();
    if (std::set<std::string>(c.systems_.begin(), c.systems_.end()).size() != c.systems_.size()) {
      throw ValidationError(c.source_ + ": duplicate entry in 'systems'");
    }
    c.mode_ = parse_alignment_mode(o.alignment.empty() ? c.j_.value("alignment", std::string("strong"))
                                                       : o.alignment);
    c.seed_ = o.seed ? *o.seed : c.j_.value("seed", std::uint64_t{1});
    c.out_dir_ = o.out_dir.empty() ? c.resolve(c.j_.value("output_dir", std::string("out"))) : fs::path(o.out_dir);
    return c;
  }

  const std::vector<std::string>& systems() const { return systems_; }
  AlignmentMode mode() const { return mode_; }
  std::uint64_t seed() const { return seed_; }
  const fs::path& out_dir() const { return out_dir_; }
  const json& raw() const { return j_; }

  // Validates the split section and checks every referenced file exists.
  SplitPaths split(const std::string& name, bool need_gold) const {
    if (!j_.contains(name) || !j_[name].is_object()) {
      throw ValidationError(source_ + ": missing '" + name + "' section");
    }
    const json& s = j_[name];
    SplitPaths p;
    if (!s.contains("documents")) throw ValidationError(source_ + ": '" + name + ".documents' is required");
    p.documents = resolve(s["documents"].get<std::string>());
    if (s.contains("ground_truth") && !s["ground_truth"].is_null()) {
      p.ground_truth = resolve(s["ground_truth"].get<std::string>());
    }
    if (need_gold && !p.ground_truth) {
      throw ValidationError(source_ + ": '" + name + "' split has no ground truth");
    }
    if (!s.contains("annotations") || !s["annotations"].is_object()) {
      throw ValidationError(source_ + ": '" + name + ".annotations' must map system ids to files");
    }
    for (const auto& [sys, file] : s["annotations"].items()) {
      if (std::find(systems_.begin(), systems_.end(), sys) == systems_.end()) {
        throw ValidationError(source_ + ": annotation file for unknown system '" + sys + "' in '" + name + "'");
      }
      p.annotations[sys] = resolve(file.get<std::string>());
    }
    for (const auto& sys : systems_) {
      if (!p.annotations.count(sys)) {
        throw ValidationError(source_ + ": no annotation file for system '" + sys + "' in '" + name + "'");
      }
    }
    require_exists(p.documents, "documents file");
    if (p.ground_truth) require_exists(*p.ground_truth, "ground-truth file");
    for (const auto& [sys, f] : p.annotations) require_exists(f, "annotation file of system '" + sys + "'");
    return p;
  }

  CandidateDictionary candidates() const {
    if (!j_.contains("candidates") || j_["candidates"].is_null()) return {};
    const auto p = resolve(j_["candidates"].get<std::string>());
    require_exists(p, "candidate dictionary");
    return load_candidate_dictionary(p);
  }

  // Learner and combination settings: config sections first, then flags.
  MetaElParams params() const {
    MetaElParams p;
    const json forest = j_.value("forest", json::object());
    const json margin = j_.value("margin", json::object());
    p.forest = forest_params_from_json(forest);
    p.margin = margin_params_from_json(margin);
    if (!forest.contains("seed")) p.forest.seed = derive_seed(seed_, "forest");
    if (!margin.contains("seed")) p.margin.seed = derive_seed(seed_, "margin");
    p.config = config_from_json(j_.value("metael", json::object()));
    p.config.mode = mode_;
    return p;
  }

  fs::path resolve(const std::string& p) const {
    const fs::path path(p);
    return path.is_absolute() ? path : base_ / path;
  }

 private:
  json j_;
  fs::path base_;
  std::string source_;
  std::vector<std::string> systems_;
  AlignmentMode mode_ = AlignmentMode::kStrong;
  std::uint64_t seed_ = 1;
  fs::path out_dir_;
};

struct SplitData {
  Corpus corpus;
  std::optional<GroundTruth> gt;
  std::vector<AnnotationSet> sets;
};

SplitData load_split(const RunConfig& cfg, const std::string& name, bool need_gold) {
  const auto paths = cfg.split(name, need_gold);
  SplitData d{Corpus(load_corpus(paths.documents)), std::nullopt, {}};
  if (paths.ground_truth) d.gt = load_ground_truth(*paths.ground_truth, d.corpus);
  if (need_gold && d.gt->annotations.empty()) {
    throw ValidationError("ground truth of the '" + name + "' split is empty");
  }
  for (const auto& sys : cfg.systems()) d.sets.push_back(load_annotation_set(paths.annotations.at(sys), sys, d.corpus));
  return d;
}

std::vector<MentionGroup> groups_of(const SplitData& d, AlignmentMode mode, bool with_gold) {
  return build_mention_groups(d.corpus, d.sets, with_gold && d.gt ? &*d.gt : nullptr, mode);
}

MetaElModel read_model(const std::string& path, const RunConfig& cfg) {
  auto model = load_model(path);
  if (model.systems != cfg.systems()) {
    std::string want, got;
    for (const auto& s : cfg.systems()) want += (want.empty() ? "" : ",") + s;
    for (const auto& s : model.systems) got += (got.empty() ? "" : ",") + s;
    throw ValidationError("model systems [" + got + "] do not match config systems [" + want + "]");
  }
  return model;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void check_format(const std::string& f) {
  if (f != "text" && f != "json" && f != "csv") throw ValidationError("unknown format '" + f + "'");
}

// Adds the flags shared by every config-driven subcommand.
void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config, "Run configuration (JSON); relative paths resolve against its directory")
      ->required();
  cmd->add_option("--alignment", o.alignment, "Mention alignment mode: strong or overlap (default: config)");
  cmd->add_option("--seed", o.seed, "Master seed (default: config 'seed')");
  cmd->add_option("--out-dir", o.out_dir, "Directory for report files (default: config 'output_dir')");
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

struct StatsArgs {
  Overrides o;
  std::string split = "test";
  std::string format = "text";
};

int cmd_stats(const StatsArgs& a) {
  check_format(a.format);
  const auto cfg = RunConfig::load(a.o);
  const auto data = load_split(cfg, a.split, false);
  const auto groups = groups_of(data, cfg.mode(), true);
  const auto report = agreement_statistics(groups, cfg.systems().size());
  const auto table = render_table(report);
  write_file(cfg.out_dir() / ("stats_" + a.split + ".json"), dump(to_json(report)));
  write_file(cfg.out_dir() / ("stats_" + a.split + ".txt"), table);
  std::cout << (a.format == "json" ? dump(to_json(report)) : table);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
  Overrides o;
  std::string model;
  std::optional<std::size_t> trees;
  std::optional<std::size_t> max_depth;
  std::optional<std::size_t> min_leaf;
  std::optional<double> c;
  bool balance = false;
  std::string features;
  bool no_binary = false;
  bool no_short_circuit = false;
  bool exclude_empty = false;
};

json training_summary(const MetaElModel& m, std::span<const MentionGroup> groups) {
  json per = json::object();
  std::size_t ml = 0;
  std::map<std::string, std::size_t> label_pos, bin_pos, bin_neg;
  for (const auto& g : groups) {
    if (!g.gold) continue;
    if (g.recognisers() >= 2) {
      ++ml;
      for (const auto& s : correct_systems(g)) ++label_pos[s];
    }
    for (const auto& s : m.systems) {
      if (g.entity_of(s) == nullptr) continue;
      ++(g.system_correct(s) ? bin_pos : bin_neg)[s];
    }
  }
  for (const auto& s : m.systems) {
    const auto& st = m.stats.at(s);
    per[s] = {{"overall", to_json(st.overall)},
              {"multilabel_positive", label_pos[s]},
              {"binary_true", bin_pos[s]},
              {"binary_false", bin_neg[s]},
              {"constant_accept", m.constant_accept.count(s) > 0}};
  }
  return {{"systems", m.systems},
          {"multilabel_instances", ml},
          {"per_system", per},
          {"config", to_json(m.config)},
          {"forest", to_json(m.params.forest)},
          {"margin", to_json(m.params.margin)}};
}

int cmd_train(const TrainArgs& a) {
  const auto cfg = RunConfig::load(a.o);
  auto params = cfg.params();
  if (a.trees) params.forest.n_trees = *a.trees;
  if (a.max_depth) params.forest.max_depth = *a.max_depth;
  if (a.min_leaf) params.forest.min_leaf = *a.min_leaf;
  if (a.c) params.margin.c = *a.c;
  if (a.balance) params.margin.balance_classes = true;
  if (a.no_binary) params.train_binary = false;
  if (a.no_short_circuit) params.config.short_circuit_unanimous = false;
  if (a.exclude_empty) params.config.include_empty_label_sets = false;
  if (!a.features.empty()) {
    std::vector<std::string> names;
    std::stringstream ss(a.features);
    for (std::string n; std::getline(ss, n, ',');) names.push_back(n);
    params.config.mask = FeatureMask::from_names(names);
  }
  if (params.forest.n_trees == 0) throw ValidationError("--trees must be positive");
  if (!(params.margin.c > 0)) throw ValidationError("--svm-c must be positive");

  const auto data = load_split(cfg, "train", true);
  const auto groups = groups_of(data, cfg.mode(), true);
  const auto model = train_metael(data.corpus, groups, cfg.systems(), cfg.candidates(), params);
  const fs::path out = a.model.empty() ? cfg.out_dir() / "model.json" : fs::path(a.model);
  save_model(model, out);
  const auto summary = training_summary(model, groups);
  write_file(cfg.out_dir() / "training_summary.json", dump(summary));

  std::cout << "model written to " << out.string() << "\n";
  std::cout << "multi-label training instances: " << summary["multilabel_instances"].get<std::size_t>() << "\n";
  std::vector<ScoreRow> rows;
  for (const auto& s : model.systems) rows.push_back({s, model.stats.at(s).overall});
  std::cout << render_prf_table(rows, "System (train)");
  for (const auto& s : model.constant_accept) {
    std::cout << "note: " << s << " has one-class binary data; constant-accept classifier used\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// annotate
// ---------------------------------------------------------------------------

struct AnnotateArgs {
  Overrides o;
  std::string model;
  std::string strategy = "loose";
  std::string split = "test";
  std::string output;
  bool mean_vote = false;
};

// Training-set precision/F1 per system, for baselines that weight systems.
SystemTrainingStats priors_from_train(const RunConfig& cfg) {
  const auto data = load_split(cfg, "train", true);
  const auto groups = groups_of(data, cfg.mode(), true);
  return build_training_stats(groups, cfg.systems());
}

int cmd_annotate(const AnnotateArgs& a) {
  const auto cfg = RunConfig::load(a.o);
  const bool learned = a.strategy == "loose" || a.strategy == "strict";
  const auto kind = parse_baseline_kind(a.strategy);
  if (!learned && !kind) {
    std::string all = "loose, strict";
    for (auto k : kAllBaselines) all += ", " + std::string(to_string(k));
    throw ValidationError("unknown strategy '" + a.strategy + "' (expected one of: " + all + ")");
  }
  if (learned && a.model.empty()) throw ValidationError("--model is required for strategy '" + a.strategy + "'");
  const bool gold = kind == BaselineKind::kUpperBound;
  if (gold) {
    const auto paths = cfg.split(a.split, false);
    if (!paths.ground_truth) {
      throw ValidationError("strategy 'upper_bound' needs ground truth for the '" + a.split + "' split");
    }
  }
  std::optional<MetaElModel> model;
  if (!a.model.empty()) model = read_model(a.model, cfg);

  const auto data = load_split(cfg, a.split, gold);
  UnifiedAnnotationSet out;
  if (learned) {
    const auto groups = groups_of(data, model->config.mode, false);
    const auto cand = cfg.candidates();
    const CorpusIndex index(data.corpus, groups);
    out = annotate(*model, groups, {index, cand}, a.strategy == "loose" ? Strategy::kLoose : Strategy::kStrict);
  } else {
    const auto groups = groups_of(data, cfg.mode(), gold);
    BaselinePolicy policy{*kind, std::nullopt, derive_seed(cfg.seed(), "baseline"), a.mean_vote};
    if (needs_priors(*kind)) policy.priors = model ? model->stats : priors_from_train(cfg);
    out = apply_baseline(policy, groups);
  }
  const fs::path path = a.output.empty() ? cfg.out_dir() / (a.strategy + "_" + a.split + ".jsonl") : fs::path(a.output);
  std::ostringstream os;
  write_unified(os, out);
  write_file(path, os.str());
  std::map<std::string, std::size_t> by_path;
  for (const auto& u : out.annotations) ++by_path[u.path];
  std::cout << out.size() << " annotations written to " << path.string() << "\n";
  for (const auto& [p, n] : by_path) std::cout << "  " << p << ": " << n << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate / ttest
// ---------------------------------------------------------------------------

struct Output {
  std::string name;
  std::vector<EntityAnnotation> annotations;
};

// Output files use the annotation record format; extra fields are ignored
// and null entities count as abstentions.
std::vector<Output> load_outputs(const std::vector<std::string>& files, const Corpus& corpus) {
  std::vector<Output> out;
  std::set<std::string> names;
  for (const auto& f : files) {
    require_exists(f, "output file");
    std::string name = fs::path(f).stem().string();
    for (int k = 2; names.count(name); ++k) name = fs::path(f).stem().string() + "#" + std::to_string(k);
    names.insert(name);
    out.push_back({name, load_ground_truth(f, corpus).annotations});
  }
  return out;
}

struct EvaluateArgs {
  Overrides o;
  std::vector<std::string> outputs;
  std::string split = "test";
  std::string format = "text";
  std::string model;
  bool with_systems = false;
  std::size_t n_splits = 20;
  double alpha = 0.05;
  std::optional<std::uint64_t> shuffle_seed;
};

void check_ttest_args(std::size_t n_splits, double alpha) {
  if (n_splits < 2) throw ValidationError("--n-splits must be at least 2");
  if (!(alpha > 0 && alpha < 1)) throw ValidationError("--alpha must lie in (0, 1)");
}

std::string render_ttest(const std::string& a, const std::string& b, const SignificanceResult& r) {
  std::ostringstream os;
  os << a << " vs " << b << ": t = " << r.t_statistic << ", p = " << r.p_value
     << (r.significant() ? " (significant" : " (not significant") << " at alpha = " << r.alpha << ")"
     << (r.degenerate ? " [zero variance]" : "") << "\n";
  return os.str();
}

int cmd_evaluate(const EvaluateArgs& a) {
  check_format(a.format);
  check_ttest_args(a.n_splits, a.alpha);
  const auto cfg = RunConfig::load(a.o);
  std::optional<MetaElModel> model;
  if (!a.model.empty()) model = read_model(a.model, cfg);
  const auto data = load_split(cfg, a.split, true);
  const auto& gt = *data.gt;

  auto outputs = load_outputs(a.outputs, data.corpus);
  if (a.with_systems) {
    for (const auto& s : data.sets) outputs.push_back({s.system_id, s.annotations});
  }
  if (outputs.empty()) throw ValidationError("nothing to evaluate: pass output files or --with-systems");

  std::vector<ScoreRow> rows;
  json jrows = json::array();
  for (const auto& o : outputs) {
    rows.push_back({o.name, el_prf(o.annotations, gt, cfg.mode())});
    jrows.push_back({{"method", o.name}, {"score", to_json(rows.back().score)}});
  }
  json report = {{"split", a.split}, {"alignment", std::string(to_string(cfg.mode()))}, {"results", jrows}};

  std::string text = render_prf_table(rows);
  if (outputs.size() >= 2) {
    const auto plan = make_split_plan(gt, a.n_splits, a.shuffle_seed);
    std::vector<std::vector<EntityAnnotation>> anns;
    for (const auto& o : outputs) anns.push_back(o.annotations);
    const auto scores = split_f1_scores(anns, gt, plan, cfg.mode());
    json tests = json::array();
    text += "\nPaired t-tests over " + std::to_string(a.n_splits) + " splits\n";
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      for (std::size_t k = i + 1; k < outputs.size(); ++k) {
        const auto r = paired_t_test_scores(scores[i], scores[k], a.alpha);
        json t = to_json(r);
        t["a"] = outputs[i].name;
        t["b"] = outputs[k].name;
        tests.push_back(t);
        text += render_ttest(outputs[i].name, outputs[k].name, r);
      }
    }
    report["significance"] = tests;
  }
  if (model) {
    const auto groups = groups_of(data, model->config.mode, true);
    const auto cand = cfg.candidates();
    const CorpusIndex index(data.corpus, groups);
    const AnnotationContext ctx{index, cand};
    const auto ml = multilabel_diagnostics(*model, groups, ctx);
    report["multilabel"] = to_json(ml);
    text += "\nMulti-label classifier\n" + render_multilabel_table(ml);
    if (!model->per_system_binary.empty()) {
      const auto bin = binary_diagnostics(*model, groups, ctx);
      json jb = json::object();
      for (const auto& [s, r] : bin) jb[s] = to_json(r);
      report["binary"] = jb;
      text += "\nBinary classifiers\n" + render_binary_table(bin);
    }
  }
  const auto csv = render_prf_csv(rows);
  write_file(cfg.out_dir() / "evaluation.json", dump(report));
  write_file(cfg.out_dir() / "evaluation.csv", csv);
  write_file(cfg.out_dir() / "evaluation.txt", text);
  std::cout << (a.format == "json" ? dump(report) : a.format == "csv" ? csv : text);
  return kExitOk;
}

struct TtestArgs {
  Overrides o;
  std::string a, b;
  std::string split = "test";
  std::string format = "text";
  std::size_t n_splits = 20;
  double alpha = 0.05;
  std::optional<std::uint64_t> shuffle_seed;
};

int cmd_ttest(const TtestArgs& a) {
  check_format(a.format);
  check_ttest_args(a.n_splits, a.alpha);
  const auto cfg = RunConfig::load(a.o);
  const auto data = load_split(cfg, a.split, true);
  const auto outs = load_outputs({a.a, a.b}, data.corpus);
  const auto r = paired_t_test(outs[0].annotations, outs[1].annotations, *data.gt, a.n_splits, a.alpha,
                               cfg.mode(), a.shuffle_seed);
  json j = to_json(r);
  j["a"] = outs[0].name;
  j["b"] = outs[1].name;
  write_file(cfg.out_dir() / "ttest.json", dump(j));
  if (a.format == "json") {
    std::cout << dump(j);
  } else if (a.format == "csv") {
    std::cout << "split," << outs[0].name << "," << outs[1].name << "\n";
    for (std::size_t i = 0; i < r.split_scores_a.size(); ++i) {
      std::cout << i << "," << r.split_scores_a[i] << "," << r.split_scores_b[i] << "\n";
    }
  } else {
    std::cout << render_ttest(outs[0].name, outs[1].name, r);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// ablate
// ---------------------------------------------------------------------------

struct AblateArgs {
  Overrides o;
  std::string format = "text";
  std::optional<std::size_t> trees;
};

int cmd_ablate(const AblateArgs& a) {
  check_format(a.format);
  const auto cfg = RunConfig::load(a.o);
  auto params = cfg.params();
  if (a.trees) params.forest.n_trees = *a.trees;
  if (params.forest.n_trees == 0) throw ValidationError("--trees must be positive");
  const auto train = load_split(cfg, "train", true);
  const auto test = load_split(cfg, "test", true);
  const auto train_groups = groups_of(train, cfg.mode(), true);
  const auto test_groups = groups_of(test, cfg.mode(), false);
  const auto masks = standard_ablation_masks();
  const AblationData data{train.corpus, train_groups, test.corpus, test_groups, *test.gt};
  const auto rows = ablation_run(data, cfg.systems(), cfg.candidates(), params, masks);
  const auto score_rows = to_score_rows(rows);
  const auto text = render_prf_table(score_rows, "Features");
  const auto csv = render_prf_csv(score_rows, "features");
  write_file(cfg.out_dir() / "ablation.json", dump(to_json(rows)));
  write_file(cfg.out_dir() / "ablation.csv", csv);
  write_file(cfg.out_dir() / "ablation.txt", text);
  std::cout << (a.format == "json" ? dump(to_json(rows)) : a.format == "csv" ? csv : text);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string out;
  synth::SynthParams p;
  std::vector<double> strong, weak, recall;
  std::vector<std::string> regimes;
};

// A per-system list: empty keeps defaults, one value broadcasts.
template <typename T, typename Fn>
void apply_list(const std::vector<T>& v, std::vector<synth::SystemProfile>& profiles, const char* flag, Fn fn) {
  if (v.empty()) return;
  if (v.size() != 1 && v.size() != profiles.size()) {
    throw ValidationError(std::string(flag) + " takes one value or one per system (" +
                          std::to_string(profiles.size()) + ")");
  }
  for (std::size_t i = 0; i < profiles.size(); ++i) fn(profiles[i], v[v.size() == 1 ? 0 : i]);
}

int cmd_synth(SynthArgs a) {
  if (a.p.n_systems == 0) throw ValidationError("--systems must be positive");
  auto profiles = synth::default_profiles(a.p.n_systems);
  apply_list(a.strong, profiles, "--strong", [](auto& pr, double v) { pr.strong = v; });
  apply_list(a.weak, profiles, "--weak", [](auto& pr, double v) { pr.weak = v; });
  apply_list(a.recall, profiles, "--recall", [](auto& pr, double v) { pr.recall = v; });
  apply_list(a.regimes, profiles, "--regime",
             [](auto& pr, const std::string& v) { pr.regime = synth::parse_regime(v); });
  a.p.profiles = profiles;
  const auto bench = synth::generate(a.p);
  synth::write_benchmark(bench, a.out, a.p.seed);
  std::cout << "benchmark written to " << a.out << " (" << a.p.n_docs << " documents per split, "
            << bench.system_ids.size() << " systems, " << bench.train.gold.size() << " train and "
            << bench.test.gold.size() << " test gold mentions)\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// main
// ---------------------------------------------------------------------------

int run(int argc, char** argv) {
  CLI::App app{"Meta entity linking: learn to combine the outputs of several entity linking systems."};
  app.require_subcommand(1);
  app.footer("Exit codes: 0 success, 1 validation error, 2 I/O error.");

  StatsArgs stats;
  auto* s = app.add_subcommand("stats", "Agreement statistics of the systems on one split");
  add_common(s, stats.o);
  s->add_option("--split", stats.split, "Split to analyse: train or test")->capture_default_str();
  s->add_option("--format", stats.format, "Stdout format: text or json")->capture_default_str();

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train the selector and per-system binary classifiers");
  add_common(t, train.o);
  t->add_option("-m,--model", train.model, "Model output path (default: <out-dir>/model.json)");
  t->add_option("--trees", train.trees, "Trees per forest (default: config or 100)");
  t->add_option("--max-depth", train.max_depth, "Maximum tree depth, 0 = unlimited (default: config or 0)");
  t->add_option("--min-leaf", train.min_leaf, "Minimum instances per leaf (default: config or 1)");
  t->add_option("--svm-c", train.c, "Soft-margin penalty of the binary classifiers (default: config or 1)");
  t->add_flag("--balance-classes", train.balance, "Scale the penalty per class by inverse frequency");
  t->add_option("--features", train.features, "Comma-separated feature names to use (default: all)");
  t->add_flag("--no-binary", train.no_binary, "Skip the binary classifiers (strict annotation needs them)");
  t->add_flag("--no-short-circuit", train.no_short_circuit,
              "Send unanimous groups through the selector instead of emitting the shared entity");
  t->add_flag("--exclude-empty-label-sets", train.exclude_empty,
              "Drop training groups where no recogniser is correct from the selector data");

  AnnotateArgs ann;
  auto* an = app.add_subcommand("annotate", "Produce a unified annotation file with a strategy");
  add_common(an, ann.o);
  std::string strategies = "loose, strict";
  for (auto k : kAllBaselines) strategies += ", " + std::string(to_string(k));
  an->add_option("-s,--strategy", ann.strategy, "One of: " + strategies)->capture_default_str();
  an->add_option("-m,--model", ann.model,
                 "Trained model; required for loose/strict, supplies priors for weighted baselines");
  an->add_option("--split", ann.split, "Split to annotate: train or test")->capture_default_str();
  an->add_option("-o,--output", ann.output, "Output JSONL (default: <out-dir>/<strategy>_<split>.jsonl)");
  an->add_flag("--mean-vote-score", ann.mean_vote, "Weighted voting averages instead of sums the weights");

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Score outputs against the ground truth with pairwise t-tests");
  add_common(e, ev.o);
  e->add_option("outputs", ev.outputs, "Annotation JSONL files to score");
  e->add_option("--split", ev.split, "Split holding the ground truth")->capture_default_str();
  e->add_option("--format", ev.format, "Stdout format: text, json or csv")->capture_default_str();
  e->add_option("-m,--model", ev.model, "Also report classifier diagnostics for this model");
  e->add_flag("--with-systems", ev.with_systems, "Also score every input system");
  e->add_option("--n-splits", ev.n_splits, "Number of t-test splits")->capture_default_str();
  e->add_option("--alpha", ev.alpha, "Significance level")->capture_default_str();
  e->add_option("--shuffle-seed", ev.shuffle_seed, "Shuffle gold before splitting (default: contiguous)");

  AblateArgs ab;
  auto* b = app.add_subcommand("ablate", "Retrain the loose pipeline on the 17 feature combinations");
  add_common(b, ab.o);
  b->add_option("--format", ab.format, "Stdout format: text, json or csv")->capture_default_str();
  b->add_option("--trees", ab.trees, "Trees per forest (default: config or 100)");

  TtestArgs tt;
  auto* tc = app.add_subcommand("ttest", "Paired t-test of two outputs over equal-size gold splits");
  add_common(tc, tt.o);
  tc->add_option("a", tt.a, "First annotation JSONL")->required();
  tc->add_option("b", tt.b, "Second annotation JSONL")->required();
  tc->add_option("--split", tt.split, "Split holding the ground truth")->capture_default_str();
  tc->add_option("--format", tt.format, "Stdout format: text, json or csv")->capture_default_str();
  tc->add_option("--n-splits", tt.n_splits, "Number of splits")->capture_default_str();
  tc->add_option("--alpha", tt.alpha, "Significance level")->capture_default_str();
  tc->add_option("--shuffle-seed", tt.shuffle_seed, "Shuffle gold before splitting (default: contiguous)");

  SynthArgs sy;
  auto* g = app.add_subcommand("synth", "Generate a seeded synthetic benchmark with a ready config.json");
  g->add_option("-o,--out", sy.out, "Output directory")->required();
  g->add_option("--n-docs", sy.p.n_docs, "Documents per split")->capture_default_str();
  g->add_option("--vocab", sy.p.vocab, "Number of knowledge-base entities")->capture_default_str();
  g->add_option("--systems", sy.p.n_systems, "Number of simulated systems")->capture_default_str();
  g->add_option("--seed", sy.p.seed, "Generator seed")->capture_default_str();
  g->add_option("--strong", sy.strong, "Accuracy inside each system's regime (one value or one per system)")
      ->delimiter(',');
  g->add_option("--weak", sy.weak, "Accuracy outside the regime (one value or one per system)")->delimiter(',');
  g->add_option("--recall", sy.recall, "Probability a system recognises a mention")->delimiter(',');
  g->add_option("--regime", sy.regimes, "multi_word, early_position or high_frequency per system")->delimiter(',');
  g->add_option("--spurious-rate", sy.p.spurious_rate, "Spurious links per sentence and system")
      ->capture_default_str();
  g->add_option("--null-rate", sy.p.null_rate, "Share of planted mentions with no gold entity")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return kExitValidation;
  }

  if (s->parsed()) return cmd_stats(stats);
  if (t->parsed()) return cmd_train(train);
  if (an->parsed()) return cmd_annotate(ann);
  if (e->parsed()) return cmd_evaluate(ev);
  if (b->parsed()) return cmd_ablate(ab);
  if (tc->parsed()) return cmd_ttest(tt);
  return cmd_synth(sy);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const json::exception& e) {
    std::cerr << "error: invalid configuration value: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}
