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
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "metael/error.hpp"
#include "metael/learners/instance.hpp"
#include "metael/rng.hpp"

namespace metael {

struct ForestParams {
  std::size_t n_trees = 100;
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t min_leaf = 1;
  std::uint64_t seed = 1;

  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

// Axis-aligned binary tree; x[feature] <= threshold goes left. Leaves store
// the fraction of positive training instances that reached them.
class DecisionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double positive = 0.0;

    friend bool operator==(const Node&, const Node&) = default;
  };

  DecisionTree() = default;
  explicit DecisionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

  double predict(std::span<const double> x) const {
    std::size_t i = 0;
    while (nodes_[i].feature >= 0) {
      const auto& n = nodes_[i];
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes_[i].positive;
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t depth() const { return depth_from(0); }

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

 private:
  std::size_t depth_from(std::size_t i) const {
    const auto& n = nodes_[i];
    if (n.feature < 0) return 0;
    return 1 + std::max(depth_from(static_cast<std::size_t>(n.left)),
                        depth_from(static_cast<std::size_t>(n.right)));
  }

  std::vector<Node> nodes_;
};

struct DecisionForestModel {
  std::vector<DecisionTree> trees;
  std::size_t feature_dim = 0;
  ForestParams params;

  friend bool operator==(const DecisionForestModel&, const DecisionForestModel&) = default;
};

namespace detail {

class TreeBuilder {
 public:
  TreeBuilder(std::span<const BinaryInstance> data, std::size_t dim, const ForestParams& params,
              std::uint64_t seed)
      : data_(data), dim_(dim), params_(params), rng_(seed) {}

  DecisionTree build() {
    const std::size_t n = data_.size();
    std::vector<std::size_t> sample(n);
    for (auto& s : sample) s = static_cast<std::size_t>(uniform_index(rng_, n));
    grow(sample, 0);
    return DecisionTree(std::move(nodes_));
  }

 private:
  struct Split {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double impurity = 0.0;  // weighted Gini, scaled by node size
  };

  static double gini_mass(double pos, double count) {
    if (count <= 0) return 0.0;
    const double p = pos / count;
    return count * (1.0 - p * p - (1.0 - p) * (1.0 - p));
  }

  Split best_split_on(const std::vector<std::size_t>& idx, std::size_t f, std::size_t total_pos) {
    Split best;
    std::vector<std::pair<double, bool>> v;
    v.reserve(idx.size());
    for (auto i : idx) v.emplace_back(data_[i].x[f], data_[i].y);
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    const std::size_t n = v.size();
    const std::size_t min_leaf = std::max<std::size_t>(1, params_.min_leaf);
    std::size_t left_pos = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left_pos += v[i].second ? 1 : 0;
      const std::size_t nl = i + 1;
      const std::size_t nr = n - nl;
      if (!(v[i].first < v[i + 1].first) || nl < min_leaf || nr < min_leaf) continue;
      const double imp = gini_mass(static_cast<double>(left_pos), static_cast<double>(nl)) +
                         gini_mass(static_cast<double>(total_pos - left_pos), static_cast<double>(nr));
      if (!best.found || imp < best.impurity) {
        double mid = v[i].first + (v[i + 1].first - v[i].first) / 2.0;
        if (!(mid < v[i + 1].first)) mid = v[i].first;
        best = {true, f, mid, imp};
      }
    }
    return best;
  }

  std::int32_t leaf(std::size_t pos, std::size_t n) {
    DecisionTree::Node node;
    node.positive = static_cast<double>(pos) / static_cast<double>(n);
    nodes_.push_back(node);
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }

  std::int32_t grow(const std::vector<std::size_t>& idx, std::size_t depth) {
    const std::size_t n = idx.size();
    std::size_t pos = 0;
    for (auto i : idx) pos += data_[i].y ? 1 : 0;
    const std::size_t min_leaf = std::max<std::size_t>(1, params_.min_leaf);
    if (pos == 0 || pos == n || (params_.max_depth > 0 && depth >= params_.max_depth) || n < 2 * min_leaf) {
      return leaf(pos, n);
    }

    // Random feature order; the first ceil(sqrt(d)) are the candidate subset.
    // If none of them admits a split, the remaining features are tried in
    // order until one does.
    std::vector<std::size_t> order(dim_);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i + 1 < dim_; ++i) {
      std::swap(order[i], order[i + uniform_index(rng_, dim_ - i)]);
    }
    const auto subset = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(dim_))));
    Split best;
    for (std::size_t k = 0; k < dim_; ++k) {
      if (k >= subset && best.found) break;
      Split s = best_split_on(idx, order[k], pos);
      if (s.found && (!best.found || s.impurity < best.impurity)) best = s;
    }
    if (!best.found) return leaf(pos, n);

    std::vector<std::size_t> left, right;
    for (auto i : idx) (data_[i].x[best.feature] <= best.threshold ? left : right).push_back(i);

    const auto self = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    nodes_[static_cast<std::size_t>(self)].feature = static_cast<int>(best.feature);
    nodes_[static_cast<std::size_t>(self)].threshold = best.threshold;
    nodes_[static_cast<std::size_t>(self)].positive = static_cast<double>(pos) / static_cast<double>(n);
    const auto l = grow(left, depth + 1);
    const auto r = grow(right, depth + 1);
    nodes_[static_cast<std::size_t>(self)].left = l;
    nodes_[static_cast<std::size_t>(self)].right = r;
    return self;
  }

  std::span<const BinaryInstance> data_;
  std::size_t dim_;
  ForestParams params_;
  Rng rng_;
  std::vector<DecisionTree::Node> nodes_;
};

}  // namespace detail

// Bagged Gini trees. Tree t draws its bootstrap sample and feature subsets
// from derive_seed(params.seed, t), so training is deterministic per seed.
inline DecisionForestModel train_forest(std::span<const BinaryInstance> data, const ForestParams& params) {
  const std::size_t dim = detail::check_dimensions<BinaryInstance>(data);
  if (params.n_trees == 0) throw ValidationError("forest needs at least one tree");
  DecisionForestModel model;
  model.feature_dim = dim;
  model.params = params;
  model.trees.reserve(params.n_trees);
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    detail::TreeBuilder builder(data, dim, params, derive_seed(params.seed, t));
    model.trees.push_back(builder.build());
  }
  return model;
}

// Mean positive-leaf fraction over the trees; confidence >= 0.5 is a
// positive prediction.
inline double predict_confidence(const DecisionForestModel& model, std::span<const double> x) {
  if (x.size() != model.feature_dim) {
    throw ValidationError("forest expects " + std::to_string(model.feature_dim) + " features, got " +
                          std::to_string(x.size()));
  }
  double sum = 0.0;
  for (const auto& t : model.trees) sum += t.predict(x);
  return model.trees.empty() ? 0.0 : sum / static_cast<double>(model.trees.size());
}

inline bool predict_forest(const DecisionForestModel& model, std::span<const double> x) {
  return predict_confidence(model, x) >= 0.5;
}

inline nlohmann::json to_json(const ForestParams& p) {
  return {{"n_trees", p.n_trees}, {"max_depth", p.max_depth}, {"min_leaf", p.min_leaf}, {"seed", p.seed}};
}

inline ForestParams forest_params_from_json(const nlohmann::json& j) {
  ForestParams p;
  p.n_trees = j.value("n_trees", p.n_trees);
  p.max_depth = j.value("max_depth", p.max_depth);
  p.min_leaf = j.value("min_leaf", p.min_leaf);
  p.seed = j.value("seed", p.seed);
  return p;
}

inline nlohmann::json to_json(const DecisionForestModel& m) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : m.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : t.nodes()) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.positive});
    trees.push_back(std::move(nodes));
  }
  return {{"feature_dim", m.feature_dim}, {"params", to_json(m.params)}, {"trees", std::move(trees)}};
}

inline DecisionForestModel forest_from_json(const nlohmann::json& j) {
  DecisionForestModel m;
  m.feature_dim = j.at("feature_dim").get<std::size_t>();
  m.params = forest_params_from_json(j.at("params"));
  for (const auto& t : j.at("trees")) {
    std::vector<DecisionTree::Node> nodes;
    for (const auto& n : t) {
      DecisionTree::Node node;
      node.feature = n.at(0).get<int>();
      node.threshold = n.at(1).get<double>();
      node.left = n.at(2).get<std::int32_t>();
      node.right = n.at(3).get<std::int32_t>();
      node.positive = n.at(4).get<double>();
      if (node.feature >= static_cast<int>(m.feature_dim)) {
        throw ValidationError("model file: split feature out of range");
      }
      nodes.push_back(node);
    }
    if (nodes.empty()) throw ValidationError("model file: empty tree");
    for (const auto& n : nodes) {
      const auto size = static_cast<std::int32_t>(nodes.size());
      if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || n.left >= size || n.right >= size)) {
        throw ValidationError("model file: child index out of range");
      }
    }
    m.trees.emplace_back(std::move(nodes));
  }
  return m;
}

}  // namespace metael
