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
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "metael/error.hpp"
#include "metael/learners/instance.hpp"
#include "metael/rng.hpp"

namespace metael {

struct MarginParams {
  double c = 1.0;
  double tol = 1e-3;
  std::size_t max_passes = 5;
  std::uint64_t seed = 1;
  // Scale C per class by n / (2 * n_class).
  bool balance_classes = false;
  // Hard cap on optimisation sweeps.
  std::size_t max_sweeps = 2000;

  friend bool operator==(const MarginParams&, const MarginParams&) = default;
};

// Per-feature z-scoring with training statistics. Features that were
// constant in training always map to 0.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;  // > 0; 1 for constant features
  std::vector<std::uint8_t> constant;

  static Standardizer fit(std::span<const BinaryInstance> data) {
    const std::size_t dim = data.front().x.size();
    Standardizer s;
    s.mean.assign(dim, 0.0);
    s.stddev.assign(dim, 1.0);
    s.constant.assign(dim, 0);
    const double n = static_cast<double>(data.size());
    for (const auto& inst : data) {
      for (std::size_t f = 0; f < dim; ++f) s.mean[f] += inst.x[f];
    }
    for (auto& m : s.mean) m /= n;
    std::vector<double> var(dim, 0.0);
    for (const auto& inst : data) {
      for (std::size_t f = 0; f < dim; ++f) var[f] += (inst.x[f] - s.mean[f]) * (inst.x[f] - s.mean[f]);
    }
    for (std::size_t f = 0; f < dim; ++f) {
      const double sd = std::sqrt(var[f] / n);
      if (sd > 0.0 && std::isfinite(sd)) {
        s.stddev[f] = sd;
      } else {
        s.constant[f] = 1;
      }
    }
    return s;
  }

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> out(x.size());
    for (std::size_t f = 0; f < x.size(); ++f) out[f] = constant[f] ? 0.0 : (x[f] - mean[f]) / stddev[f];
    return out;
  }

  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

// Linear soft-margin classifier on standardized inputs.
struct MarginModel {
  std::vector<double> weights;
  double bias = 0.0;
  Standardizer standardizer;

  std::size_t feature_dim() const { return weights.size(); }

  // Zero weights and bias: predicts true everywhere.
  static MarginModel constant_accept(std::size_t dim) {
    MarginModel m;
    m.weights.assign(dim, 0.0);
    m.standardizer.mean.assign(dim, 0.0);
    m.standardizer.stddev.assign(dim, 1.0);
    m.standardizer.constant.assign(dim, 1);
    return m;
  }

  friend bool operator==(const MarginModel&, const MarginModel&) = default;
};

namespace detail {

// Sequential minimal optimisation for the linear dual, with the two-threshold
// optimality test (b_up, b_low) instead of a single running bias. The weight
// vector and F_k = w.x_k - y_k are maintained explicitly, which keeps a pair
// update at O(n * d).
class LinearSmo {
 public:
  LinearSmo(std::vector<std::vector<double>> x, std::vector<double> y, std::vector<double> cap,
            const MarginParams& params)
      : x_(std::move(x)), y_(std::move(y)), cap_(std::move(cap)), params_(params), rng_(params.seed) {
    n_ = x_.size();
    d_ = x_.front().size();
    alpha_.assign(n_, 0.0);
    w_.assign(d_, 0.0);
    dw_.assign(d_, 0.0);
    f_.resize(n_);
    for (std::size_t k = 0; k < n_; ++k) f_[k] = -y_[k];
    update_thresholds();
  }

  void solve() {
    std::vector<std::size_t> order(n_);
    std::iota(order.begin(), order.end(), 0);
    std::size_t passes = 0;
    for (std::size_t sweep = 0; sweep < params_.max_sweeps && passes < params_.max_passes; ++sweep) {
      for (std::size_t i = n_; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng_, i)]);
      std::size_t changed = 0;
      // Maximal violating pairs first, then a check over every multiplier.
      for (std::size_t it = 0; it < n_ && b_low_ - b_up_ > 2.0 * params_.tol; ++it) {
        if (i_up_ >= n_ || i_low_ >= n_ || !step(i_low_, i_up_)) break;
        ++changed;
      }
      for (auto i : order) changed += examine(i) ? 1 : 0;
      passes = changed == 0 ? passes + 1 : 0;
    }
    // Threshold: mean F over free support vectors, else the midpoint.
    double sum = 0.0;
    std::size_t free_sv = 0;
    for (std::size_t k = 0; k < n_; ++k) {
      if (alpha_[k] > kEps && alpha_[k] < cap_[k] - kEps) {
        sum += f_[k];
        ++free_sv;
      }
    }
    const double thr = free_sv > 0 ? sum / static_cast<double>(free_sv) : (b_up_ + b_low_) / 2.0;
    b_ = -thr;
  }

  const std::vector<double>& weights() const { return w_; }
  double bias() const { return b_; }

 private:
  static constexpr double kEps = 1e-12;

  static double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  }

  bool in_up(std::size_t k) const { return y_[k] > 0 ? alpha_[k] < cap_[k] : alpha_[k] > 0.0; }
  bool in_low(std::size_t k) const { return y_[k] > 0 ? alpha_[k] > 0.0 : alpha_[k] < cap_[k]; }

  void update_thresholds() {
    b_up_ = std::numeric_limits<double>::infinity();
    b_low_ = -std::numeric_limits<double>::infinity();
    i_up_ = i_low_ = n_;
    for (std::size_t k = 0; k < n_; ++k) {
      if (in_up(k) && f_[k] < b_up_) {
        b_up_ = f_[k];
        i_up_ = k;
      }
      if (in_low(k) && f_[k] > b_low_) {
        b_low_ = f_[k];
        i_low_ = k;
      }
    }
  }

  // A multiplier violates the KKT conditions when it can be paired with a
  // partner that moves the objective by more than the tolerance.
  bool examine(std::size_t i) {
    std::size_t partner = n_;
    if (in_up(i) && b_low_ - f_[i] > 2.0 * params_.tol) {
      partner = i_low_;
    } else if (in_low(i) && f_[i] - b_up_ > 2.0 * params_.tol) {
      partner = i_up_;
    } else {
      return false;
    }
    if (partner < n_ && partner != i && step(i, partner)) return true;
    // Fall back to every other index, starting at a random offset.
    const std::size_t start = static_cast<std::size_t>(uniform_index(rng_, n_));
    for (std::size_t k = 0; k < n_; ++k) {
      const std::size_t j = (start + k) % n_;
      if (j == i || j == partner) continue;
      if (std::fabs(f_[i] - f_[j]) <= 2.0 * params_.tol) continue;
      if (step(i, j)) return true;
    }
    return false;
  }

  bool step(std::size_t i, std::size_t j) {
    const double ai = alpha_[i];
    const double aj = alpha_[j];
    const double yi = y_[i];
    const double yj = y_[j];
    double lo, hi;
    if (yi != yj) {
      lo = std::max(0.0, aj - ai);
      hi = std::min(cap_[j], cap_[i] + aj - ai);
    } else {
      lo = std::max(0.0, ai + aj - cap_[i]);
      hi = std::min(cap_[j], ai + aj);
    }
    if (!(lo < hi)) return false;
    const double kii = dot(x_[i], x_[i]);
    const double kjj = dot(x_[j], x_[j]);
    const double kij = dot(x_[i], x_[j]);
    const double eta = 2.0 * kij - kii - kjj;
    double aj_new;
    if (eta < 0.0) {
      aj_new = std::clamp(aj - yj * (f_[i] - f_[j]) / eta, lo, hi);
    } else {
      // Flat curvature: the objective is linear along the segment.
      const double slope = yj * (f_[i] - f_[j]);
      if (slope == 0.0) return false;
      aj_new = slope > 0.0 ? hi : lo;
    }
    if (std::fabs(aj_new - aj) < 1e-10 * (aj_new + aj + 1e-10)) return false;
    double ai_new = ai + yi * yj * (aj - aj_new);
    ai_new = std::clamp(ai_new, 0.0, cap_[i]);
    // Round-off must not leave a multiplier a hair inside its box.
    auto snap = [](double a, double cap) {
      if (a < 1e-9 * cap) return 0.0;
      if (a > cap * (1.0 - 1e-9)) return cap;
      return a;
    };
    ai_new = snap(ai_new, cap_[i]);
    aj_new = snap(aj_new, cap_[j]);
    if (ai_new == ai && aj_new == aj) return false;

    const double dai = ai_new - ai;
    const double daj = aj_new - aj;
    for (std::size_t f = 0; f < d_; ++f) dw_[f] = yi * dai * x_[i][f] + yj * daj * x_[j][f];
    for (std::size_t f = 0; f < d_; ++f) w_[f] += dw_[f];
    for (std::size_t k = 0; k < n_; ++k) f_[k] += dot(dw_, x_[k]);
    alpha_[i] = ai_new;
    alpha_[j] = aj_new;
    update_thresholds();
    return true;
  }

  std::vector<std::vector<double>> x_;
  std::vector<double> y_;
  std::vector<double> cap_;
  MarginParams params_;
  Rng rng_;
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<double> alpha_;
  std::vector<double> w_;
  std::vector<double> dw_;
  std::vector<double> f_;
  double b_ = 0.0;
  double b_up_ = 0.0;
  double b_low_ = 0.0;
  std::size_t i_up_ = 0;
  std::size_t i_low_ = 0;
};

}  // namespace detail

// Soft-margin linear classifier trained by pairwise dual updates until no
// multiplier violates the KKT conditions by more than tol for max_passes
// consecutive sweeps. Both classes must be present.
inline MarginModel train_margin(std::span<const BinaryInstance> data, const MarginParams& params = {}) {
  const std::size_t dim = detail::check_dimensions<BinaryInstance>(data);
  std::size_t pos = 0;
  for (const auto& inst : data) pos += inst.y ? 1 : 0;
  if (pos == 0 || pos == data.size()) {
    throw ValidationError("margin classifier needs both classes in the training data");
  }
  if (!(params.c > 0.0)) throw ValidationError("margin classifier: C must be positive");
  MarginModel model;
  model.standardizer = Standardizer::fit(data);
  if (dim == 0) {
    return model;
  }
  const double n = static_cast<double>(data.size());
  const double c_pos = params.balance_classes ? params.c * n / (2.0 * static_cast<double>(pos)) : params.c;
  const double c_neg =
      params.balance_classes ? params.c * n / (2.0 * static_cast<double>(data.size() - pos)) : params.c;
  // Identical points with the same label share one dual variable whose box
  // is the sum of theirs; the optimum is unchanged.
  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  std::vector<double> caps;
  std::map<std::pair<std::vector<double>, bool>, std::size_t> seen;
  for (const auto& inst : data) {
    auto z = model.standardizer.apply(inst.x);
    auto [it, fresh] = seen.try_emplace({z, inst.y}, xs.size());
    if (!fresh) {
      caps[it->second] += inst.y ? c_pos : c_neg;
      continue;
    }
    xs.push_back(std::move(z));
    ys.push_back(inst.y ? 1.0 : -1.0);
    caps.push_back(inst.y ? c_pos : c_neg);
  }
  detail::LinearSmo smo(std::move(xs), std::move(ys), std::move(caps), params);
  smo.solve();
  model.weights = smo.weights();
  model.bias = smo.bias();
  return model;
}

inline double margin_score(const MarginModel& model, std::span<const double> x) {
  if (x.size() != model.feature_dim()) {
    throw ValidationError("margin model expects " + std::to_string(model.feature_dim()) +
                          " features, got " + std::to_string(x.size()));
  }
  const auto z = model.standardizer.apply(x);
  double s = model.bias;
  for (std::size_t f = 0; f < z.size(); ++f) s += model.weights[f] * z[f];
  return s;
}

// Boundary convention: a score of exactly 0 is positive.
inline bool predict_margin(const MarginModel& model, std::span<const double> x) {
  return margin_score(model, x) >= 0.0;
}

inline nlohmann::json to_json(const MarginParams& p) {
  return {{"c", p.c},
          {"tol", p.tol},
          {"max_passes", p.max_passes},
          {"seed", p.seed},
          {"balance_classes", p.balance_classes},
          {"max_sweeps", p.max_sweeps}};
}

inline MarginParams margin_params_from_json(const nlohmann::json& j) {
  MarginParams p;
  p.c = j.value("c", p.c);
  p.tol = j.value("tol", p.tol);
  p.max_passes = j.value("max_passes", p.max_passes);
  p.seed = j.value("seed", p.seed);
  p.balance_classes = j.value("balance_classes", p.balance_classes);
  p.max_sweeps = j.value("max_sweeps", p.max_sweeps);
  return p;
}

inline nlohmann::json to_json(const MarginModel& m) {
  return {{"weights", m.weights},
          {"bias", m.bias},
          {"mean", m.standardizer.mean},
          {"stddev", m.standardizer.stddev},
          {"constant", m.standardizer.constant}};
}

inline MarginModel margin_from_json(const nlohmann::json& j) {
  MarginModel m;
  m.weights = j.at("weights").get<std::vector<double>>();
  m.bias = j.at("bias").get<double>();
  m.standardizer.mean = j.at("mean").get<std::vector<double>>();
  m.standardizer.stddev = j.at("stddev").get<std::vector<double>>();
  m.standardizer.constant = j.at("constant").get<std::vector<std::uint8_t>>();
  const std::size_t d = m.weights.size();
  if (m.standardizer.mean.size() != d || m.standardizer.stddev.size() != d ||
      m.standardizer.constant.size() != d) {
    throw ValidationError("model file: margin model dimensions disagree");
  }
  return m;
}

}  // namespace metael
