/*
 * Copyright 2026 The fdnc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "fdnc/divergence.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "fdnc/errors.h"

namespace fdnc {
namespace {

void check_lengths(std::span<const float> w1, std::span<const float> w2) {
  if (w1.size() != w2.size()) {
    throw InputError("divergence operands differ in length: " + std::to_string(w1.size()) + " vs " +
                     std::to_string(w2.size()));
  }
}

double sq_norm(std::span<const float> w) {
  double s = 0.0;
  for (float v : w) s += static_cast<double>(v) * static_cast<double>(v);
  return s;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

const char* to_string(DivergenceMetric metric) { return metric == DivergenceMetric::kNorm ? "norm" : "cosine"; }

DivergenceMetric parse_divergence_metric(const std::string& text) {
  if (text == "norm") return DivergenceMetric::kNorm;
  if (text == "cosine") return DivergenceMetric::kCosine;
  throw ConfigError("unknown divergence metric '" + text + "' (expected norm or cosine)");
}

double norm_divergence(std::span<const float> w1, std::span<const float> w2) {
  check_lengths(w1, w2);
  const double n1 = std::sqrt(sq_norm(w1));
  if (!(n1 > 0.0)) throw DegenerateReferenceError("norm divergence with a zero reference vector");
  double diff = 0.0;
  for (std::size_t i = 0; i < w1.size(); ++i) {
    const double d = static_cast<double>(w1[i]) - static_cast<double>(w2[i]);
    diff += d * d;
  }
  return std::sqrt(diff) / n1;
}

double cosine_divergence(std::span<const float> w1, std::span<const float> w2) {
  check_lengths(w1, w2);
  const double n1 = std::sqrt(sq_norm(w1));
  const double n2 = std::sqrt(sq_norm(w2));
  if (!(n1 > 0.0) || !(n2 > 0.0)) throw DegenerateReferenceError("cosine divergence with a zero vector");
  // Rounding in dot / (n1 * n2) would otherwise leave ~1e-17 for a layer
  // that did not move.
  if (std::equal(w1.begin(), w1.end(), w2.begin())) return 0.0;
  double dot = 0.0;
  for (std::size_t i = 0; i < w1.size(); ++i) dot += static_cast<double>(w1[i]) * static_cast<double>(w2[i]);
  const double cosine = std::clamp(dot / (n1 * n2), -1.0, 1.0);
  return (1.0 - cosine) / n1;
}

double divergence(DivergenceMetric metric, std::span<const float> w1, std::span<const float> w2) {
  return metric == DivergenceMetric::kNorm ? norm_divergence(w1, w2) : cosine_divergence(w1, w2);
}

std::vector<double> DivergenceProfile::values() const {
  std::vector<double> v;
  for (const auto& e : entries) v.push_back(e.value);
  return v;
}

DivergenceProfile layer_profile(const ParameterSet& reference, const ParameterSet& current, DivergenceMetric metric) {
  if (!same_layout(reference, current)) throw InputError("divergence profile needs parameter sets of the same model");
  DivergenceProfile profile;
  profile.metric = metric;
  for (const auto& e : reference.entries) {
    const auto w1 = flatten_layer(reference, e.layer_index);
    const auto w2 = flatten_layer(current, e.layer_index);
    profile.entries.push_back({e.layer_index, e.layer_name, divergence(metric, w1, w2)});
  }
  return profile;
}

PrepassResult prepass(FederationState& state, const PrepassOptions& options) {
  if (options.prepass_rounds < 1 || options.diagnostic_rounds < 1) {
    throw ConfigError("pre-pass needs at least one pre-pass and one diagnostic round");
  }
  PrepassResult result;
  std::size_t t = 0;
  for (std::size_t r = 0; r < options.prepass_rounds; ++r) {
    auto m = run_round(state, fedavg_round_plan(state, ++t));
    m.mode = "prepass";
    result.metrics.push_back(m);
  }
  result.reference = state.global;
  const std::string reference_id = "round" + std::to_string(state.rounds_done);

  RoundObserver observer;
  std::size_t diag_round = 0;
  observer.on_local = [&](std::size_t collaborator, const ParameterSet&, const ParameterSet& trained) {
    auto p = layer_profile(result.reference, trained, options.metric);
    p.round = diag_round;
    p.reference_id = reference_id;
    result.collaborator_profiles.push_back({collaborator, std::move(p)});
  };
  for (std::size_t r = 0; r < options.diagnostic_rounds; ++r) {
    RoundPlan plan = fedavg_round_plan(state, ++t);
    if (options.diagnostic_eta >= 0.0) plan.eta = options.diagnostic_eta;
    diag_round = state.rounds_done + 1;
    auto m = run_round(state, plan, &observer);
    m.mode = "prepass";
    result.metrics.push_back(m);
    auto p = layer_profile(result.reference, state.global, options.metric);
    p.round = state.rounds_done;
    p.reference_id = reference_id;
    result.profiles.push_back(std::move(p));
  }
  return result;
}

const char* to_string(SplitKind kind) { return kind == SplitKind::kSplitAt ? "split_at" : "no_split"; }

const char* to_string(SplitRationale rationale) {
  switch (rationale) {
    case SplitRationale::kKneeFound: return "knee_found";
    case SplitRationale::kFlatHigh: return "flat_high";
    case SplitRationale::kFlatLow: return "flat_low";
    case SplitRationale::kForcedByConfig: return "forced_by_config";
  }
  return "?";
}

std::string SplitDecision::describe() const {
  std::string s = to_string(kind);
  if (is_split()) s += "(" + std::to_string(split_layer) + ")";
  return s + " [" + to_string(rationale) + "]";
}

SplitDecision select_split(const std::vector<std::vector<double>>& profiles, const SplitOptions& options) {
  if (profiles.empty()) throw ConfigError("split selection needs at least one profile");
  const std::size_t n = profiles.front().size();
  if (n < 3) throw ConfigError("split selection needs at least 3 parameterized layers");
  std::vector<double> p(n, 0.0);
  std::vector<double> all;
  for (const auto& prof : profiles) {
    if (prof.size() != n) throw InputError("profiles differ in length");
    for (std::size_t l = 0; l < n; ++l) {
      if (!std::isfinite(prof[l]) || prof[l] < 0.0) throw InputError("divergence values must be finite and >= 0");
      p[l] += prof[l];
      all.push_back(prof[l]);
    }
  }
  for (auto& v : p) v /= static_cast<double>(profiles.size());

  SplitDecision d;
  d.averaged_profile = p;
  const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
  d.spread = *hi == 0.0 ? 1.0 : (*lo == 0.0 ? std::numeric_limits<double>::infinity() : *hi / *lo);

  std::size_t best = 0;
  double best_ratio = -1.0;
  for (std::size_t l = 0; l + 1 < n; ++l) {
    double ratio;
    if (p[l] == 0.0) {
      ratio = p[l + 1] == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    } else {
      ratio = p[l + 1] / p[l];
    }
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = l;
    }
  }
  d.max_ratio = best_ratio;

  if (d.spread < options.flat_tolerance || best_ratio < options.knee_ratio) {
    std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(all.size() / 2), all.end());
    double median = all[all.size() / 2];
    if (all.size() % 2 == 0) {
      const double lower = *std::max_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(all.size() / 2));
      median = 0.5 * (median + lower);
    }
    d.kind = SplitKind::kNoSplit;
    d.rationale = *lo > median ? SplitRationale::kFlatHigh : SplitRationale::kFlatLow;
    return d;
  }
  d.kind = SplitKind::kSplitAt;
  d.split_layer = best + 1;
  d.rationale = SplitRationale::kKneeFound;
  return d;
}

SplitDecision select_split(const std::vector<DivergenceProfile>& profiles, const SplitOptions& options) {
  std::vector<std::vector<double>> values;
  for (const auto& p : profiles) values.push_back(p.values());
  return select_split(values, options);
}

SplitDecision forced_split(std::size_t split_layer, std::size_t num_param_layers) {
  if (split_layer < 1 || split_layer >= num_param_layers) {
    throw ConfigError("forced split must lie in [1, " + std::to_string(num_param_layers - 1) + "]");
  }
  SplitDecision d;
  d.kind = SplitKind::kSplitAt;
  d.split_layer = split_layer;
  d.rationale = SplitRationale::kForcedByConfig;
  return d;
}

SplitDecision forced_no_split() {
  SplitDecision d;
  d.kind = SplitKind::kNoSplit;
  d.rationale = SplitRationale::kForcedByConfig;
  return d;
}

std::string divergence_csv(const std::vector<DivergenceProfile>& profiles) {
  std::ostringstream out;
  out << "round,layer_index,layer_name,metric,w_d\n";
  for (const auto& p : profiles) {
    for (const auto& e : p.entries) {
      out << p.round << ',' << e.layer_index << ',' << e.layer_name << ',' << to_string(p.metric) << ','
          << fmt(e.value) << '\n';
    }
  }
  return out.str();
}

std::string collaborator_divergence_csv(const std::vector<CollaboratorProfile>& profiles) {
  std::ostringstream out;
  out << "round,collaborator,layer_index,layer_name,metric,w_d\n";
  for (const auto& cp : profiles) {
    for (const auto& e : cp.profile.entries) {
      out << cp.profile.round << ',' << cp.collaborator << ',' << e.layer_index << ',' << e.layer_name << ','
          << to_string(cp.profile.metric) << ',' << fmt(e.value) << '\n';
    }
  }
  return out.str();
}

}  // namespace fdnc
