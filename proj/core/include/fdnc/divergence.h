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


#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fdnc/federation.h"
#include "fdnc/params.h"

namespace fdnc {

enum class DivergenceMetric { kNorm, kCosine };

const char* to_string(DivergenceMetric metric);
DivergenceMetric parse_divergence_metric(const std::string& text);

// ||w1 - w2|| / ||w1||
double norm_divergence(std::span<const float> w1, std::span<const float> w2);
// (1 - cos(w1, w2)) / ||w1||. Scale-dependent in w1 only.
double cosine_divergence(std::span<const float> w1, std::span<const float> w2);
double divergence(DivergenceMetric metric, std::span<const float> w1, std::span<const float> w2);

struct DivergenceEntry {
  std::size_t layer_index = 0;
  std::string layer_name;
  double value = 0.0;
};

struct DivergenceProfile {
  std::size_t round = 0;
  std::string reference_id;
  DivergenceMetric metric = DivergenceMetric::kCosine;
  std::vector<DivergenceEntry> entries;

  std::vector<double> values() const;
};

// Per layer, metric(reference layer, current layer); reference plays W1.
DivergenceProfile layer_profile(const ParameterSet& reference, const ParameterSet& current, DivergenceMetric metric);

struct CollaboratorProfile {
  std::size_t collaborator = 0;
  DivergenceProfile profile;
};

struct PrepassResult {
  ParameterSet reference;
  std::vector<DivergenceProfile> profiles;            // global model, one per diagnostic round
  std::vector<CollaboratorProfile> collaborator_profiles;  // diagnostics only
  std::vector<RoundMetrics> metrics;                  // P + D rows
};

struct PrepassOptions {
  std::size_t prepass_rounds = 5;     // P
  std::size_t diagnostic_rounds = 3;  // D
  DivergenceMetric metric = DivergenceMetric::kCosine;
  // Learning rate for diagnostic rounds; < 0 keeps the FedAvg schedule.
  double diagnostic_eta = -1.0;
};

// P full FedAvg rounds, snapshot the global model as reference, then D more
// full rounds each emitting a profile of the new global model against it.
// The federation keeps the P + D rounds of training.
PrepassResult prepass(FederationState& state, const PrepassOptions& options);

enum class SplitKind { kSplitAt, kNoSplit };
enum class SplitRationale { kKneeFound, kFlatHigh, kFlatLow, kForcedByConfig };

const char* to_string(SplitKind kind);
const char* to_string(SplitRationale rationale);

struct SplitDecision {
  SplitKind kind = SplitKind::kNoSplit;
  std::size_t split_layer = 0;  // L*: positions 1..L* form the feature-learning group
  SplitRationale rationale = SplitRationale::kFlatLow;
  std::vector<double> averaged_profile;
  double max_ratio = 0.0;       // largest successive ratio p[l+1] / p[l]
  double spread = 0.0;          // max(p) / min(p)

  bool is_split() const noexcept { return kind == SplitKind::kSplitAt; }
  std::string describe() const;
};

struct SplitOptions {
  double knee_ratio = 2.0;
  double flat_tolerance = 1.5;
};

// Element-wise mean profile p[1..n]. Flat when max/min < flat_tolerance;
// otherwise the knee is the l maximising p[l+1]/p[l] (ties: smallest l),
// accepted if that ratio reaches knee_ratio.
SplitDecision select_split(const std::vector<DivergenceProfile>& profiles, const SplitOptions& options = {});
SplitDecision select_split(const std::vector<std::vector<double>>& profiles, const SplitOptions& options = {});

SplitDecision forced_split(std::size_t split_layer, std::size_t num_param_layers);
SplitDecision forced_no_split();

// round,layer_index,layer_name,metric,w_d
std::string divergence_csv(const std::vector<DivergenceProfile>& profiles);
// round,collaborator,layer_index,layer_name,metric,w_d
std::string collaborator_divergence_csv(const std::vector<CollaboratorProfile>& profiles);

}  // namespace fdnc
