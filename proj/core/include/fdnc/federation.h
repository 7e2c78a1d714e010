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

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fdnc/dataset.h"
#include "fdnc/ledger.h"
#include "fdnc/model.h"
#include "fdnc/nn.h"
#include "fdnc/params.h"
#include "fdnc/partition.h"
#include "fdnc/rng.h"
#include "fdnc/round_plan.h"

namespace fdnc {

enum class Aggregation { kFedAvg, kFedProx };
enum class Weighting { kUniform, kBySampleCount };

const char* to_string(Aggregation a);
const char* to_string(Weighting w);

struct FederationConfig {
  std::size_t num_collaborators = 2;  // N
  std::size_t participants = 2;       // K
  std::size_t rounds = 18;            // T
  double eta = 0.001;
  double eta_decay = 1.0;             // eta_t = eta * eta_decay^(t-1)
  std::size_t local_epochs = 1;       // Ep
  std::size_t batch_size = 32;
  Aggregation aggregation = Aggregation::kFedAvg;
  double mu = 0.0;                    // FedProx proximal weight
  Weighting weighting = Weighting::kUniform;
  std::uint64_t seed = 1;
  std::size_t workers = 1;            // parallel local trainers

  void validate() const;
  bool operator==(const FederationConfig&) const = default;
};

struct CollaboratorState {
  std::size_t id = 0;
  Dataset data;          // private partition, transforms applied
  Rng rng{0, 0};         // stream id = collaborator id
  ParameterSet cache;    // last full model seen
};

struct LocalUpdate {
  std::size_t collaborator_id = 0;
  ParameterSet params;   // full after local_train; the trained slice once uploaded
  std::size_t sample_count = 0;
  double train_loss = 0.0;
};

struct LocalTrainConfig {
  std::size_t epochs = 1;
  double eta = 0.0;
  std::size_t batch_size = 32;
  FreezeMask mask;
  double prox_mu = 0.0;
  const ParameterSet* prox_anchor = nullptr;
  std::size_t round = 0;  // diagnostics only
};

// Ep passes over the partition in freshly shuffled minibatches. With
// prox_mu > 0 every unfrozen gradient gains prox_mu * (w - anchor).
LocalUpdate local_train(const ModelSpec& spec, CollaboratorState& state, const ParameterSet& global_params,
                        const LocalTrainConfig& config);

// Sorted by collaborator id before summation; 64-bit accumulation.
ParameterSet fedavg_aggregate(std::vector<LocalUpdate> updates, Weighting weighting);

// K distinct ids drawn uniformly without replacement, ascending.
std::vector<std::size_t> select_participants(std::size_t round, std::size_t num_collaborators, std::size_t k,
                                             std::uint64_t seed);

struct EvalResult {
  double accuracy = 0.0;
  double loss = 0.0;
};

// Argmax ties resolve to the lowest class index.
std::vector<std::int32_t> predict_labels(const ModelSpec& spec, const ParameterSet& params, const Dataset& data);
EvalResult evaluate(const ModelSpec& spec, const ParameterSet& params, const Dataset& test_set);

struct RoundMetrics {
  std::size_t round = 0;  // global round counter, pre-pass included
  std::string mode;       // prepass | full | feature | finetune
  double accuracy = 0.0;
  double loss = 0.0;
  double mean_local_loss = 0.0;
  std::size_t down_scalars = 0;
  std::size_t up_scalars = 0;
  std::size_t cumulative_scalars = 0;
  double seconds = 0.0;   // wall clock; never written to result files
};

std::string metrics_csv_header();
std::string metrics_csv_row(const RoundMetrics& m);

struct FederationState {
  ModelSpec spec;
  FederationConfig config;
  ParameterSet global;
  std::vector<CollaboratorState> collaborators;
  std::shared_ptr<const Dataset> test_set;
  CommLedger ledger;
  std::size_t rounds_done = 0;
};

FederationState make_federation(const ModelSpec& spec, const FederationConfig& config, const Dataset& train,
                                const PartitionSet& partitions, std::shared_ptr<const Dataset> test_set);

// Hooks for inspecting a round from the outside (tests, diagnostics).
struct RoundObserver {
  std::function<void(std::size_t collaborator, const ParameterSet& received, const ParameterSet& trained)> on_local;
  std::function<void(const ParameterSet& before, const ParameterSet& after)> on_aggregate;
};

// One synchronous round: select, send plan.transfer down, train with
// plan's freeze mask, send plan.transfer up, aggregate, evaluate.
RoundMetrics run_round(FederationState& state, const RoundPlan& plan, const RoundObserver* observer = nullptr);

// plan for round t of plain FedAvg under config.
RoundPlan fedavg_round_plan(const FederationState& state, std::size_t t);

}  // namespace fdnc
