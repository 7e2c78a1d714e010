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
#include <vector>

#include "fdnc/divergence.h"
#include "fdnc/federation.h"
#include "fdnc/round_plan.h"

namespace fdnc {

struct DncConfig {
  SplitDecision split;
  std::size_t feature_epochs = 20;
  std::size_t finetune_epochs = 4;
  double eta0 = 0.001;
  double decay = 0.9;               // per-round multiplicative learning-rate factor
  double finetune_eta_scale = 0.5;
  std::size_t rounds = 18;
  RoundMode first_mode = RoundMode::kFeature;

  void validate() const;
};

// Alternating feature / finetune plan for a 1-based round. Throws
// ContractError when cfg.split is no_split.
RoundPlan make_round_plan(std::size_t round, const DncConfig& cfg, std::size_t num_param_layers);

struct DncHistory {
  std::vector<RoundPlan> plans;
  std::vector<RoundMetrics> metrics;
  bool fell_back_to_fedavg = false;
};

// Runs cfg.rounds rounds on a federation whose aggregator and collaborator
// caches already agree (e.g. after the pre-pass). With no_split the driver
// continues plain FedAvg rounds under the federation's own schedule.
DncHistory run_dnc_training(FederationState& state, const DncConfig& cfg, const RoundObserver* observer = nullptr);

// Runs D&C rounds until the transfer spent since entry reaches budget.
DncHistory run_dnc_until_transfer(FederationState& state, const DncConfig& cfg, std::size_t budget,
                                  const RoundObserver* observer = nullptr);

}  // namespace fdnc
