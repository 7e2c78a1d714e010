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


#include "fdnc/dnc.h"

#include <cmath>

#include "fdnc/errors.h"

namespace fdnc {

void DncConfig::validate() const {
  if (feature_epochs < 1 || finetune_epochs < 1) throw ConfigError("D&C epochs must be >= 1");
  if (finetune_epochs > feature_epochs) throw ConfigError("finetune_epochs must not exceed feature_epochs");
  if (!(eta0 > 0.0) || !std::isfinite(eta0)) throw ConfigError("eta0 must be > 0");
  if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError("decay must lie in (0, 1]");
  if (!(finetune_eta_scale > 0.0 && finetune_eta_scale <= 1.0)) {
    throw ConfigError("finetune_eta_scale must lie in (0, 1]");
  }
  if (rounds < 1) throw ConfigError("D&C rounds must be >= 1");
  if (first_mode == RoundMode::kFull) throw ConfigError("first_mode must be feature or finetune");
}

RoundPlan make_round_plan(std::size_t round, const DncConfig& cfg, std::size_t num_param_layers) {
  if (!cfg.split.is_split()) throw ContractError("make_round_plan called without a split point");
  if (round < 1) throw ContractError("D&C rounds are 1-based");
  const std::size_t split = cfg.split.split_layer;
  if (split < 1 || split >= num_param_layers) throw ContractError("split point outside the model");
  const bool first = (round - 1) % 2 == 0;
  const RoundMode other = cfg.first_mode == RoundMode::kFeature ? RoundMode::kFinetune : RoundMode::kFeature;
  RoundPlan plan;
  plan.round = round;
  plan.mode = first ? cfg.first_mode : other;
  plan.eta = cfg.eta0 * std::pow(cfg.decay, static_cast<double>(round - 1));
  if (plan.mode == RoundMode::kFeature) {
    plan.trainable = {1, split};
    plan.epochs = cfg.feature_epochs;
  } else {
    plan.trainable = {split + 1, num_param_layers};
    plan.epochs = cfg.finetune_epochs;
    plan.eta *= cfg.finetune_eta_scale;
  }
  plan.transfer = plan.trainable;
  return plan;
}

namespace {

template <typename KeepGoing>
DncHistory drive(FederationState& state, const DncConfig& cfg, const RoundObserver* observer, KeepGoing keep_going) {
  cfg.validate();
  DncHistory history;
  const std::size_t n = state.global.entries.size();
  const std::size_t offset = state.rounds_done;
  if (!cfg.split.is_split()) {
    history.fell_back_to_fedavg = true;
    for (std::size_t r = 1; keep_going(r); ++r) {
      const auto plan = fedavg_round_plan(state, offset + r);
      history.plans.push_back(plan);
      history.metrics.push_back(run_round(state, plan, observer));
    }
    return history;
  }
  for (std::size_t r = 1; keep_going(r); ++r) {
    const auto plan = make_round_plan(r, cfg, n);
    history.plans.push_back(plan);
    history.metrics.push_back(run_round(state, plan, observer));
  }
  return history;
}

}  // namespace

DncHistory run_dnc_training(FederationState& state, const DncConfig& cfg, const RoundObserver* observer) {
  return drive(state, cfg, observer, [&](std::size_t r) { return r <= cfg.rounds; });
}

DncHistory run_dnc_until_transfer(FederationState& state, const DncConfig& cfg, std::size_t budget,
                                  const RoundObserver* observer) {
  const std::size_t start = state.ledger.total();
  return drive(state, cfg, observer, [&](std::size_t) { return state.ledger.total() - start < budget; });
}

}  // namespace fdnc
