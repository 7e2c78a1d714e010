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


#include "fdnc/federation.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <numeric>

#include "fdnc/errors.h"

namespace fdnc {

const char* to_string(Aggregation a) { return a == Aggregation::kFedAvg ? "fedavg" : "fedprox"; }
const char* to_string(Weighting w) { return w == Weighting::kUniform ? "uniform" : "by_sample_count"; }

void FederationConfig::validate() const {
  if (num_collaborators < 1) throw ConfigError("num_collaborators must be >= 1");
  if (participants < 1 || participants > num_collaborators) {
    throw ConfigError("participants must lie in [1, " + std::to_string(num_collaborators) + "], got " +
                      std::to_string(participants));
  }
  if (rounds < 1) throw ConfigError("rounds must be >= 1");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be > 0");
  if (!(eta_decay > 0.0 && eta_decay <= 1.0)) throw ConfigError("eta_decay must lie in (0, 1]");
  if (local_epochs < 1) throw ConfigError("local_epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw ConfigError("mu must be >= 0");
  if (workers < 1) throw ConfigError("workers must be >= 1");
}

LocalUpdate local_train(const ModelSpec& spec, CollaboratorState& state, const ParameterSet& global_params,
                        const LocalTrainConfig& config) {
  if (state.data.size() == 0) {
    throw ConfigError("collaborator " + std::to_string(state.id) + " has an empty partition");
  }
  if (config.epochs < 1) throw ConfigError("local training needs at least one epoch");
  check_params(spec, global_params);
  const bool prox = config.prox_mu > 0.0;
  if (prox && (config.prox_anchor == nullptr || !same_layout(*config.prox_anchor, global_params))) {
    throw ConfigError("FedProx needs an anchor matching the model");
  }
  auto context = [&] {
    return " (round " + std::to_string(config.round) + ", collaborator " + std::to_string(state.id) + ")";
  };

  ParameterSet params = global_params;
  std::vector<std::size_t> order(state.data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch = std::min(config.batch_size, order.size());
  double epoch_loss = 0.0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    state.rng.shuffle(std::span<std::size_t>(order));
    epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t n = std::min(batch, order.size() - start);
      const Batch b = gather(state.data, std::span<const std::size_t>(order).subspan(start, n));
      auto [loss, grads] = loss_and_gradients(spec, params, b, config.mask);
      if (!std::isfinite(loss)) throw NumericError("non-finite training loss" + context());
      epoch_loss += loss * static_cast<double>(n);
      if (prox) {
        const float mu = static_cast<float>(config.prox_mu);
        for (std::size_t k = 0; k < params.entries.size(); ++k) {
          if (config.mask.is_frozen(params.entries[k].layer_index)) continue;
          auto add = [&](std::vector<float>& g, const std::vector<float>& w, const std::vector<float>& a) {
            for (std::size_t j = 0; j < g.size(); ++j) g[j] += mu * (w[j] - a[j]);
          };
          const auto& anchor = config.prox_anchor->entries[k];
          add(grads.entries[k].weight.data, params.entries[k].weight.data, anchor.weight.data);
          add(grads.entries[k].bias.data, params.entries[k].bias.data, anchor.bias.data);
        }
      }
      try {
        sgd_step_in_place(params, grads, config.eta, config.mask);
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + context());
      }
    }
  }
  return {state.id, std::move(params), state.data.size(), epoch_loss / static_cast<double>(order.size())};
}

ParameterSet fedavg_aggregate(std::vector<LocalUpdate> updates, Weighting weighting) {
  if (updates.empty()) throw ProtocolError("aggregation needs at least one update");
  std::sort(updates.begin(), updates.end(),
            [](const LocalUpdate& a, const LocalUpdate& b) { return a.collaborator_id < b.collaborator_id; });
  for (const auto& u : updates) {
    if (!same_layout(u.params, updates.front().params)) {
      throw ProtocolError("update from collaborator " + std::to_string(u.collaborator_id) +
                          " does not match the layout of collaborator " +
                          std::to_string(updates.front().collaborator_id));
    }
  }
  std::vector<double> coeff(updates.size(), 1.0);
  double denom = static_cast<double>(updates.size());
  if (weighting == Weighting::kBySampleCount) {
    denom = 0.0;
    for (std::size_t k = 0; k < updates.size(); ++k) {
      coeff[k] = static_cast<double>(updates[k].sample_count);
      denom += coeff[k];
    }
    if (!(denom > 0.0)) throw ProtocolError("sample-count weighting with zero total samples");
  }

  ParameterSet out = updates.front().params;
  std::vector<double> acc;
  auto reduce = [&](auto member) {
    for (std::size_t e = 0; e < out.entries.size(); ++e) {
      auto& dst = (out.entries[e].*member).data;
      acc.assign(dst.size(), 0.0);
      for (std::size_t k = 0; k < updates.size(); ++k) {
        const auto& src = (updates[k].params.entries[e].*member).data;
        const double c = coeff[k];
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += c * static_cast<double>(src[j]);
      }
      for (std::size_t j = 0; j < acc.size(); ++j) dst[j] = static_cast<float>(acc[j] / denom);
    }
  };
  reduce(&ParamEntry::weight);
  reduce(&ParamEntry::bias);
  return out;
}

std::vector<std::size_t> select_participants(std::size_t round, std::size_t num_collaborators, std::size_t k,
                                             std::uint64_t seed) {
  if (k == 0 || k > num_collaborators) {
    throw ConfigError("cannot select " + std::to_string(k) + " of " + std::to_string(num_collaborators) +
                      " collaborators");
  }
  std::vector<std::size_t> ids(num_collaborators);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  if (k == num_collaborators) return ids;
  Rng rng(seed, purpose_stream(StreamPurpose::kSelection, round));
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(num_collaborators - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(k);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<std::int32_t> predict_labels(const ModelSpec& spec, const ParameterSet& params, const Dataset& data) {
  constexpr std::size_t kChunk = 256;
  std::vector<std::int32_t> out;
  out.reserve(data.size());
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < data.size(); start += kChunk) {
    idx.resize(std::min(kChunk, data.size() - start));
    std::iota(idx.begin(), idx.end(), start);
    const auto result = forward(spec, params, gather(data, idx));
    const std::size_t c = spec.num_classes;
    for (std::size_t b = 0; b < idx.size(); ++b) {
      const float* row = result.predictions.data.data() + b * c;
      std::size_t best = 0;
      for (std::size_t j = 1; j < c; ++j) {
        if (row[j] > row[best]) best = j;
      }
      out.push_back(static_cast<std::int32_t>(best));
    }
  }
  return out;
}

EvalResult evaluate(const ModelSpec& spec, const ParameterSet& params, const Dataset& test_set) {
  if (test_set.size() == 0) throw ConfigError("empty test set");
  constexpr std::size_t kChunk = 256;
  double loss_sum = 0.0;
  std::size_t correct = 0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < test_set.size(); start += kChunk) {
    idx.resize(std::min(kChunk, test_set.size() - start));
    std::iota(idx.begin(), idx.end(), start);
    const Batch batch = gather(test_set, idx);
    const auto result = forward(spec, params, batch);
    loss_sum += result.loss * static_cast<double>(idx.size());
    const std::size_t c = spec.num_classes;
    for (std::size_t b = 0; b < idx.size(); ++b) {
      const float* row = result.predictions.data.data() + b * c;
      std::size_t best = 0;
      for (std::size_t j = 1; j < c; ++j) {
        if (row[j] > row[best]) best = j;
      }
      if (static_cast<std::int32_t>(best) == batch.labels[b]) ++correct;
    }
  }
  const double n = static_cast<double>(test_set.size());
  return {static_cast<double>(correct) / n, loss_sum / n};
}

std::string metrics_csv_header() {
  return "round,mode,accuracy,loss,mean_local_loss,down_scalars,up_scalars,cumulative_scalars\n";
}

std::string metrics_csv_row(const RoundMetrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%zu,%s,%.6f,%.9g,%.9g,%zu,%zu,%zu\n", m.round, m.mode.c_str(), m.accuracy, m.loss,
                m.mean_local_loss, m.down_scalars, m.up_scalars, m.cumulative_scalars);
  return buf;
}

FederationState make_federation(const ModelSpec& spec, const FederationConfig& config, const Dataset& train,
                                const PartitionSet& partitions, std::shared_ptr<const Dataset> test_set) {
  validate(spec);
  config.validate();
  partitions.validate();
  if (partitions.partitions.size() != config.num_collaborators) {
    throw ConfigError("partition set has " + std::to_string(partitions.partitions.size()) +
                      " collaborators but the federation expects " + std::to_string(config.num_collaborators));
  }
  if (partitions.dataset_size != train.size()) throw ConfigError("partition set was built for a different dataset");
  if (train.feature_shape != spec.input_shape || train.num_classes != spec.num_classes) {
    throw ConfigError("dataset shape " + shape_to_string(train.feature_shape) + " does not fit the model input " +
                      shape_to_string(spec.input_shape));
  }
  if (!test_set || test_set->size() == 0) throw ConfigError("a non-empty test set is required");

  FederationState state;
  state.spec = spec;
  state.config = config;
  state.global = init_params(spec, Rng(config.seed, purpose_stream(StreamPurpose::kInit)));
  state.test_set = std::move(test_set);
  for (std::size_t k = 0; k < partitions.partitions.size(); ++k) {
    CollaboratorState c;
    c.id = k;
    c.data = materialize(train, partitions.partitions[k]);
    c.rng = Rng(config.seed, k);
    c.cache = state.global;
    state.collaborators.push_back(std::move(c));
  }
  return state;
}

RoundPlan fedavg_round_plan(const FederationState& state, std::size_t t) {
  const double eta = state.config.eta * std::pow(state.config.eta_decay, static_cast<double>(t) - 1.0);
  return full_round_plan(t, state.spec, state.config.local_epochs, eta);
}

RoundMetrics run_round(FederationState& state, const RoundPlan& plan, const RoundObserver* observer) {
  const auto started = std::chrono::steady_clock::now();
  const std::size_t round = state.rounds_done + 1;
  const auto& cfg = state.config;
  const std::size_t n_layers = state.global.entries.size();
  if (plan.transfer.first < 1 || plan.transfer.last > n_layers || plan.trainable.last > n_layers) {
    throw ProtocolError("round plan ranges exceed the model");
  }
  const FreezeMask mask = freeze_mask_for(plan, state.spec);
  const auto participants = select_participants(round, cfg.num_collaborators, cfg.participants, cfg.seed);

  // Down: the aggregator ships the transfer range; collaborators merge it
  // into their cached full model.
  const PartialParams down = partial_extract(state.global, plan.transfer);
  std::size_t down_total = 0;
  for (auto id : participants) {
    state.ledger.record(round, Direction::kDown, id, down.scalar_count());
    down_total += down.scalar_count();
    partial_merge_in_place(state.collaborators[id].cache, down);
  }

  std::vector<LocalUpdate> trained(participants.size());
  auto train_one = [&](std::size_t slot) {
    auto& collab = state.collaborators[participants[slot]];
    LocalTrainConfig lc{plan.epochs, plan.eta, cfg.batch_size, mask, 0.0, nullptr, round};
    if (cfg.aggregation == Aggregation::kFedProx && cfg.mu > 0.0) {
      lc.prox_mu = cfg.mu;
      lc.prox_anchor = &collab.cache;
    }
    trained[slot] = local_train(state.spec, collab, collab.cache, lc);
  };
  if (cfg.workers <= 1 || participants.size() <= 1) {
    for (std::size_t s = 0; s < participants.size(); ++s) train_one(s);
  } else {
    // Static striping: worker w trains slots w, w + workers, ...
    std::vector<std::future<void>> jobs;
    const std::size_t workers = std::min(cfg.workers, participants.size());
    for (std::size_t w = 0; w < workers; ++w) {
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t s = w; s < participants.size(); s += workers) train_one(s);
      }));
    }
    for (auto& j : jobs) j.get();
  }

  // Up: only the transfer range travels back. Collaborator caches keep
  // their own trained values.
  std::vector<LocalUpdate> uploads;
  std::size_t up_total = 0;
  double local_loss = 0.0;
  for (auto& t : trained) {
    auto& collab = state.collaborators[t.collaborator_id];
    if (observer && observer->on_local) observer->on_local(t.collaborator_id, collab.cache, t.params);
    PartialParams up = partial_extract(t.params, plan.transfer);
    state.ledger.record(round, Direction::kUp, t.collaborator_id, up.scalar_count());
    up_total += up.scalar_count();
    local_loss += t.train_loss;
    collab.cache = std::move(t.params);
    uploads.push_back({t.collaborator_id, std::move(up.params), t.sample_count, t.train_loss});
  }

  // Barrier passed: every participant has reported.
  const ParameterSet before = observer && observer->on_aggregate ? state.global : ParameterSet{};
  PartialParams merged{plan.transfer, fedavg_aggregate(std::move(uploads), cfg.weighting)};
  partial_merge_in_place(state.global, merged);
  if (!state.global.all_finite()) throw NumericError("non-finite global model after round " + std::to_string(round));
  if (observer && observer->on_aggregate) observer->on_aggregate(before, state.global);
  state.rounds_done = round;

  const auto eval = evaluate(state.spec, state.global, *state.test_set);
  RoundMetrics m;
  m.round = round;
  m.mode = to_string(plan.mode);
  m.accuracy = eval.accuracy;
  m.loss = eval.loss;
  m.mean_local_loss = local_loss / static_cast<double>(participants.size());
  m.down_scalars = down_total;
  m.up_scalars = up_total;
  m.cumulative_scalars = state.ledger.total();
  m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return m;
}

}  // namespace fdnc
