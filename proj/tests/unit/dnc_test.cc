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


#include <gtest/gtest.h>

#include "fdnc/dnc.h"
#include "fdnc/errors.h"

namespace fdnc {
namespace {

DncConfig defaults_with_split(std::size_t split, std::size_t layers) {
  DncConfig c;
  c.split = forced_split(split, layers);
  return c;
}

ModelSpec eight_dense() {
  return parse_layers("dense:4 dense:4 dense:4 dense:4 dense:4 dense:4 dense:4 dense:3 head", {4}, 3);
}

TEST(RoundPlan, DefaultSchedule) {
  auto cfg = defaults_with_split(5, 8);
  auto r1 = make_round_plan(1, cfg, 8);
  EXPECT_EQ(r1.mode, RoundMode::kFeature);
  EXPECT_EQ(r1.epochs, 20u);
  EXPECT_DOUBLE_EQ(r1.eta, 0.001);
  EXPECT_EQ(r1.trainable, (LayerRange{1, 5}));
  EXPECT_EQ(r1.transfer, r1.trainable);
  auto r2 = make_round_plan(2, cfg, 8);
  EXPECT_EQ(r2.mode, RoundMode::kFinetune);
  EXPECT_EQ(r2.epochs, 4u);
  EXPECT_NEAR(r2.eta, 0.00045, 1e-15);
  EXPECT_EQ(r2.trainable, (LayerRange{6, 8}));
  auto r3 = make_round_plan(3, cfg, 8);
  EXPECT_EQ(r3.mode, RoundMode::kFeature);
  EXPECT_NEAR(r3.eta, 0.00081, 1e-15);
}

TEST(RoundPlan, ModeParityAndDecreasingRate) {
  auto cfg = defaults_with_split(3, 6);
  for (std::size_t r = 1; r + 2 <= 18; ++r) {
    auto a = make_round_plan(r, cfg, 6), b = make_round_plan(r + 2, cfg, 6);
    EXPECT_EQ(a.mode, b.mode);
    EXPECT_LT(b.eta, a.eta);
  }
  cfg.first_mode = RoundMode::kFinetune;
  EXPECT_EQ(make_round_plan(1, cfg, 6).mode, RoundMode::kFinetune);
}

TEST(RoundPlan, NoSplitIsContractViolation) {
  DncConfig cfg;
  cfg.split = forced_no_split();
  EXPECT_THROW(make_round_plan(1, cfg, 6), ContractError);
}

TEST(DncConfig, Validation) {
  auto cfg = defaults_with_split(2, 4);
  EXPECT_NO_THROW(cfg.validate());
  cfg.finetune_epochs = 30;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = defaults_with_split(2, 4);
  cfg.decay = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = defaults_with_split(2, 4);
  cfg.finetune_eta_scale = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(FreezeMask, FeatureFinetuneAndFull) {
  auto spec = eight_dense();
  auto cfg = defaults_with_split(5, 8);
  auto feature = freeze_mask_for(make_round_plan(1, cfg, 8), spec);
  auto finetune = freeze_mask_for(make_round_plan(2, cfg, 8), spec);
  auto full = freeze_mask_for(full_round_plan(1, spec, 1, 0.1), spec);
  for (std::size_t l = 1; l <= 8; ++l) {
    EXPECT_EQ(feature.is_frozen(l), l >= 6) << l;
    EXPECT_EQ(finetune.is_frozen(l), l <= 5) << l;
    EXPECT_FALSE(full.is_frozen(l));
  }
  EXPECT_EQ(feature.frozen.size(), 8u);
}

TEST(Partial, ExtractMergeDefinitionAndIdempotence) {
  auto spec = eight_dense();
  auto base = init_params(spec, Rng(1, 0));
  auto other = init_params(spec, Rng(2, 0));
  auto part = partial_extract(other, {1, 5});
  EXPECT_EQ(part.params.entries.size(), 5u);
  auto merged = partial_merge(base, part);
  for (std::size_t l = 1; l <= 8; ++l) {
    const auto& src = l <= 5 ? other : base;
    EXPECT_TRUE(bit_equal(merged.at_layer(l).weight, src.at_layer(l).weight));
    EXPECT_TRUE(bit_equal(merged.at_layer(l).bias, src.at_layer(l).bias));
  }
  for (LayerRange r : {LayerRange{1, 1}, LayerRange{3, 6}, LayerRange{1, 8}, LayerRange{8, 8}})
    EXPECT_TRUE(bit_equal(partial_merge(base, partial_extract(base, r)), base));
}

TEST(Partial, SixtyFortyScalarCount) {
  auto spec = build_model({14}, 8, {dense(14, 4), dense(4, 8), softmax_xent_head()});
  ASSERT_EQ(parameter_count(spec), 100u);
  auto cfg = defaults_with_split(1, 2);
  auto p = init_params(spec, Rng(1, 0));
  EXPECT_EQ(partial_extract(p, make_round_plan(1, cfg, 2).transfer).scalar_count(), 60u);
  EXPECT_EQ(partial_extract(p, make_round_plan(2, cfg, 2).transfer).scalar_count(), 40u);
}

TEST(Partial, MismatchIsProtocolError) {
  auto spec = eight_dense();
  auto base = init_params(spec, Rng(1, 0));
  EXPECT_THROW(partial_extract(base, {0, 2}), ProtocolError);
  EXPECT_THROW(partial_extract(base, {3, 9}), ProtocolError);
  auto part = partial_extract(base, {2, 3});
  part.range = {4, 5};
  EXPECT_THROW(partial_merge(base, part), ProtocolError);
  auto other = init_params(parse_layers("dense:5 dense:4 dense:4 dense:4 dense:4 dense:4 dense:4 dense:3 head", {4}, 3),
                           Rng(1, 0));
  EXPECT_THROW(partial_merge(base, partial_extract(other, {1, 2})), ProtocolError);
}

FederationState toy(std::size_t n, std::size_t k, std::uint64_t seed = 4) {
  auto spec = parse_layers("conv:4 relu pool flatten dense:12 relu dense:8 relu dense:4 head", {3, 8, 8}, 4);
  auto train = gen_synthetic_images(64, 4, {3, 8, 8}, seed);
  SyntheticImageOptions o;
  o.sample_stream = 1;
  auto test = std::make_shared<Dataset>(gen_synthetic_images(32, 4, {3, 8, 8}, seed, o));
  FederationConfig fc;
  fc.num_collaborators = n;
  fc.participants = k;
  fc.eta = 0.05;
  fc.local_epochs = 2;
  fc.batch_size = 8;
  fc.seed = seed;
  auto parts = partition_iid(train, n, Rng(seed, purpose_stream(StreamPurpose::kPartition)));
  return make_federation(spec, fc, train, parts, test);
}

DncConfig toy_dnc(std::size_t split, std::size_t rounds) {
  DncConfig c;
  c.split = forced_split(split, 4);
  c.feature_epochs = 2;
  c.finetune_epochs = 1;
  c.eta0 = 0.05;
  c.rounds = rounds;
  return c;
}

TEST(DncTraining, HalfBandwidthOverRoundPairs) {
  auto dnc = toy(3, 3), fed = toy(3, 3);
  auto h = run_dnc_training(dnc, toy_dnc(2, 6));
  for (std::size_t t = 1; t <= 6; ++t) run_round(fed, fedavg_round_plan(fed, t));
  EXPECT_EQ(2 * dnc.ledger.total(), fed.ledger.total());
  const std::size_t n = parameter_count(dnc.spec);
  for (std::size_t r = 1; r <= 6; r += 2) {
    for (std::size_t c = 0; c < 3; ++c) {
      std::size_t down = 0;
      for (const auto& rec : dnc.ledger.records())
        if ((rec.round == r || rec.round == r + 1) && rec.collaborator == c && rec.direction == Direction::kDown)
          down += rec.scalar_count;
      EXPECT_EQ(down, n);
    }
  }
  EXPECT_EQ(h.metrics.size(), 6u);
  EXPECT_EQ(h.metrics[0].mode, "feature");
  EXPECT_EQ(h.metrics[1].mode, "finetune");
}

TEST(DncTraining, FinetuneRoundsConserveFeatureGroup) {
  auto state = toy(3, 2);
  std::vector<std::string> violations;
  std::size_t round = 0;
  ParameterSet before;
  RoundObserver obs;
  obs.on_local = [&](std::size_t id, const ParameterSet& received, const ParameterSet& trained) {
    if (round % 2 == 1) return;  // feature round
    for (std::size_t l = 1; l <= 2; ++l) {
      auto idx = parameterized_layers(state.spec)[l - 1];
      if (!bit_equal(received.at_layer(idx).weight, trained.at_layer(idx).weight))
        violations.push_back("collaborator " + std::to_string(id));
    }
  };
  obs.on_aggregate = [&](const ParameterSet& b, const ParameterSet& a) {
    if (round % 2 == 1) return;
    for (auto idx : {parameterized_layers(state.spec)[0], parameterized_layers(state.spec)[1]})
      if (!bit_equal(b.at_layer(idx).weight, a.at_layer(idx).weight) || !bit_equal(b.at_layer(idx).bias, a.at_layer(idx).bias))
        violations.push_back("aggregator");
  };
  auto cfg = toy_dnc(2, 1);
  for (round = 1; round <= 6; ++round) {
    run_round(state, make_round_plan(round, cfg, 4), &obs);
  }
  EXPECT_TRUE(violations.empty()) << violations.front();
}

TEST(DncTraining, NonParticipantsKeepStaleCaches) {
  auto state = toy(3, 1);
  auto cfg = toy_dnc(2, 1);
  std::vector<ParameterSet> caches;
  for (const auto& c : state.collaborators) caches.push_back(c.cache);
  auto plan = make_round_plan(1, cfg, 4);
  auto chosen = select_participants(state.rounds_done + 1, 3, 1, state.config.seed);
  run_round(state, plan);
  for (std::size_t c = 0; c < 3; ++c) {
    if (c == chosen[0]) {
      EXPECT_FALSE(bit_equal(state.collaborators[c].cache, caches[c]));
    } else {
      EXPECT_TRUE(bit_equal(state.collaborators[c].cache, caches[c]));
    }
  }
}

// With split at n-1, a feature round is FedAvg over the prefix: verify by
// driving local_train and fedavg_aggregate by hand.
TEST(DncTraining, PartialAggregationEqualsRestrictedFedAvg) {
  auto state = toy(2, 2);
  auto shadow = state;
  auto cfg = toy_dnc(3, 1);
  cfg.finetune_epochs = cfg.feature_epochs;
  cfg.finetune_eta_scale = 1.0;
  for (std::size_t r = 1; r <= 2; ++r) {
    auto plan = make_round_plan(r, cfg, 4);
    run_round(state, plan);
    LocalTrainConfig lc;
    lc.epochs = plan.epochs;
    lc.eta = plan.eta;
    lc.batch_size = shadow.config.batch_size;
    lc.mask = freeze_mask_for(plan, shadow.spec);
    std::vector<LocalUpdate> ups;
    for (auto& c : shadow.collaborators) {
      auto start = partial_merge(c.cache, partial_extract(shadow.global, plan.transfer));
      auto u = local_train(shadow.spec, c, start, lc);
      c.cache = u.params;
      u.params = partial_extract(u.params, plan.transfer).params;
      ups.push_back(u);
    }
    partial_merge_in_place(shadow.global, {plan.transfer, fedavg_aggregate(ups, Weighting::kUniform)});
    EXPECT_TRUE(bit_equal(state.global, shadow.global)) << "round " << r;
  }
}

TEST(DncTraining, NoSplitIsPlainFedAvg) {
  auto a = toy(3, 2), b = toy(3, 2);
  DncConfig cfg = toy_dnc(2, 5);
  cfg.split = forced_no_split();
  auto h = run_dnc_training(a, cfg);
  EXPECT_TRUE(h.fell_back_to_fedavg);
  std::vector<RoundMetrics> ms;
  for (std::size_t t = 1; t <= 5; ++t) ms.push_back(run_round(b, fedavg_round_plan(b, t)));
  EXPECT_TRUE(bit_equal(a.global, b.global));
  EXPECT_EQ(a.ledger.records(), b.ledger.records());
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(metrics_csv_row(h.metrics[i]), metrics_csv_row(ms[i]));
}

TEST(DncTraining, TransferBudgetStopsAtBaselineSpend) {
  auto state = toy(2, 2);
  const std::size_t budget = 4 * 2 * 2 * parameter_count(state.spec);  // four FedAvg rounds
  auto h = run_dnc_until_transfer(state, toy_dnc(2, 1), budget);
  EXPECT_EQ(h.metrics.size(), 8u);
  EXPECT_EQ(state.ledger.total(), budget);
}

}  // namespace
}  // namespace fdnc
