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

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "fdnc/errors.h"
#include "fdnc/federation.h"

namespace fdnc {
namespace {

ModelSpec toy_spec() { return parse_layers("flatten dense:8 relu dense:4 head", {3, 4, 4}, 4); }

LocalUpdate update(std::size_t id, const ModelSpec& spec, float value, std::size_t samples = 1) {
  auto p = zero_params(spec);
  for (auto& e : p.entries) {
    std::fill(e.weight.data.begin(), e.weight.data.end(), value);
    std::fill(e.bias.data.begin(), e.bias.data.end(), value);
  }
  return {id, p, samples, 0.0};
}

CollaboratorState collaborator(std::size_t id, Dataset data) {
  CollaboratorState s;
  s.id = id;
  s.data = std::move(data);
  s.rng = Rng(1, id);
  return s;
}

void expect_all(const ParameterSet& p, float v) {
  for (const auto& e : p.entries) {
    for (float x : e.weight.data) EXPECT_EQ(x, v);
    for (float x : e.bias.data) EXPECT_EQ(x, v);
  }
}

TEST(SelectParticipants, AllWhenKEqualsN) {
  for (std::size_t r = 1; r <= 5; ++r)
    EXPECT_EQ(select_participants(r, 4, 4, 9), (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(SelectParticipants, DeterministicSortedDistinct) {
  auto a = select_participants(3, 5, 2, 11);
  EXPECT_EQ(a, select_participants(3, 5, 2, 11));
  ASSERT_EQ(a.size(), 2u);
  EXPECT_LT(a[0], a[1]);
  EXPECT_LT(a[1], 5u);
}

TEST(SelectParticipants, UniformOverRounds) {
  std::vector<int> counts(5, 0);
  for (std::size_t r = 1; r <= 1000; ++r) ++counts[select_participants(r, 5, 1, 3)[0]];
  for (int c : counts) EXPECT_NEAR(c, 200, 40);
}

TEST(SelectParticipants, KGreaterThanNIsConfigError) {
  EXPECT_THROW(select_participants(1, 3, 4, 1), ConfigError);
  EXPECT_THROW(select_participants(1, 3, 0, 1), ConfigError);
}

TEST(FederationConfig, Validation) {
  FederationConfig c;
  c.num_collaborators = 3;
  c.participants = 4;
  EXPECT_THROW(c.validate(), ConfigError);
  c.participants = 2;
  EXPECT_NO_THROW(c.validate());
  c.local_epochs = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.local_epochs = 1;
  c.mu = -1;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(LocalTrain, FullBatchSingleEpochIsOneGradientStep) {
  auto spec = toy_spec();
  auto data = gen_synthetic_images(24, 4, {3, 4, 4}, 2);
  auto global = init_params(spec, Rng(3, 0));
  auto state = collaborator(0, data);
  LocalTrainConfig cfg;
  cfg.epochs = 1;
  cfg.eta = 0.1;
  cfg.batch_size = data.size();
  cfg.mask = FreezeMask::none(spec);
  auto u = local_train(spec, state, global, cfg);
  auto g = backward(spec, global, whole(data));
  for (std::size_t k = 0; k < global.entries.size(); ++k)
    for (std::size_t i = 0; i < global.entries[k].weight.size(); ++i)
      EXPECT_NEAR(u.params.entries[k].weight.data[i],
                  global.entries[k].weight.data[i] - 0.1 * g.entries[k].weight.data[i], 1e-6);
  EXPECT_EQ(u.sample_count, 24u);
}

TEST(LocalTrain, ProxContinuityAtZero) {
  auto spec = toy_spec();
  auto data = gen_synthetic_images(40, 4, {3, 4, 4}, 2);
  auto global = init_params(spec, Rng(3, 0));
  LocalTrainConfig cfg;
  cfg.epochs = 1;
  cfg.eta = 0.1;
  cfg.batch_size = 8;
  cfg.mask = FreezeMask::none(spec);
  cfg.prox_anchor = &global;
  auto s0 = collaborator(0, data), s1 = collaborator(0, data);
  auto a = local_train(spec, s0, global, cfg);
  cfg.prox_mu = 1e-12;
  auto b = local_train(spec, s1, global, cfg);
  for (std::size_t k = 0; k < a.params.entries.size(); ++k)
    for (std::size_t i = 0; i < a.params.entries[k].weight.size(); ++i)
      EXPECT_LT(std::abs(a.params.entries[k].weight.data[i] - b.params.entries[k].weight.data[i]), 1e-6);
}

TEST(LocalTrain, StationaryPointUnchangedForAnyMu) {
  auto spec = build_model({3}, 2, {dense(3, 2), softmax_xent_head()});
  Dataset d;
  d.feature_shape = {3};
  d.num_classes = 2;
  const float x[] = {0.3f, -1.0f, 2.0f};
  d.add(x, 0);
  d.add(x, 1);
  auto global = zero_params(spec);
  for (double mu : {0.0, 0.5, 10.0}) {
    auto s = collaborator(0, d);
    LocalTrainConfig cfg;
    cfg.epochs = 3;
    cfg.eta = 0.5;
    cfg.batch_size = 2;
    cfg.mask = FreezeMask::none(spec);
    cfg.prox_mu = mu;
    cfg.prox_anchor = &global;
    EXPECT_TRUE(bit_equal(local_train(spec, s, global, cfg).params, global)) << mu;
  }
}

TEST(LocalTrain, Errors) {
  auto spec = toy_spec();
  auto global = init_params(spec, Rng(3, 0));
  LocalTrainConfig cfg;
  cfg.eta = 0.1;
  cfg.mask = FreezeMask::none(spec);
  Dataset empty;
  empty.feature_shape = {3, 4, 4};
  empty.num_classes = 4;
  auto s = collaborator(0, empty);
  EXPECT_THROW(local_train(spec, s, global, cfg), ConfigError);

  auto data = gen_synthetic_images(8, 4, {3, 4, 4}, 2);
  data.features[5] = NAN;
  auto bad = collaborator(3, data);
  cfg.round = 7;
  try {
    local_train(spec, bad, global, cfg);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("round 7"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("collaborator 3"), std::string::npos) << e.what();
  }
}

TEST(Aggregate, UniformMean) {
  auto spec = toy_spec();
  expect_all(fedavg_aggregate({update(0, spec, 0.0f), update(1, spec, 2.0f)}, Weighting::kUniform), 1.0f);
}

TEST(Aggregate, SingleUpdatePassesThrough) {
  auto spec = toy_spec();
  auto u = update(4, spec, 0.0f);
  u.params = init_params(spec, Rng(2, 0));
  EXPECT_TRUE(bit_equal(fedavg_aggregate({u}, Weighting::kUniform), u.params));
}

TEST(Aggregate, BySampleCount) {
  auto spec = toy_spec();
  expect_all(fedavg_aggregate({update(0, spec, 0.0f, 1), update(1, spec, 4.0f, 3)}, Weighting::kBySampleCount), 3.0f);
}

TEST(Aggregate, ShapeMismatchIsProtocolError) {
  auto a = update(0, toy_spec(), 1.0f);
  auto b = update(1, parse_layers("flatten dense:6 relu dense:4 head", {3, 4, 4}, 4), 1.0f);
  EXPECT_THROW(fedavg_aggregate({a, b}, Weighting::kUniform), ProtocolError);
  EXPECT_THROW(fedavg_aggregate({}, Weighting::kUniform), ProtocolError);
}

TEST(Aggregate, ArrivalOrderDoesNotMatter) {
  auto spec = toy_spec();
  std::vector<LocalUpdate> us;
  for (std::size_t k = 0; k < 5; ++k) us.push_back({k, init_params(spec, Rng(k, 0)), 3 + k, 0.0});
  auto ref = fedavg_aggregate(us, Weighting::kBySampleCount);
  std::reverse(us.begin(), us.end());
  EXPECT_TRUE(bit_equal(fedavg_aggregate(us, Weighting::kBySampleCount), ref));
  std::rotate(us.begin(), us.begin() + 2, us.end());
  EXPECT_TRUE(bit_equal(fedavg_aggregate(us, Weighting::kBySampleCount), ref));
}

TEST(Aggregate, Linearity) {
  auto spec = toy_spec();
  std::vector<LocalUpdate> us, scaled;
  const float a = 3.0f;
  for (std::size_t k = 0; k < 3; ++k) {
    us.push_back({k, init_params(spec, Rng(k, 0)), 1, 0.0});
    scaled.push_back(us.back());
    for (auto& e : scaled.back().params.entries)
      for (auto& w : e.weight.data) w *= a;
  }
  auto base = fedavg_aggregate(us, Weighting::kUniform);
  auto lin = fedavg_aggregate(scaled, Weighting::kUniform);
  for (std::size_t k = 0; k < base.entries.size(); ++k)
    for (std::size_t i = 0; i < base.entries[k].weight.size(); ++i)
      EXPECT_NEAR(lin.entries[k].weight.data[i], a * base.entries[k].weight.data[i],
                  1e-6 * (1 + std::abs(lin.entries[k].weight.data[i])));
}

TEST(Evaluate, PerfectPredictions) {
  auto spec = build_model({4}, 4, {dense(4, 4), softmax_xent_head()});
  auto p = zero_params(spec);
  for (std::size_t k = 0; k < 4; ++k) p.entries[0].weight.data[k * 4 + k] = 5.0f;
  Dataset d;
  d.feature_shape = {4};
  d.num_classes = 4;
  for (int k = 0; k < 4; ++k) {
    float x[4] = {0, 0, 0, 0};
    x[k] = 1;
    d.add(x, k);
  }
  EXPECT_EQ(evaluate(spec, p, d).accuracy, 1.0);
}

TEST(Evaluate, ZeroWeightsTieToClassZero) {
  auto spec = desk_cnn({3, 8, 8}, 10, 8);
  auto d = gen_synthetic_images(100, 10, {3, 8, 8}, 1);
  auto r = evaluate(spec, zero_params(spec), d);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.1);
  EXPECT_NEAR(r.loss, std::log(10.0), 1e-6);
  for (auto label : predict_labels(spec, zero_params(spec), d)) EXPECT_EQ(label, 0);
}

FederationState toy_federation(std::size_t workers = 1, std::uint64_t seed = 5) {
  auto spec = toy_spec();
  auto train = gen_synthetic_images(80, 4, {3, 4, 4}, seed);
  auto test = std::make_shared<Dataset>(gen_synthetic_images(40, 4, {3, 4, 4}, seed + 100));
  FederationConfig fc;
  fc.num_collaborators = 4;
  fc.participants = 3;
  fc.eta = 0.1;
  fc.local_epochs = 2;
  fc.batch_size = 8;
  fc.seed = seed;
  fc.workers = workers;
  auto parts = partition_iid(train, 4, Rng(seed, purpose_stream(StreamPurpose::kPartition)));
  return make_federation(spec, fc, train, parts, test);
}

// Recount accuracy from dumped predictions of a trained model.
TEST(Evaluate, MatchesRecountOfPredictions) {
  auto state = toy_federation();
  for (std::size_t t = 1; t <= 3; ++t) run_round(state, fedavg_round_plan(state, t));
  auto labels = predict_labels(state.spec, state.global, *state.test_set);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += labels[i] == state.test_set->labels[i];
  EXPECT_DOUBLE_EQ(evaluate(state.spec, state.global, *state.test_set).accuracy,
                   static_cast<double>(hits) / static_cast<double>(labels.size()));
}

TEST(RunRound, EqualPartitionsMatchCentralizedStep) {
  auto spec = toy_spec();
  auto half = gen_synthetic_images(20, 4, {3, 4, 4}, 8);
  Dataset pooled = half;
  for (std::size_t i = 0; i < half.size(); ++i) pooled.add(half.sample(i), half.labels[i]);
  PartitionSet parts{"manual", {}, pooled.size(), {}};
  for (std::size_t k = 0; k < 2; ++k) {
    Partition p{k, {}, {}};
    for (std::size_t i = 0; i < 20; ++i) p.sample_indices.push_back(k * 20 + i);
    p.transforms.assign(20, Transform::kNone);
    parts.partitions.push_back(p);
  }
  FederationConfig fc;
  fc.num_collaborators = fc.participants = 2;
  fc.eta = 0.2;
  fc.local_epochs = 1;
  fc.batch_size = 20;
  auto state = make_federation(spec, fc, pooled, parts, std::make_shared<Dataset>(half));
  const auto w0 = state.global;
  run_round(state, fedavg_round_plan(state, 1));
  auto g = backward(spec, w0, whole(pooled));
  auto expected = sgd_step(w0, g, 0.2, FreezeMask::none(spec));
  for (std::size_t k = 0; k < w0.entries.size(); ++k) {
    for (std::size_t i = 0; i < w0.entries[k].weight.size(); ++i)
      EXPECT_NEAR(state.global.entries[k].weight.data[i], expected.entries[k].weight.data[i], 1e-5);
    for (std::size_t i = 0; i < w0.entries[k].bias.size(); ++i)
      EXPECT_NEAR(state.global.entries[k].bias.data[i], expected.entries[k].bias.data[i], 1e-5);
  }
}

TEST(RunRound, LedgerRecordsFullModelBothWays) {
  auto state = toy_federation();
  auto m = run_round(state, fedavg_round_plan(state, 1));
  const std::size_t n = parameter_count(state.spec);
  ASSERT_EQ(state.ledger.records().size(), 2u * 3);
  std::size_t down = 0, up = 0;
  for (const auto& r : state.ledger.records()) {
    EXPECT_EQ(r.scalar_count, n);
    EXPECT_EQ(r.round, 1u);
    (r.direction == Direction::kDown ? down : up) += 1;
  }
  EXPECT_EQ(down, 3u);
  EXPECT_EQ(up, 3u);
  EXPECT_EQ(m.down_scalars, 3 * n);
  EXPECT_EQ(m.up_scalars, 3 * n);
  EXPECT_EQ(m.cumulative_scalars, state.ledger.total());
  EXPECT_EQ(m.mode, "full");
  EXPECT_GE(m.accuracy, 0.0);
  EXPECT_LE(m.accuracy, 1.0);
}

TEST(RunRound, DeterministicAcrossExecutions) {
  auto a = toy_federation(), b = toy_federation();
  for (std::size_t t = 1; t <= 3; ++t) {
    run_round(a, fedavg_round_plan(a, t));
    run_round(b, fedavg_round_plan(b, t));
  }
  EXPECT_TRUE(bit_equal(a.global, b.global));
  EXPECT_EQ(a.ledger.records(), b.ledger.records());
}

TEST(RunRound, WorkerCountDoesNotChangeResults) {
  auto a = toy_federation(1), b = toy_federation(3);
  for (std::size_t t = 1; t <= 3; ++t) {
    auto ma = run_round(a, fedavg_round_plan(a, t));
    auto mb = run_round(b, fedavg_round_plan(b, t));
    EXPECT_EQ(ma.accuracy, mb.accuracy);
    EXPECT_EQ(ma.mean_local_loss, mb.mean_local_loss);
  }
  EXPECT_TRUE(bit_equal(a.global, b.global));
}

TEST(RunRound, ProxWithZeroMuIsFedAvg) {
  auto a = toy_federation(), b = toy_federation();
  b.config.aggregation = Aggregation::kFedProx;
  b.config.mu = 0.0;
  for (std::size_t t = 1; t <= 3; ++t) {
    run_round(a, fedavg_round_plan(a, t));
    run_round(b, fedavg_round_plan(b, t));
  }
  EXPECT_TRUE(bit_equal(a.global, b.global));
}

TEST(RunRound, LearningRateDecaysPerRound) {
  auto state = toy_federation();
  state.config.eta_decay = 0.5;
  EXPECT_DOUBLE_EQ(fedavg_round_plan(state, 1).eta, 0.1);
  EXPECT_DOUBLE_EQ(fedavg_round_plan(state, 3).eta, 0.025);
}

TEST(MakeFederation, RejectsMismatches) {
  auto spec = toy_spec();
  auto train = gen_synthetic_images(20, 4, {3, 4, 4}, 1);
  auto test = std::make_shared<Dataset>(train);
  FederationConfig fc;
  fc.num_collaborators = 3;
  fc.participants = 2;
  auto parts = partition_iid(train, 2, Rng(1, 3));
  EXPECT_THROW(make_federation(spec, fc, train, parts, test), ConfigError);
  fc.num_collaborators = 2;
  auto other = parse_layers("flatten dense:4 head", {3, 8, 8}, 4);
  EXPECT_THROW(make_federation(other, fc, train, parts, test), ConfigError);
}

TEST(MetricsCsv, Schema) {
  EXPECT_EQ(metrics_csv_header(),
            "round,mode,accuracy,loss,mean_local_loss,down_scalars,up_scalars,cumulative_scalars\n");
  RoundMetrics m{3, "feature", 0.5, 1.25, 2.5, 10, 20, 300, 9.0};
  EXPECT_EQ(metrics_csv_row(m), "3,feature,0.500000,1.25,2.5,10,20,300\n");
}

TEST(Ledger, CsvReconcilesWithTotals) {
  auto state = toy_federation();
  for (std::size_t t = 1; t <= 2; ++t) run_round(state, fedavg_round_plan(state, t));
  const auto csv = state.ledger.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "round,direction,collaborator,scalar_count");
  std::size_t sum = 0, down = 0;
  std::istringstream in(csv.substr(csv.find('\n') + 1));
  for (std::string line; std::getline(in, line);) {
    const auto last = line.rfind(',');
    const std::size_t n = std::stoull(line.substr(last + 1));
    sum += n;
    if (line.find(",down,") != std::string::npos) down += n;
  }
  EXPECT_EQ(sum, state.ledger.total());
  EXPECT_EQ(down, state.ledger.total(Direction::kDown));
  EXPECT_EQ(state.ledger.round_total(2, Direction::kUp), 3 * parameter_count(state.spec));
}

}  // namespace
}  // namespace fdnc
