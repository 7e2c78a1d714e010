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


#include "fdnc/experiment.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "fdnc/checkpoint.h"
#include "fdnc/errors.h"
#include "fdnc/rng.h"

namespace fdnc {

namespace {

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

Dataset take_first(Dataset data, std::size_t limit) {
  if (limit == 0 || limit >= data.size()) return data;
  data.labels.resize(limit);
  data.features.resize(limit * data.feature_size());
  if (data.has_group_keys()) data.group_keys.resize(limit);
  return data;
}

Dataset subset(const Dataset& data, std::span<const std::size_t> indices) {
  Dataset out;
  out.feature_shape = data.feature_shape;
  out.num_classes = data.num_classes;
  for (auto i : indices) out.add(data.sample(i), data.labels[i], data.has_group_keys() ? data.group_keys[i] : "");
  if (!data.has_group_keys()) out.group_keys.clear();
  return out;
}

std::string label_for(const ExperimentConfig& c) {
  if (c.algorithm == Algorithm::kDnc && c.dnc.transfer_matched) return "dnc_prime";
  return to_string(c.algorithm);
}

}  // namespace

std::vector<RoundMetrics> RunResult::training_metrics() const {
  return {metrics.begin() + static_cast<std::ptrdiff_t>(prepass_rows), metrics.end()};
}

ExperimentData build_data(const ExperimentConfig& config) {
  const auto& d = config.dataset;
  ExperimentData out;
  switch (d.kind) {
    case DatasetKind::kSyntheticImages: {
      SyntheticImageOptions opts;
      opts.pixel_noise = d.pixel_noise;
      opts.color_strength = d.color_strength;
      opts.max_shift = static_cast<int>(d.max_shift);
      const Shape shape = input_shape_for(d);
      out.train = gen_synthetic_images(d.train_samples, d.num_classes, shape, config.seed, opts);
      opts.sample_stream = 1;
      out.test = std::make_shared<Dataset>(gen_synthetic_images(d.test_samples, d.num_classes, shape, config.seed, opts));
      break;
    }
    case DatasetKind::kCifar10: {
      auto to_paths = [](const std::vector<std::string>& v) {
        return std::vector<std::filesystem::path>(v.begin(), v.end());
      };
      out.train = take_first(load_cifar10_binary(to_paths(d.train_paths)), d.train_limit);
      out.test = std::make_shared<Dataset>(take_first(load_cifar10_binary(to_paths(d.test_paths)), d.test_limit));
      break;
    }
    case DatasetKind::kRoleText: {
      Dataset all = gen_role_text(d.num_roles, d.chars_per_role, d.vocab,
                                  Rng(config.seed, purpose_stream(StreamPurpose::kDataset)));
      std::vector<std::size_t> order(all.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      Rng rng(config.seed, purpose_stream(StreamPurpose::kTestSet));
      rng.shuffle(std::span<std::size_t>(order));
      const auto n_test = static_cast<std::size_t>(d.test_fraction * static_cast<double>(all.size()));
      std::vector<std::size_t> test_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
      std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
      std::sort(test_idx.begin(), test_idx.end());
      std::sort(train_idx.begin(), train_idx.end());
      out.train = subset(all, train_idx);
      out.test = std::make_shared<Dataset>(subset(all, test_idx));
      break;
    }
  }
  if (out.train.size() == 0 || out.test->size() == 0) throw ConfigError("dataset produced no samples");
  return out;
}

PartitionSet build_partitions(const ExperimentConfig& config, const Dataset& train) {
  const auto& p = config.partition;
  PartitionSet set;
  if (!p.file.empty()) {
    set = load_partition_set(p.file);
  } else {
    Rng rng(config.seed, purpose_stream(StreamPurpose::kPartition));
    switch (p.scheme) {
      case PartitionScheme::kIid: set = partition_iid(train, p.num_collaborators, rng); break;
      case PartitionScheme::kColorSkew: set = partition_color_skew(train, p.skew_fraction, rng); break;
      case PartitionScheme::kClassImbalance:
        set = partition_class_imbalance(train, p.num_collaborators, p.alpha, rng);
        break;
      case PartitionScheme::kLabelExclusive: set = partition_label_exclusive(train, rng); break;
      case PartitionScheme::kByGroup: set = partition_by_group(train, p.min_points, p.sample_count, rng); break;
    }
  }
  if (set.dataset_size != train.size()) {
    throw ConfigError("partition set covers " + std::to_string(set.dataset_size) + " samples, dataset has " +
                      std::to_string(train.size()));
  }
  if (set.partitions.size() != config.num_collaborators()) {
    throw ConfigError("partition set has " + std::to_string(set.partitions.size()) + " collaborators, config implies " +
                      std::to_string(config.num_collaborators()));
  }
  set.validate();
  return set;
}

FederationConfig federation_config_for(const ExperimentConfig& c) {
  FederationConfig f;
  f.num_collaborators = c.num_collaborators();
  f.participants = c.participants();
  f.rounds = c.federation.rounds;
  f.eta = c.federation.eta;
  f.eta_decay = c.federation.eta_decay;
  f.local_epochs = c.federation.local_epochs;
  f.batch_size = c.federation.batch_size;
  f.aggregation = c.algorithm == Algorithm::kFedProx ? Aggregation::kFedProx : Aggregation::kFedAvg;
  f.mu = c.algorithm == Algorithm::kFedProx ? c.federation.mu : 0.0;
  f.weighting = c.federation.weighting;
  f.seed = c.seed;
  f.workers = c.federation.workers;
  return f;
}

std::string metrics_csv(const std::vector<RoundMetrics>& rows) {
  std::string out = metrics_csv_header();
  for (const auto& m : rows) out += metrics_csv_row(m);
  return out;
}

std::string manifest_text(const RunResult& r, const std::string& status) {
  std::ostringstream out;
  out << to_text(r.config) << "\n[manifest]\n";
  out << "format = fdnc-manifest 1\n";
  out << "status = " << status << "\n";
  out << "label = " << r.label << "\n";
  out << "model = " << describe_layers(r.spec) << "\n";
  out << "parameters = " << parameter_count(r.spec) << "\n";
  out << "collaborators = " << r.partitions.partitions.size() << "\n";
  out << "prepass_rows = " << r.prepass_rows << "\n";
  out << "training_rows = " << r.metrics.size() - r.prepass_rows << "\n";
  out << "cumulative_scalars = " << r.ledger.total() << "\n";
  if (r.split) out << "split = " << r.split->describe() << "\n";
  if (r.fell_back_to_fedavg) out << "fallback = fedavg\n";
  return out.str();
}

void emit_outputs(const RunResult& r, const std::filesystem::path& dir, const std::string& status) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "manifest.txt", manifest_text(r, status));
  write_file(dir / "metrics.csv", metrics_csv(r.metrics));
  write_file(dir / "ledger.csv", r.ledger.to_csv());
  if (!r.partitions.partitions.empty()) write_file(dir / "partition.txt", to_text(r.partitions));
  if (!r.profiles.empty()) {
    write_file(dir / "divergence.csv", divergence_csv(r.profiles));
    write_file(dir / "divergence_collaborators.csv", collaborator_divergence_csv(r.collaborator_profiles));
  }
  if (!r.final_params.entries.empty()) save_checkpoint(dir / "final.ckpt", r.final_params);
}

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  validate(config);
  RunResult result;
  result.config = config;
  result.label = label_for(config);
  const bool emit = options.write_outputs && !config.output.empty();
  std::optional<FederationState> state;

  try {
    result.spec = model_spec_for(config);
    auto data = build_data(config);
    result.partitions = build_partitions(config, data.train);
    state.emplace(make_federation(result.spec, federation_config_for(config), data.train, result.partitions, data.test));

    if (config.algorithm == Algorithm::kDnc) {
      const auto& d = config.dnc;
      const std::size_t n_layers = parameterized_layers(result.spec).size();
      if (d.split == kAutoSplit) {
        PrepassOptions po;
        po.prepass_rounds = d.prepass_rounds;
        po.diagnostic_rounds = d.diagnostic_rounds;
        po.metric = d.metric;
        auto pre = prepass(*state, po);
        result.metrics = pre.metrics;
        result.prepass_rows = pre.metrics.size();
        result.profiles = std::move(pre.profiles);
        result.collaborator_profiles = std::move(pre.collaborator_profiles);
        result.split = select_split(result.profiles, {d.knee_ratio, d.flat_tolerance});
      } else if (d.split == kNoSplitForced) {
        result.split = forced_no_split();
      } else {
        result.split = forced_split(d.split, n_layers);
      }
      if (!options.prepass_only) {
        DncConfig dc;
        dc.split = *result.split;
        dc.feature_epochs = d.feature_epochs;
        dc.finetune_epochs = d.finetune_epochs;
        dc.eta0 = d.eta0;
        dc.decay = d.decay;
        dc.finetune_eta_scale = d.finetune_eta_scale;
        dc.rounds = config.federation.rounds;
        dc.first_mode = d.first_mode;
        DncHistory h;
        if (d.transfer_matched) {
          // Cumulative transfer of the FedAvg baseline over the same rounds.
          const std::size_t budget =
              config.federation.rounds * config.participants() * 2 * parameter_count(result.spec);
          h = run_dnc_until_transfer(*state, dc, budget);
        } else {
          h = run_dnc_training(*state, dc);
        }
        result.metrics.insert(result.metrics.end(), h.metrics.begin(), h.metrics.end());
        result.plans = std::move(h.plans);
        result.fell_back_to_fedavg = h.fell_back_to_fedavg;
      }
    } else if (!options.prepass_only) {
      for (std::size_t t = 1; t <= config.federation.rounds; ++t)
        result.metrics.push_back(run_round(*state, fedavg_round_plan(*state, t)));
    }
    result.ledger = state->ledger;
    result.final_params = state->global;
  } catch (const Error& e) {
    if (state) {
      result.ledger = state->ledger;
      result.final_params = state->global;
    }
    std::string context = "experiment '" + config.name + "': " + e.what();
    if (emit) {
      try {
        emit_outputs(result, config.output, std::string("failed: ") + to_string(e.kind()));
      } catch (const Error&) {
        // the original error matters more than a failed flush
      }
    }
    throw_error(e.kind(), context);
  }
  if (emit) emit_outputs(result, config.output);
  return result;
}

std::vector<RoundMetrics> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line + "\n" != metrics_csv_header())
    throw FormatError(path.string() + ": unexpected metrics header");
  std::vector<RoundMetrics> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 8) throw FormatError(path.string() + ": line " + std::to_string(line_no) + " needs 8 columns");
    try {
      RoundMetrics m;
      m.round = std::stoull(cells[0]);
      m.mode = cells[1];
      m.accuracy = std::stod(cells[2]);
      m.loss = std::stod(cells[3]);
      m.mean_local_loss = std::stod(cells[4]);
      m.down_scalars = std::stoull(cells[5]);
      m.up_scalars = std::stoull(cells[6]);
      m.cumulative_scalars = std::stoull(cells[7]);
      rows.push_back(std::move(m));
    } catch (const std::exception&) {
      throw FormatError(path.string() + ": line " + std::to_string(line_no) + " is not a metrics row");
    }
  }
  return rows;
}

}  // namespace fdnc
