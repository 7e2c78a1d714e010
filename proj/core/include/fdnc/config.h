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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fdnc/divergence.h"
#include "fdnc/federation.h"
#include "fdnc/model.h"
#include "fdnc/round_plan.h"

namespace fdnc {

enum class Algorithm { kFedAvg, kFedProx, kDnc };
const char* to_string(Algorithm a);

enum class DatasetKind { kSyntheticImages, kCifar10, kRoleText };
const char* to_string(DatasetKind k);

enum class PartitionScheme { kIid, kColorSkew, kClassImbalance, kLabelExclusive, kByGroup };
const char* to_string(PartitionScheme s);

struct DatasetConfig {
  DatasetKind kind = DatasetKind::kSyntheticImages;
  // synthetic_images
  std::size_t train_samples = 2000;
  std::size_t test_samples = 500;
  std::size_t num_classes = 10;
  std::size_t height = 16;
  std::size_t width = 16;
  double pixel_noise = 0.12;
  double color_strength = 0.6;
  std::size_t max_shift = 2;
  // cifar10
  std::vector<std::string> train_paths;
  std::vector<std::string> test_paths;
  std::size_t train_limit = 0;  // 0 = every record
  std::size_t test_limit = 0;
  // role_text
  std::size_t num_roles = 8;
  std::size_t chars_per_role = 2000;
  std::size_t vocab = 16;
  double test_fraction = 0.2;

  bool operator==(const DatasetConfig&) const = default;
};

struct PartitionConfig {
  PartitionScheme scheme = PartitionScheme::kIid;
  std::size_t num_collaborators = 2;  // iid, class_imbalance
  double skew_fraction = 0.95;
  double alpha = 0.5;
  std::size_t min_points = 1;
  std::size_t sample_count = 1;
  std::string file;  // import a saved partition set instead of building one

  bool operator==(const PartitionConfig&) const = default;
};

struct ModelConfig {
  std::string layers;  // empty = default for the dataset
  std::size_t hidden = 64;

  bool operator==(const ModelConfig&) const = default;
};

struct FederationSection {
  std::size_t participants = 0;  // 0 = all
  std::size_t rounds = 18;
  double eta = 0.001;
  double eta_decay = 0.9;
  std::size_t local_epochs = 20;
  std::size_t batch_size = 32;
  double mu = 0.01;
  Weighting weighting = Weighting::kUniform;
  std::size_t workers = 1;

  bool operator==(const FederationSection&) const = default;
};

// split: 0 = choose from the pre-pass profile, kNoSplitForced = never split,
// otherwise the forced L*.
inline constexpr std::size_t kAutoSplit = 0;
inline constexpr std::size_t kNoSplitForced = static_cast<std::size_t>(-1);

struct DncSection {
  std::size_t prepass_rounds = 5;
  std::size_t diagnostic_rounds = 3;
  DivergenceMetric metric = DivergenceMetric::kCosine;
  double knee_ratio = 2.0;
  double flat_tolerance = 1.5;
  std::size_t split = kAutoSplit;
  std::size_t feature_epochs = 20;
  std::size_t finetune_epochs = 4;
  double eta0 = 0.001;
  double decay = 0.9;
  double finetune_eta_scale = 0.5;
  RoundMode first_mode = RoundMode::kFeature;
  bool transfer_matched = false;

  bool operator==(const DncSection&) const = default;
};

struct ExperimentConfig {
  std::string name;
  Algorithm algorithm = Algorithm::kDnc;
  std::uint64_t seed = 1;
  std::string output;
  DatasetConfig dataset;
  PartitionConfig partition;
  ModelConfig model;
  FederationSection federation;
  DncSection dnc;

  // Collaborator count implied by the dataset and partition sections.
  std::size_t num_collaborators() const;
  std::size_t participants() const;

  bool operator==(const ExperimentConfig&) const = default;
};

// Sectioned key-value text:
//   # comment
//   [section]
//   key = value
// Unknown sections or keys, missing required sections and out-of-range
// values raise ConfigError. A [manifest] section is accepted and ignored
// so run manifests parse as configs.
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig parse_config(const std::filesystem::path& path);

// Every resolved value, in a fixed order; parses back to an equal config.
std::string to_text(const ExperimentConfig& config);

void validate(const ExperimentConfig& config);

Shape input_shape_for(const DatasetConfig& dataset);
std::size_t num_classes_for(const DatasetConfig& dataset);
// [model] layers, or the dataset's default topology.
ModelSpec model_spec_for(const ExperimentConfig& config);

}  // namespace fdnc
