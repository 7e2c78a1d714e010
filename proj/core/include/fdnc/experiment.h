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

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fdnc/config.h"
#include "fdnc/dataset.h"
#include "fdnc/divergence.h"
#include "fdnc/dnc.h"
#include "fdnc/federation.h"
#include "fdnc/ledger.h"
#include "fdnc/params.h"
#include "fdnc/partition.h"

namespace fdnc {

struct ExperimentData {
  Dataset train;
  std::shared_ptr<const Dataset> test;
};

// Train and test sets for the [dataset] section, deterministic in seed.
ExperimentData build_data(const ExperimentConfig& config);

// The [partition] section applied to train, or the imported file.
PartitionSet build_partitions(const ExperimentConfig& config, const Dataset& train);

FederationConfig federation_config_for(const ExperimentConfig& config);

struct RunResult {
  ExperimentConfig config;
  std::string label;                 // fedavg, fedprox, dnc, dnc_prime
  ModelSpec spec;
  PartitionSet partitions;
  std::vector<RoundMetrics> metrics; // pre-pass rows first, flagged by mode
  std::size_t prepass_rows = 0;
  CommLedger ledger;
  ParameterSet final_params;
  std::optional<SplitDecision> split;
  std::vector<DivergenceProfile> profiles;
  std::vector<CollaboratorProfile> collaborator_profiles;
  std::vector<RoundPlan> plans;      // D&C rounds only
  bool fell_back_to_fedavg = false;

  // Rows after the pre-pass.
  std::vector<RoundMetrics> training_metrics() const;
};

struct RunOptions {
  bool prepass_only = false;  // stop after the split decision
  bool write_outputs = true;  // to config.output when set
};

// Builds data, partitions, model and federation, then runs the selected
// algorithm. With an output directory every artifact is written there;
// on failure whatever exists so far is flushed before the error propagates
// with the experiment name attached.
RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

std::string manifest_text(const RunResult& result, const std::string& status = "complete");
std::string metrics_csv(const std::vector<RoundMetrics>& rows);

// manifest.txt metrics.csv ledger.csv final.ckpt partition.txt and, when a
// pre-pass ran, divergence.csv and divergence_collaborators.csv.
void emit_outputs(const RunResult& result, const std::filesystem::path& dir, const std::string& status = "complete");

// Reads metrics.csv back; used by the compare subcommand.
std::vector<RoundMetrics> read_metrics_csv(const std::filesystem::path& path);

}  // namespace fdnc
