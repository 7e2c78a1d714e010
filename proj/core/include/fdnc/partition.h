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
#include <utility>
#include <vector>

#include "fdnc/dataset.h"
#include "fdnc/rng.h"

namespace fdnc {

enum class Transform : std::uint8_t { kNone, kGrayscale };

struct Partition {
  std::size_t collaborator_id = 0;
  std::vector<std::size_t> sample_indices;
  std::vector<Transform> transforms;  // parallel to sample_indices

  std::size_t size() const noexcept { return sample_indices.size(); }
  std::size_t grayscale_count() const noexcept;

  bool operator==(const Partition&) const = default;
};

struct PartitionSet {
  std::string scheme;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::size_t dataset_size = 0;
  std::vector<Partition> partitions;

  // p_k = |partition_k| / sum_j |partition_j|
  std::vector<double> weights() const;
  // Indices in range, no index used twice anywhere in the set.
  void validate() const;

  bool operator==(const PartitionSet&) const = default;
};

PartitionSet partition_iid(const Dataset& data, std::size_t num_collaborators, Rng rng);

// Classes [0, C/2) go to collaborator 0 and [C/2, C) to collaborator 1. A
// fraction skew_fraction of collaborator 0's samples and 1 - skew_fraction
// of collaborator 1's samples are marked grayscale.
PartitionSet partition_color_skew(const Dataset& data, double skew_fraction, Rng rng);

// Each class is split across collaborators by a Dirichlet(alpha) draw.
PartitionSet partition_class_imbalance(const Dataset& data, std::size_t num_collaborators, double alpha, Rng rng);

// Collaborator k holds exactly the samples of class k.
PartitionSet partition_label_exclusive(const Dataset& data, Rng rng);

// One candidate per group key with at least min_points samples; sample_count
// candidates are kept, drawn uniformly without replacement.
PartitionSet partition_by_group(const Dataset& data, std::size_t min_points, std::size_t sample_count, Rng rng);

// The collaborator's private dataset with transforms applied.
Dataset materialize(const Dataset& data, const Partition& partition);

std::string to_text(const PartitionSet& set);
PartitionSet partition_set_from_text(std::string_view text);
void save_partition_set(const std::filesystem::path& path, const PartitionSet& set);
PartitionSet load_partition_set(const std::filesystem::path& path);

}  // namespace fdnc
