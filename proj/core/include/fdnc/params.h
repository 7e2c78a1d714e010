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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fdnc/model.h"
#include "fdnc/tensor.h"

namespace fdnc {

struct ParamEntry {
  std::size_t layer_index = 0;
  std::string layer_name;
  Tensor weight;
  Tensor bias;

  std::size_t scalar_count() const noexcept { return weight.size() + bias.size(); }
};

// Ordered per-layer weights of a model. May also hold a contiguous subset
// of a model's layers (see PartialParams).
struct ParameterSet {
  std::vector<ParamEntry> entries;

  std::size_t scalar_count() const noexcept;
  bool all_finite() const noexcept;
  const ParamEntry& at_layer(std::size_t layer_index) const;
  ParamEntry& at_layer(std::size_t layer_index);
};

using Gradients = ParameterSet;

bool bit_equal(const ParameterSet& a, const ParameterSet& b) noexcept;
// Same layer indices, names and tensor shapes.
bool same_layout(const ParameterSet& a, const ParameterSet& b) noexcept;

// Zero weights and biases laid out for spec.
ParameterSet zero_params(const ModelSpec& spec);
// Throws InputError unless params match spec exactly.
void check_params(const ModelSpec& spec, const ParameterSet& params);

// Per parameterized layer; true = excluded from updates.
struct FreezeMask {
  std::map<std::size_t, bool> frozen;

  static FreezeMask none(const ModelSpec& spec);
  static FreezeMask all(const ModelSpec& spec);
  bool is_frozen(std::size_t layer_index) const;

  bool operator==(const FreezeMask&) const = default;
};

// Weight then bias of one layer, row-major.
std::vector<float> flatten_layer(const ParameterSet& params, std::size_t layer_index);
void unflatten_layer(ParameterSet& params, std::size_t layer_index, std::span<const float> values);

}  // namespace fdnc
