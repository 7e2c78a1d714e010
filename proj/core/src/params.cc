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


#include "fdnc/params.h"

#include <algorithm>

#include "fdnc/errors.h"

namespace fdnc {

std::size_t ParameterSet::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.scalar_count();
  return n;
}

bool ParameterSet::all_finite() const noexcept {
  return std::all_of(entries.begin(), entries.end(),
                     [](const ParamEntry& e) { return e.weight.all_finite() && e.bias.all_finite(); });
}

const ParamEntry& ParameterSet::at_layer(std::size_t layer_index) const {
  for (const auto& e : entries) {
    if (e.layer_index == layer_index) return e;
  }
  throw InputError("layer " + std::to_string(layer_index) + " has no parameters in this set");
}

ParamEntry& ParameterSet::at_layer(std::size_t layer_index) {
  return const_cast<ParamEntry&>(std::as_const(*this).at_layer(layer_index));
}

bool bit_equal(const ParameterSet& a, const ParameterSet& b) noexcept {
  if (a.entries.size() != b.entries.size()) return false;
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    const auto& x = a.entries[i];
    const auto& y = b.entries[i];
    if (x.layer_index != y.layer_index || x.layer_name != y.layer_name || !bit_equal(x.weight, y.weight) ||
        !bit_equal(x.bias, y.bias)) {
      return false;
    }
  }
  return true;
}

bool same_layout(const ParameterSet& a, const ParameterSet& b) noexcept {
  if (a.entries.size() != b.entries.size()) return false;
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    const auto& x = a.entries[i];
    const auto& y = b.entries[i];
    if (x.layer_index != y.layer_index || x.layer_name != y.layer_name || x.weight.shape != y.weight.shape ||
        x.bias.shape != y.bias.shape) {
      return false;
    }
  }
  return true;
}

ParameterSet zero_params(const ModelSpec& spec) {
  ParameterSet out;
  for (const auto& layer : spec.layers) {
    if (!layer.has_params()) continue;
    out.entries.push_back({layer.index, layer.name, Tensor(layer.weight_shape()), Tensor(layer.bias_shape())});
  }
  return out;
}

void check_params(const ModelSpec& spec, const ParameterSet& params) {
  std::size_t i = 0;
  for (const auto& layer : spec.layers) {
    if (!layer.has_params()) continue;
    if (i >= params.entries.size()) throw InputError("parameter set is missing layer " + layer.name);
    const auto& e = params.entries[i++];
    if (e.layer_index != layer.index || e.layer_name != layer.name || e.weight.shape != layer.weight_shape() ||
        e.bias.shape != layer.bias_shape() || e.weight.data.size() != shape_size(e.weight.shape) ||
        e.bias.data.size() != shape_size(e.bias.shape)) {
      throw InputError("parameter entry for layer " + std::to_string(layer.index) + " (" + layer.name +
                       ") does not match the model");
    }
  }
  if (i != params.entries.size()) throw InputError("parameter set has more entries than the model");
}

FreezeMask FreezeMask::none(const ModelSpec& spec) {
  FreezeMask mask;
  for (auto idx : parameterized_layers(spec)) mask.frozen[idx] = false;
  return mask;
}

FreezeMask FreezeMask::all(const ModelSpec& spec) {
  FreezeMask mask;
  for (auto idx : parameterized_layers(spec)) mask.frozen[idx] = true;
  return mask;
}

bool FreezeMask::is_frozen(std::size_t layer_index) const {
  auto it = frozen.find(layer_index);
  return it != frozen.end() && it->second;
}

std::vector<float> flatten_layer(const ParameterSet& params, std::size_t layer_index) {
  const auto& e = params.at_layer(layer_index);
  std::vector<float> out;
  out.reserve(e.scalar_count());
  out.insert(out.end(), e.weight.data.begin(), e.weight.data.end());
  out.insert(out.end(), e.bias.data.begin(), e.bias.data.end());
  return out;
}

void unflatten_layer(ParameterSet& params, std::size_t layer_index, std::span<const float> values) {
  auto& e = params.at_layer(layer_index);
  if (values.size() != e.scalar_count()) {
    throw InputError("layer " + std::to_string(layer_index) + " holds " + std::to_string(e.scalar_count()) +
                     " scalars, got " + std::to_string(values.size()));
  }
  std::copy_n(values.begin(), e.weight.size(), e.weight.data.begin());
  std::copy(values.begin() + static_cast<std::ptrdiff_t>(e.weight.size()), values.end(), e.bias.data.begin());
}

}  // namespace fdnc
