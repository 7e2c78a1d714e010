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


#include "fdnc/round_plan.h"

#include "fdnc/errors.h"

namespace fdnc {

const char* to_string(RoundMode mode) {
  switch (mode) {
    case RoundMode::kFull: return "full";
    case RoundMode::kFeature: return "feature";
    case RoundMode::kFinetune: return "finetune";
  }
  return "?";
}

RoundPlan full_round_plan(std::size_t round, const ModelSpec& spec, std::size_t epochs, double eta) {
  const std::size_t n = parameterized_layers(spec).size();
  return {round, RoundMode::kFull, {1, n}, {1, n}, epochs, eta};
}

FreezeMask freeze_mask_for(const RoundPlan& plan, const ModelSpec& spec) {
  FreezeMask mask;
  const auto layers = parameterized_layers(spec);
  for (std::size_t pos = 1; pos <= layers.size(); ++pos) mask.frozen[layers[pos - 1]] = !plan.trainable.contains(pos);
  return mask;
}

PartialParams partial_extract(const ParameterSet& params, LayerRange range) {
  if (range.first < 1 || range.last < range.first || range.last > params.entries.size()) {
    throw ProtocolError("layer range [" + std::to_string(range.first) + ", " + std::to_string(range.last) +
                        "] outside a model with " + std::to_string(params.entries.size()) + " parameterized layers");
  }
  PartialParams part{range, {}};
  part.params.entries.assign(params.entries.begin() + static_cast<std::ptrdiff_t>(range.first - 1),
                             params.entries.begin() + static_cast<std::ptrdiff_t>(range.last));
  return part;
}

void partial_merge_in_place(ParameterSet& base, const PartialParams& part) {
  const auto& range = part.range;
  if (range.first < 1 || range.last < range.first || range.last > base.entries.size() ||
      part.params.entries.size() != range.count()) {
    throw ProtocolError("partial parameters do not fit the base model");
  }
  for (std::size_t k = 0; k < range.count(); ++k) {
    auto& dst = base.entries[range.first - 1 + k];
    const auto& src = part.params.entries[k];
    if (dst.layer_index != src.layer_index || dst.layer_name != src.layer_name || dst.weight.shape != src.weight.shape ||
        dst.bias.shape != src.bias.shape || src.weight.data.size() != dst.weight.data.size() ||
        src.bias.data.size() != dst.bias.data.size()) {
      throw ProtocolError("partial entry for layer " + std::to_string(src.layer_index) + " does not match base layer " +
                          std::to_string(dst.layer_index));
    }
  }
  for (std::size_t k = 0; k < range.count(); ++k) base.entries[range.first - 1 + k] = part.params.entries[k];
}

ParameterSet partial_merge(ParameterSet base, const PartialParams& part) {
  partial_merge_in_place(base, part);
  return base;
}

}  // namespace fdnc
