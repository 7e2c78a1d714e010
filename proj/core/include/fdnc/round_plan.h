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
#include <string>

#include "fdnc/model.h"
#include "fdnc/params.h"

namespace fdnc {

enum class RoundMode { kFull, kFeature, kFinetune };

const char* to_string(RoundMode mode);

// Inclusive 1-based range over the parameterized layers of a model.
struct LayerRange {
  std::size_t first = 1;
  std::size_t last = 0;

  bool contains(std::size_t position) const noexcept { return position >= first && position <= last; }
  std::size_t count() const noexcept { return last >= first ? last - first + 1 : 0; }
  bool operator==(const LayerRange&) const = default;
};

struct RoundPlan {
  std::size_t round = 1;  // 1-based, counted within the phase that owns the plan
  RoundMode mode = RoundMode::kFull;
  LayerRange trainable;
  LayerRange transfer;
  std::size_t epochs = 1;
  double eta = 0.0;

  bool operator==(const RoundPlan&) const = default;
};

RoundPlan full_round_plan(std::size_t round, const ModelSpec& spec, std::size_t epochs, double eta);

// Layers outside plan.trainable are frozen.
FreezeMask freeze_mask_for(const RoundPlan& plan, const ModelSpec& spec);

// A contiguous slice of a full ParameterSet, as sent over the wire.
struct PartialParams {
  LayerRange range;
  ParameterSet params;

  std::size_t scalar_count() const noexcept { return params.scalar_count(); }
};

PartialParams partial_extract(const ParameterSet& params, LayerRange range);
// Overwrites exactly part.range of base; throws ProtocolError on a range
// or shape mismatch.
ParameterSet partial_merge(ParameterSet base, const PartialParams& part);
void partial_merge_in_place(ParameterSet& base, const PartialParams& part);

}  // namespace fdnc
