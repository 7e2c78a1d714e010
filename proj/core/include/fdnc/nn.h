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
#include <vector>

#include "fdnc/model.h"
#include "fdnc/params.h"
#include "fdnc/rng.h"
#include "fdnc/tensor.h"

namespace fdnc {

// features has shape (B, input_shape...).
struct Batch {
  Tensor features;
  std::vector<std::int32_t> labels;

  std::size_t size() const noexcept { return labels.size(); }
};

struct ForwardResult {
  double loss = 0.0;      // mean softmax cross-entropy
  Tensor predictions;     // (B, num_classes), rows sum to 1
};

struct BackwardResult {
  double loss = 0.0;
  Gradients grads;
};

// Glorot-uniform weights, zero biases.
ParameterSet init_params(const ModelSpec& spec, Rng rng);

ForwardResult forward(const ModelSpec& spec, const ParameterSet& params, const Batch& batch);

Gradients backward(const ModelSpec& spec, const ParameterSet& params, const Batch& batch);

// Loss and gradients in one pass. Gradients of frozen layers are left at
// zero, and backpropagation stops below the lowest trainable layer.
BackwardResult loss_and_gradients(const ModelSpec& spec, const ParameterSet& params, const Batch& batch,
                                  const FreezeMask& mask);

// w <- w - lr * g for unfrozen layers. Throws NumericError on a non-finite
// gradient.
ParameterSet sgd_step(ParameterSet params, const Gradients& grads, double lr, const FreezeMask& mask);
void sgd_step_in_place(ParameterSet& params, const Gradients& grads, double lr, const FreezeMask& mask);

}  // namespace fdnc
