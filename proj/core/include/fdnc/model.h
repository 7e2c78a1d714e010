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
#include <string_view>
#include <vector>

#include "fdnc/tensor.h"

namespace fdnc {

enum class LayerKind { kDense, kConv2d, kRelu, kMaxPool2x2, kFlatten, kSoftmaxXentHead };

const char* to_string(LayerKind kind);

struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::kRelu;
  std::size_t index = 0;     // 1-based position in the model
  std::size_t in_size = 0;   // dense: fan_in, conv2d: input channels
  std::size_t out_size = 0;  // dense: fan_out, conv2d: output channels

  bool has_params() const noexcept { return kind == LayerKind::kDense || kind == LayerKind::kConv2d; }
  Shape weight_shape() const;
  Shape bias_shape() const;
  std::size_t fan_in() const noexcept;
  std::size_t fan_out() const noexcept;

  bool operator==(const LayerSpec&) const = default;
};

LayerSpec dense(std::size_t fan_in, std::size_t fan_out);
// 3x3 kernel, stride 1, same padding.
LayerSpec conv3x3(std::size_t in_channels, std::size_t out_channels);
LayerSpec relu();
LayerSpec maxpool2x2();
LayerSpec flatten();
LayerSpec softmax_xent_head();

struct ModelSpec {
  std::vector<LayerSpec> layers;
  Shape input_shape;
  std::size_t num_classes = 0;

  bool operator==(const ModelSpec&) const = default;
};

// Assigns 1-based indices, generates unique names for unnamed layers and
// validates. Throws ConfigError when shapes do not compose.
ModelSpec build_model(Shape input_shape, std::size_t num_classes, std::vector<LayerSpec> layers);

void validate(const ModelSpec& spec);

// Output shape of every layer, aligned with spec.layers.
std::vector<Shape> layer_output_shapes(const ModelSpec& spec);

// Model layer indices of the parameterized layers, ascending. Split points
// and layer groups are expressed as 1-based positions into this list.
std::vector<std::size_t> parameterized_layers(const ModelSpec& spec);
std::size_t parameter_count(const ModelSpec& spec);

// Layer grammar used by experiment configs, e.g.
//   "conv:8 relu pool flatten dense:64 relu dense:10 head"
// Input sizes are inferred from the preceding layer.
ModelSpec parse_layers(std::string_view text, Shape input_shape, std::size_t num_classes);
std::string describe_layers(const ModelSpec& spec);

// Four 3x3 conv layers (8/16/16/32 channels, pooled twice) and two dense
// layers.
ModelSpec desk_cnn(Shape input_shape, std::size_t num_classes, std::size_t hidden = 64);
// Three dense layers over a one-hot character window.
ModelSpec char_mlp(std::size_t window, std::size_t vocab, std::size_t hidden = 64);

}  // namespace fdnc
