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


#include "fdnc/model.h"

#include <map>
#include <set>
#include <sstream>

#include "fdnc/errors.h"

namespace fdnc {

const char* to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::kDense: return "dense";
    case LayerKind::kConv2d: return "conv2d";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kMaxPool2x2: return "maxpool2x2";
    case LayerKind::kFlatten: return "flatten";
    case LayerKind::kSoftmaxXentHead: return "softmax_xent_head";
  }
  return "?";
}

Shape LayerSpec::weight_shape() const {
  switch (kind) {
    case LayerKind::kDense: return {out_size, in_size};
    case LayerKind::kConv2d: return {out_size, in_size, 3, 3};
    default: return {};
  }
}

Shape LayerSpec::bias_shape() const {
  if (!has_params()) return {};
  return {out_size};
}

std::size_t LayerSpec::fan_in() const noexcept {
  return kind == LayerKind::kConv2d ? in_size * 9 : in_size;
}

std::size_t LayerSpec::fan_out() const noexcept {
  return kind == LayerKind::kConv2d ? out_size * 9 : out_size;
}

namespace {

LayerSpec make_layer(LayerKind kind, std::size_t in = 0, std::size_t out = 0) {
  LayerSpec layer;
  layer.kind = kind;
  layer.in_size = in;
  layer.out_size = out;
  return layer;
}

}  // namespace

LayerSpec dense(std::size_t fan_in, std::size_t fan_out) { return make_layer(LayerKind::kDense, fan_in, fan_out); }
LayerSpec conv3x3(std::size_t in_channels, std::size_t out_channels) {
  return make_layer(LayerKind::kConv2d, in_channels, out_channels);
}
LayerSpec relu() { return make_layer(LayerKind::kRelu); }
LayerSpec maxpool2x2() { return make_layer(LayerKind::kMaxPool2x2); }
LayerSpec flatten() { return make_layer(LayerKind::kFlatten); }
LayerSpec softmax_xent_head() { return make_layer(LayerKind::kSoftmaxXentHead); }

namespace {

const char* name_stem(LayerKind kind) {
  switch (kind) {
    case LayerKind::kDense: return "dense";
    case LayerKind::kConv2d: return "conv";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kMaxPool2x2: return "pool";
    case LayerKind::kFlatten: return "flatten";
    case LayerKind::kSoftmaxXentHead: return "head";
  }
  return "layer";
}

Shape output_shape(const LayerSpec& layer, const Shape& in, std::size_t num_classes, bool last) {
  auto fail = [&](const std::string& why) -> ConfigError {
    return ConfigError("layer " + std::to_string(layer.index) + " (" + layer.name + "): " + why +
                       "; input shape " + shape_to_string(in));
  };
  switch (layer.kind) {
    case LayerKind::kDense:
      if (in.size() != 1 || in[0] != layer.in_size) throw fail("dense expects a flat input of " + std::to_string(layer.in_size));
      if (layer.out_size == 0) throw fail("dense needs fan_out > 0");
      return {layer.out_size};
    case LayerKind::kConv2d:
      if (in.size() != 3 || in[0] != layer.in_size) throw fail("conv2d expects (" + std::to_string(layer.in_size) + ",H,W)");
      if (layer.out_size == 0) throw fail("conv2d needs output channels > 0");
      return {layer.out_size, in[1], in[2]};
    case LayerKind::kRelu:
      return in;
    case LayerKind::kMaxPool2x2:
      if (in.size() != 3 || in[1] % 2 != 0 || in[2] % 2 != 0) throw fail("maxpool2x2 needs (C,H,W) with even H and W");
      return {in[0], in[1] / 2, in[2] / 2};
    case LayerKind::kFlatten:
      return {shape_size(in)};
    case LayerKind::kSoftmaxXentHead:
      if (!last) throw fail("softmax_xent_head must be the last layer");
      if (in.size() != 1 || in[0] != num_classes) throw fail("head expects " + std::to_string(num_classes) + " logits");
      return in;
  }
  throw fail("unknown layer kind");
}

}  // namespace

std::vector<Shape> layer_output_shapes(const ModelSpec& spec) {
  if (spec.layers.size() < 2) throw ConfigError("a model needs at least 2 layers");
  if (spec.num_classes < 2) throw ConfigError("a model needs at least 2 classes");
  if (spec.input_shape.empty() || shape_size(spec.input_shape) == 0) throw ConfigError("empty input shape");
  std::vector<Shape> shapes;
  shapes.reserve(spec.layers.size());
  Shape current = spec.input_shape;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    current = output_shape(spec.layers[i], current, spec.num_classes, i + 1 == spec.layers.size());
    shapes.push_back(current);
  }
  if (spec.layers.back().kind != LayerKind::kSoftmaxXentHead) {
    throw ConfigError("the last layer must be softmax_xent_head");
  }
  return shapes;
}

void validate(const ModelSpec& spec) {
  std::set<std::string> names;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& layer = spec.layers[i];
    if (layer.index != i + 1) throw ConfigError("layer indices must be 1-based and consecutive");
    if (layer.name.empty() || !names.insert(layer.name).second) {
      throw ConfigError("layer names must be unique and non-empty: '" + layer.name + "'");
    }
  }
  layer_output_shapes(spec);
  if (parameterized_layers(spec).empty()) throw ConfigError("a model needs at least one parameterized layer");
}

ModelSpec build_model(Shape input_shape, std::size_t num_classes, std::vector<LayerSpec> layers) {
  std::map<std::string, int> counters;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].index = i + 1;
    if (layers[i].name.empty()) {
      const char* stem = name_stem(layers[i].kind);
      layers[i].name = stem + std::to_string(++counters[stem]);
    }
  }
  ModelSpec spec{std::move(layers), std::move(input_shape), num_classes};
  validate(spec);
  return spec;
}

std::vector<std::size_t> parameterized_layers(const ModelSpec& spec) {
  std::vector<std::size_t> out;
  for (const auto& layer : spec.layers) {
    if (layer.has_params()) out.push_back(layer.index);
  }
  return out;
}

std::size_t parameter_count(const ModelSpec& spec) {
  std::size_t n = 0;
  for (const auto& layer : spec.layers) {
    if (layer.has_params()) n += shape_size(layer.weight_shape()) + shape_size(layer.bias_shape());
  }
  return n;
}

ModelSpec parse_layers(std::string_view text, Shape input_shape, std::size_t num_classes) {
  std::istringstream in{std::string(text)};
  std::vector<LayerSpec> layers;
  Shape current = input_shape;
  std::string token;
  while (in >> token) {
    const auto colon = token.find(':');
    const std::string head = token.substr(0, colon);
    std::size_t arg = 0;
    if (colon != std::string::npos) {
      try {
        arg = std::stoul(token.substr(colon + 1));
      } catch (const std::exception&) {
        throw ConfigError("bad layer size in '" + token + "'");
      }
    }
    LayerSpec layer;
    if (head == "conv") {
      if (current.size() != 3) throw ConfigError("'" + token + "' needs a (C,H,W) input");
      layer = conv3x3(current[0], arg);
      current = {arg, current[1], current[2]};
    } else if (head == "dense") {
      if (current.size() != 1) throw ConfigError("'" + token + "' needs a flat input; add 'flatten'");
      layer = dense(current[0], arg);
      current = {arg};
    } else if (head == "relu") {
      layer = relu();
    } else if (head == "pool") {
      if (current.size() != 3) throw ConfigError("'pool' needs a (C,H,W) input");
      layer = maxpool2x2();
      current = {current[0], current[1] / 2, current[2] / 2};
    } else if (head == "flatten") {
      layer = flatten();
      current = {shape_size(current)};
    } else if (head == "head") {
      layer = softmax_xent_head();
    } else {
      throw ConfigError("unknown layer token '" + token + "'");
    }
    if ((head == "conv" || head == "dense") && arg == 0) throw ConfigError("'" + token + "' needs a size > 0");
    layers.push_back(layer);
  }
  return build_model(std::move(input_shape), num_classes, std::move(layers));
}

std::string describe_layers(const ModelSpec& spec) {
  std::string out;
  for (const auto& layer : spec.layers) {
    if (!out.empty()) out += ' ';
    switch (layer.kind) {
      case LayerKind::kConv2d: out += "conv:" + std::to_string(layer.out_size); break;
      case LayerKind::kDense: out += "dense:" + std::to_string(layer.out_size); break;
      case LayerKind::kRelu: out += "relu"; break;
      case LayerKind::kMaxPool2x2: out += "pool"; break;
      case LayerKind::kFlatten: out += "flatten"; break;
      case LayerKind::kSoftmaxXentHead: out += "head"; break;
    }
  }
  return out;
}

ModelSpec desk_cnn(Shape input_shape, std::size_t num_classes, std::size_t hidden) {
  const std::string text = "conv:8 relu conv:16 relu pool conv:16 relu conv:32 relu pool flatten dense:" +
                           std::to_string(hidden) + " relu dense:" + std::to_string(num_classes) + " head";
  return parse_layers(text, std::move(input_shape), num_classes);
}

ModelSpec char_mlp(std::size_t window, std::size_t vocab, std::size_t hidden) {
  const std::string text = "dense:" + std::to_string(hidden) + " relu dense:" + std::to_string(hidden) +
                           " relu dense:" + std::to_string(vocab) + " head";
  return parse_layers(text, {window * vocab}, vocab);
}

}  // namespace fdnc
