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
#include <span>
#include <string>
#include <vector>

#include "fdnc/nn.h"
#include "fdnc/rng.h"
#include "fdnc/tensor.h"

namespace fdnc {

// Samples stored contiguously; sample i occupies
// features[i * feature_size(), (i + 1) * feature_size()).
struct Dataset {
  Shape feature_shape;
  std::size_t num_classes = 0;
  std::vector<float> features;
  std::vector<std::int32_t> labels;
  std::vector<std::string> group_keys;  // empty, or one per sample

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t feature_size() const noexcept { return shape_size(feature_shape); }
  std::span<const float> sample(std::size_t i) const;
  std::span<float> sample(std::size_t i);
  bool has_group_keys() const noexcept { return !group_keys.empty(); }

  void add(std::span<const float> x, std::int32_t label, std::string group_key = {});
  std::vector<std::size_t> class_counts() const;
};

// Copies the selected samples into one batch.
Batch gather(const Dataset& data, std::span<const std::size_t> indices);
Batch whole(const Dataset& data);

inline constexpr std::size_t kCifarRecordBytes = 3073;

// Standard CIFAR-10 binary batches: 1 label byte followed by 3072 pixel
// bytes (R, G, B planes of 32x32). Pixels are scaled to [0, 1].
Dataset load_cifar10_binary(const std::vector<std::filesystem::path>& paths);
Dataset parse_cifar10_binary(std::span<const std::uint8_t> bytes);

struct SyntheticImageOptions {
  double pixel_noise = 0.12;
  int max_shift = 2;
  double color_strength = 0.6;
  std::uint64_t sample_stream = 0;  // 0 = training draw; other values give fresh samples of the same classes
};

// Class-conditional images: each class owns a blob template and a color
// cast. Labels cycle 0..C-1, so classes are balanced within one sample.
Dataset gen_synthetic_images(std::size_t n, std::size_t num_classes, const Shape& shape, std::uint64_t seed,
                             const SyntheticImageOptions& options = {});

// y = 0.299 R + 0.587 G + 0.114 B into all three channels. Neutral pixels
// (R == G == B) are returned unchanged.
Tensor to_grayscale(const Tensor& features);
void grayscale_in_place(std::span<float> chw, std::size_t plane_size);

inline constexpr std::size_t kRoleTextWindow = 8;

// Per-role Markov character sources; samples are one-hot windows of 8
// characters labeled with the next character, keyed by role.
Dataset gen_role_text(std::size_t num_roles, std::size_t chars_per_role, std::size_t vocab, Rng rng);

std::string role_key(std::size_t role);

}  // namespace fdnc
