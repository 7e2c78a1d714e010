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
#include <span>
#include <string>
#include <vector>

namespace fdnc {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(std::span<const std::size_t> shape) noexcept;
std::string shape_to_string(std::span<const std::size_t> shape);

// Dense row-major float32 tensor.
struct Tensor {
  Shape shape;
  std::vector<float> data;

  Tensor() = default;
  explicit Tensor(Shape s);                      // zero-filled
  Tensor(Shape s, std::vector<float> values);    // throws InputError on size mismatch

  std::size_t size() const noexcept { return data.size(); }
  std::size_t rank() const noexcept { return shape.size(); }
  std::span<float> span() noexcept { return data; }
  std::span<const float> span() const noexcept { return data; }

  bool all_finite() const noexcept;
};

// Bitwise comparison: distinguishes -0.0 from 0.0 and treats equal NaN
// payloads as equal.
bool bit_equal(const Tensor& a, const Tensor& b) noexcept;

}  // namespace fdnc
