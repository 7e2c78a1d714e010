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


#include "fdnc/dataset.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numbers>

#include "fdnc/errors.h"

namespace fdnc {

std::span<const float> Dataset::sample(std::size_t i) const {
  const std::size_t f = feature_size();
  return std::span<const float>(features).subspan(i * f, f);
}

std::span<float> Dataset::sample(std::size_t i) {
  const std::size_t f = feature_size();
  return std::span<float>(features).subspan(i * f, f);
}

void Dataset::add(std::span<const float> x, std::int32_t label, std::string group_key) {
  if (x.size() != feature_size()) throw InputError("sample does not match feature shape");
  if (label < 0 || static_cast<std::size_t>(label) >= num_classes) throw InputError("label out of range");
  features.insert(features.end(), x.begin(), x.end());
  labels.push_back(label);
  if (!group_key.empty() || !group_keys.empty()) {
    if (group_keys.size() + 1 != labels.size()) throw InputError("group keys must be given for every sample");
    group_keys.push_back(std::move(group_key));
  }
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(num_classes, 0);
  for (auto l : labels) ++counts[static_cast<std::size_t>(l)];
  return counts;
}

Batch gather(const Dataset& data, std::span<const std::size_t> indices) {
  const std::size_t f = data.feature_size();
  Shape shape{indices.size()};
  shape.insert(shape.end(), data.feature_shape.begin(), data.feature_shape.end());
  Batch batch;
  batch.features.shape = std::move(shape);
  batch.features.data.resize(indices.size() * f);
  batch.labels.resize(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto src = data.sample(indices[k]);
    std::copy(src.begin(), src.end(), batch.features.data.begin() + static_cast<std::ptrdiff_t>(k * f));
    batch.labels[k] = data.labels[indices[k]];
  }
  return batch;
}

Batch whole(const Dataset& data) {
  std::vector<std::size_t> idx(data.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return gather(data, idx);
}

Dataset parse_cifar10_binary(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % kCifarRecordBytes != 0) {
    throw FormatError("CIFAR-10 data of " + std::to_string(bytes.size()) + " bytes is not a multiple of " +
                      std::to_string(kCifarRecordBytes));
  }
  Dataset data;
  data.feature_shape = {3, 32, 32};
  data.num_classes = 10;
  const std::size_t n = bytes.size() / kCifarRecordBytes;
  data.features.resize(n * 3072);
  data.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* rec = bytes.data() + i * kCifarRecordBytes;
    if (rec[0] > 9) throw FormatError("record " + std::to_string(i) + " has label byte " + std::to_string(rec[0]));
    data.labels[i] = rec[0];
    for (std::size_t j = 0; j < 3072; ++j) data.features[i * 3072 + j] = static_cast<float>(rec[1 + j]) / 255.0f;
  }
  return data;
}

Dataset load_cifar10_binary(const std::vector<std::filesystem::path>& paths) {
  if (paths.empty()) throw ConfigError("no CIFAR-10 files given");
  Dataset all;
  all.feature_shape = {3, 32, 32};
  all.num_classes = 10;
  for (const auto& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Dataset part;
    try {
      part = parse_cifar10_binary(bytes);
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
    all.features.insert(all.features.end(), part.features.begin(), part.features.end());
    all.labels.insert(all.labels.end(), part.labels.begin(), part.labels.end());
  }
  return all;
}

namespace {

struct Blob {
  double cx, cy, sigma, amplitude;
};

struct ClassTemplate {
  std::vector<Blob> blobs;
  double color[3];
};

std::vector<ClassTemplate> make_templates(std::size_t num_classes, std::size_t h, std::size_t w, Rng& rng) {
  std::vector<ClassTemplate> out(num_classes);
  for (std::size_t k = 0; k < num_classes; ++k) {
    auto& t = out[k];
    for (int b = 0; b < 3; ++b) {
      t.blobs.push_back({1.5 + rng.uniform() * (static_cast<double>(w) - 3.0),
                         1.5 + rng.uniform() * (static_cast<double>(h) - 3.0), 1.2 + 2.0 * rng.uniform(),
                         (b == 2 ? -0.5 : 1.0) * (0.6 + 0.4 * rng.uniform())});
    }
    // Evenly spaced hues, jittered.
    const double hue = (static_cast<double>(k) + 0.3 * rng.uniform()) / static_cast<double>(num_classes);
    for (int c = 0; c < 3; ++c) {
      const double phase = hue - static_cast<double>(c) / 3.0;
      t.color[c] = 0.5 + 0.5 * std::cos(2.0 * std::numbers::pi * phase);
    }
  }
  return out;
}

}  // namespace

Dataset gen_synthetic_images(std::size_t n, std::size_t num_classes, const Shape& shape, std::uint64_t seed,
                             const SyntheticImageOptions& options) {
  if (num_classes < 2) throw ConfigError("synthetic images need at least 2 classes");
  if (n < num_classes) throw ConfigError("synthetic images need n >= num_classes");
  if (shape.size() != 3 || shape[0] != 3 || shape[1] < 4 || shape[2] < 4) {
    throw ConfigError("synthetic images need shape (3,H,W) with H,W >= 4");
  }
  const std::size_t h = shape[1], w = shape[2], plane = h * w;
  Rng template_rng(seed, purpose_stream(StreamPurpose::kDataset, 0));
  const auto templates = make_templates(num_classes, h, w, template_rng);
  Rng rng(seed, purpose_stream(StreamPurpose::kDataset, 1 + options.sample_stream));

  Dataset data;
  data.feature_shape = shape;
  data.num_classes = num_classes;
  data.features.resize(n * 3 * plane);
  data.labels.resize(n);
  std::vector<double> base(plane);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = i % num_classes;
    const auto& t = templates[k];
    const int span = 2 * options.max_shift + 1;
    const double dx = static_cast<double>(static_cast<int>(rng.below(static_cast<std::uint64_t>(span))) - options.max_shift);
    const double dy = static_cast<double>(static_cast<int>(rng.below(static_cast<std::uint64_t>(span))) - options.max_shift);
    const double gain = 1.0 + 0.15 * rng.normal();
    std::fill(base.begin(), base.end(), 0.0);
    for (const auto& b : t.blobs) {
      const double s2 = 2.0 * b.sigma * b.sigma;
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
          const double ddx = static_cast<double>(x) - b.cx - dx;
          const double ddy = static_cast<double>(y) - b.cy - dy;
          base[y * w + x] += b.amplitude * std::exp(-(ddx * ddx + ddy * ddy) / s2);
        }
      }
    }
    float* out = data.features.data() + i * 3 * plane;
    for (std::size_t c = 0; c < 3; ++c) {
      const double tint = (1.0 - options.color_strength) + options.color_strength * t.color[c];
      for (std::size_t p = 0; p < plane; ++p) {
        const double v = 0.25 + 0.6 * gain * base[p] * tint + 0.15 * options.color_strength * (t.color[c] - 0.5) +
                         options.pixel_noise * rng.normal();
        out[c * plane + p] = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
    data.labels[i] = static_cast<std::int32_t>(k);
  }
  return data;
}

void grayscale_in_place(std::span<float> chw, std::size_t plane_size) {
  if (chw.size() != 3 * plane_size) throw InputError("grayscale needs exactly 3 channels");
  float* r = chw.data();
  float* g = r + plane_size;
  float* b = g + plane_size;
  for (std::size_t p = 0; p < plane_size; ++p) {
    if (r[p] == g[p] && g[p] == b[p]) continue;
    const float y = static_cast<float>(0.299 * r[p] + 0.587 * g[p] + 0.114 * b[p]);
    r[p] = g[p] = b[p] = y;
  }
}

Tensor to_grayscale(const Tensor& features) {
  if (features.rank() != 3 || features.shape[0] != 3) {
    throw InputError("to_grayscale expects a (3,H,W) tensor, got " + shape_to_string(features.shape));
  }
  Tensor out = features;
  grayscale_in_place(out.data, features.shape[1] * features.shape[2]);
  return out;
}

std::string role_key(std::size_t role) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "role%04zu", role);
  return buf;
}

Dataset gen_role_text(std::size_t num_roles, std::size_t chars_per_role, std::size_t vocab, Rng rng) {
  if (vocab < 8) throw ConfigError("role text needs a vocabulary of at least 8");
  if (num_roles < 1) throw ConfigError("role text needs at least one role");
  if (chars_per_role <= kRoleTextWindow) throw ConfigError("chars_per_role must exceed the window of 8");

  Dataset data;
  data.feature_shape = {kRoleTextWindow * vocab};
  data.num_classes = vocab;
  const std::size_t per_role = chars_per_role - kRoleTextWindow;
  data.features.reserve(num_roles * per_role * kRoleTextWindow * vocab);

  auto dirichlet = [&](double alpha) {
    std::vector<double> p(vocab);
    double sum = 0.0;
    for (auto& v : p) sum += (v = rng.gamma(alpha));
    for (auto& v : p) v /= sum;
    return p;
  };

  std::vector<float> window(kRoleTextWindow * vocab);
  for (std::size_t role = 0; role < num_roles; ++role) {
    // Role style: a skewed unigram preference blended into sparse transitions.
    const auto unigram = dirichlet(0.5);
    std::vector<std::vector<double>> cdf(vocab);
    for (std::size_t a = 0; a < vocab; ++a) {
      const auto row = dirichlet(0.3);
      double acc = 0.0;
      cdf[a].resize(vocab);
      for (std::size_t b = 0; b < vocab; ++b) {
        acc += 0.5 * row[b] + 0.5 * unigram[b];
        cdf[a][b] = acc;
      }
    }
    std::vector<std::size_t> text(chars_per_role);
    text[0] = static_cast<std::size_t>(rng.below(vocab));
    for (std::size_t t = 1; t < chars_per_role; ++t) {
      const auto& c = cdf[text[t - 1]];
      const double u = rng.uniform() * c.back();
      text[t] = static_cast<std::size_t>(std::upper_bound(c.begin(), c.end(), u) - c.begin());
      text[t] = std::min(text[t], vocab - 1);
    }
    const std::string key = role_key(role);
    for (std::size_t t = kRoleTextWindow; t < chars_per_role; ++t) {
      std::fill(window.begin(), window.end(), 0.0f);
      for (std::size_t j = 0; j < kRoleTextWindow; ++j) window[j * vocab + text[t - kRoleTextWindow + j]] = 1.0f;
      data.add(window, static_cast<std::int32_t>(text[t]), key);
    }
  }
  return data;
}

}  // namespace fdnc
