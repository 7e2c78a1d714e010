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

// Central finite differences on the double-precision oracle, compared with
// the engine's float backprop.

#include <algorithm>
#include <cmath>
#include <string>

#include "fdnc/nn.h"
#include "reference_net.h"

namespace oracle {

struct GradCheck {
  double max_rel_error = 0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // perturbation crossed a ReLU or pooling kink
  std::string worst;
};

inline std::vector<std::vector<double>> samples_of(const fdnc::Batch& batch) {
  const std::size_t n = batch.size(), f = batch.features.size() / n;
  std::vector<std::vector<double>> xs(n);
  for (std::size_t i = 0; i < n; ++i)
    xs[i].assign(batch.features.data.begin() + static_cast<long>(i * f),
                 batch.features.data.begin() + static_cast<long>((i + 1) * f));
  return xs;
}

// rel = |g - fd| / max(|g|, |fd|, floor)
inline GradCheck gradient_check(const fdnc::ModelSpec& spec, const fdnc::ParameterSet& params, const fdnc::Batch& batch,
                                double eps = 1e-3, double floor = 1e-4) {
  const auto grads = fdnc::backward(spec, params, batch);
  const auto xs = samples_of(batch);
  const std::vector<int> labels(batch.labels.begin(), batch.labels.end());
  Weights base = to_double(spec, params);
  const Trace trace0 = run(spec, base, xs, labels).trace;
  GradCheck out;
  for (const auto& e : grads.entries) {
    for (int which = 0; which < 2; ++which) {
      auto& vec = which == 0 ? base[e.layer_index].w : base[e.layer_index].b;
      const auto& g = which == 0 ? e.weight.data : e.bias.data;
      for (std::size_t i = 0; i < vec.size(); ++i) {
        const double keep = vec[i];
        vec[i] = keep + eps;
        const auto plus = run(spec, base, xs, labels);
        vec[i] = keep - eps;
        const auto minus = run(spec, base, xs, labels);
        vec[i] = keep;
        if (!(plus.trace == trace0) || !(minus.trace == trace0)) {
          ++out.skipped;
          continue;
        }
        const double fd = (plus.loss - minus.loss) / (2 * eps);
        const double bp = g[i];
        const double rel = std::abs(bp - fd) / std::max({std::abs(bp), std::abs(fd), floor});
        ++out.checked;
        if (rel > out.max_rel_error) {
          out.max_rel_error = rel;
          out.worst = e.layer_name + (which == 0 ? ".w[" : ".b[") + std::to_string(i) + "] bp=" + std::to_string(bp) +
                      " fd=" + std::to_string(fd);
        }
      }
    }
  }
  return out;
}

}  // namespace oracle
