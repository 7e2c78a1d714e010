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


#include "fdnc/nn.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "fdnc/errors.h"

namespace fdnc {
namespace {

using MatR = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapR = Eigen::Map<MatR>;
using CMapR = Eigen::Map<const MatR>;
using VecMap = Eigen::Map<Eigen::VectorXf>;
using CVecMap = Eigen::Map<const Eigen::VectorXf>;

void check_batch(const ModelSpec& spec, const Batch& batch) {
  const std::size_t n = batch.labels.size();
  if (n == 0) throw InputError("empty batch");
  Shape expected{n};
  expected.insert(expected.end(), spec.input_shape.begin(), spec.input_shape.end());
  if (batch.features.shape != expected || batch.features.data.size() != shape_size(expected)) {
    throw InputError("batch features " + shape_to_string(batch.features.shape) + " do not match expected " +
                     shape_to_string(expected));
  }
  for (auto label : batch.labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= spec.num_classes) {
      throw InputError("label " + std::to_string(label) + " outside [0, " + std::to_string(spec.num_classes) + ")");
    }
  }
}

// im2col for one sample: rows (c, ky, kx), columns (y, x); zero padding.
void im2col(const float* in, std::size_t channels, std::size_t h, std::size_t w, float* col) {
  const std::size_t hw = h * w;
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t ky = 0; ky < 3; ++ky) {
      for (std::size_t kx = 0; kx < 3; ++kx) {
        float* row = col + ((c * 3 + ky) * 3 + kx) * hw;
        for (std::size_t y = 0; y < h; ++y) {
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + ky) - 1;
          for (std::size_t x = 0; x < w; ++x) {
            const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(x + kx) - 1;
            const bool inside = sy >= 0 && sx >= 0 && sy < static_cast<std::ptrdiff_t>(h) &&
                                sx < static_cast<std::ptrdiff_t>(w);
            row[y * w + x] = inside ? in[(c * h + static_cast<std::size_t>(sy)) * w + static_cast<std::size_t>(sx)] : 0.0f;
          }
        }
      }
    }
  }
}

void col2im(const float* col, std::size_t channels, std::size_t h, std::size_t w, float* out) {
  const std::size_t hw = h * w;
  std::fill(out, out + channels * hw, 0.0f);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t ky = 0; ky < 3; ++ky) {
      for (std::size_t kx = 0; kx < 3; ++kx) {
        const float* row = col + ((c * 3 + ky) * 3 + kx) * hw;
        for (std::size_t y = 0; y < h; ++y) {
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + ky) - 1;
          if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) continue;
          for (std::size_t x = 0; x < w; ++x) {
            const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(x + kx) - 1;
            if (sx < 0 || sx >= static_cast<std::ptrdiff_t>(w)) continue;
            out[(c * h + static_cast<std::size_t>(sy)) * w + static_cast<std::size_t>(sx)] += row[y * w + x];
          }
        }
      }
    }
  }
}

// Activations of one forward pass, kept for backpropagation.
class Pass {
 public:
  Pass(const ModelSpec& spec, const ParameterSet& params, const Batch& batch)
      : spec_(spec), batch_size_(batch.size()) {
    check_params(spec, params);
    check_batch(spec, batch);
    shapes_ = layer_output_shapes(spec);
    const std::size_t n = spec.layers.size();
    acts_.resize(n + 1);
    cols_.resize(n);
    argmax_.resize(n);
    entries_.assign(n, nullptr);
    for (const auto& e : params.entries) entries_[e.layer_index - 1] = &e;
    acts_[0] = batch.features.data;
    for (std::size_t i = 0; i < n; ++i) run_layer(i);
    compute_loss(batch.labels);
  }

  double loss() const { return loss_; }
  Tensor predictions() const { return Tensor({batch_size_, spec_.num_classes}, probs_); }

  Gradients gradients(const FreezeMask& mask) {
    Gradients grads = zero_params(spec_);
    std::vector<std::size_t> grad_slot(spec_.layers.size(), 0);
    std::size_t lowest_trainable = spec_.layers.size();
    for (std::size_t k = 0; k < grads.entries.size(); ++k) {
      const std::size_t i = grads.entries[k].layer_index - 1;
      grad_slot[i] = k;
      if (!mask.is_frozen(i + 1)) lowest_trainable = std::min(lowest_trainable, i);
    }
    if (lowest_trainable == spec_.layers.size()) return grads;

    // d loss / d logits = (p - onehot) / B
    std::vector<float> delta = probs_;
    const float inv_b = 1.0f / static_cast<float>(batch_size_);
    for (std::size_t b = 0; b < batch_size_; ++b) {
      delta[b * spec_.num_classes + static_cast<std::size_t>(labels_[b])] -= 1.0f;
    }
    for (auto& d : delta) d *= inv_b;

    std::vector<float> prev;
    for (std::size_t i = spec_.layers.size() - 1; i-- > 0;) {
      const bool need_input_grad = i > lowest_trainable;
      const auto& layer = spec_.layers[i];
      const bool train_here = layer.has_params() && !mask.is_frozen(layer.index);
      ParamEntry* g = layer.has_params() ? &grads.entries[grad_slot[i]] : nullptr;
      const Shape& in_shape = i == 0 ? spec_.input_shape : shapes_[i - 1];
      const std::size_t in_size = shape_size(in_shape);
      const std::size_t out_size = shape_size(shapes_[i]);
      if (need_input_grad) prev.assign(batch_size_ * in_size, 0.0f);

      switch (layer.kind) {
        case LayerKind::kDense: {
          CMapR dy(delta.data(), batch_size_, layer.out_size);
          CMapR x(acts_[i].data(), batch_size_, layer.in_size);
          if (train_here) {
            MapR(g->weight.data.data(), layer.out_size, layer.in_size).noalias() = dy.transpose() * x;
            VecMap(g->bias.data.data(), layer.out_size) = dy.colwise().sum().transpose();
          }
          if (need_input_grad) {
            CMapR w(entries_[i]->weight.data.data(), layer.out_size, layer.in_size);
            MapR(prev.data(), batch_size_, layer.in_size).noalias() = dy * w;
          }
          break;
        }
        case LayerKind::kConv2d: {
          const std::size_t h = in_shape[1], w = in_shape[2], hw = h * w;
          const std::size_t k = layer.in_size * 9;
          CMapR wmat(entries_[i]->weight.data.data(), layer.out_size, k);
          std::vector<float> dcol(need_input_grad ? k * hw : 0);
          for (std::size_t b = 0; b < batch_size_; ++b) {
            CMapR dy(delta.data() + b * out_size, layer.out_size, hw);
            CMapR col(cols_[i].data() + b * k * hw, k, hw);
            if (train_here) {
              MapR(g->weight.data.data(), layer.out_size, k).noalias() += dy * col.transpose();
              VecMap(g->bias.data.data(), layer.out_size) += dy.rowwise().sum();
            }
            if (need_input_grad) {
              MapR(dcol.data(), k, hw).noalias() = wmat.transpose() * dy;
              col2im(dcol.data(), layer.in_size, h, w, prev.data() + b * in_size);
            }
          }
          break;
        }
        case LayerKind::kRelu:
          if (need_input_grad) {
            const auto& out = acts_[i + 1];
            for (std::size_t j = 0; j < prev.size(); ++j) prev[j] = out[j] > 0.0f ? delta[j] : 0.0f;
          }
          break;
        case LayerKind::kMaxPool2x2:
          if (need_input_grad) {
            const auto& arg = argmax_[i];
            for (std::size_t b = 0; b < batch_size_; ++b) {
              for (std::size_t j = 0; j < out_size; ++j) {
                prev[b * in_size + arg[b * out_size + j]] += delta[b * out_size + j];
              }
            }
          }
          break;
        case LayerKind::kFlatten:
          if (need_input_grad) prev = delta;
          break;
        case LayerKind::kSoftmaxXentHead:
          break;
      }
      if (!need_input_grad) break;
      delta.swap(prev);
    }
    return grads;
  }

 private:
  void run_layer(std::size_t i) {
    const auto& layer = spec_.layers[i];
    const Shape& in_shape = i == 0 ? spec_.input_shape : shapes_[i - 1];
    const std::size_t in_size = shape_size(in_shape);
    const std::size_t out_size = shape_size(shapes_[i]);
    const auto& x = acts_[i];
    auto& y = acts_[i + 1];
    y.assign(batch_size_ * out_size, 0.0f);
    switch (layer.kind) {
      case LayerKind::kDense: {
        const auto* e = entries_[i];
        CMapR xm(x.data(), batch_size_, layer.in_size);
        CMapR w(e->weight.data.data(), layer.out_size, layer.in_size);
        MapR ym(y.data(), batch_size_, layer.out_size);
        ym.noalias() = xm * w.transpose();
        ym.rowwise() += CVecMap(e->bias.data.data(), layer.out_size).transpose();
        break;
      }
      case LayerKind::kConv2d: {
        const auto* e = entries_[i];
        const std::size_t h = in_shape[1], w = in_shape[2], hw = h * w;
        const std::size_t k = layer.in_size * 9;
        cols_[i].resize(batch_size_ * k * hw);
        CMapR wmat(e->weight.data.data(), layer.out_size, k);
        for (std::size_t b = 0; b < batch_size_; ++b) {
          float* col = cols_[i].data() + b * k * hw;
          im2col(x.data() + b * in_size, layer.in_size, h, w, col);
          MapR ym(y.data() + b * out_size, layer.out_size, hw);
          ym.noalias() = wmat * CMapR(col, k, hw);
          ym.colwise() += CVecMap(e->bias.data.data(), layer.out_size);
        }
        break;
      }
      case LayerKind::kRelu:
        for (std::size_t j = 0; j < y.size(); ++j) y[j] = x[j] > 0.0f ? x[j] : 0.0f;
        break;
      case LayerKind::kMaxPool2x2: {
        const std::size_t c = in_shape[0], h = in_shape[1], w = in_shape[2];
        const std::size_t oh = h / 2, ow = w / 2;
        auto& arg = argmax_[i];
        arg.resize(batch_size_ * out_size);
        for (std::size_t b = 0; b < batch_size_; ++b) {
          const float* src = x.data() + b * in_size;
          for (std::size_t ch = 0; ch < c; ++ch) {
            for (std::size_t oy = 0; oy < oh; ++oy) {
              for (std::size_t ox = 0; ox < ow; ++ox) {
                std::uint32_t best = static_cast<std::uint32_t>((ch * h + 2 * oy) * w + 2 * ox);
                for (std::size_t dy = 0; dy < 2; ++dy) {
                  for (std::size_t dx = 0; dx < 2; ++dx) {
                    const auto idx = static_cast<std::uint32_t>((ch * h + 2 * oy + dy) * w + 2 * ox + dx);
                    if (src[idx] > src[best]) best = idx;
                  }
                }
                const std::size_t o = (ch * oh + oy) * ow + ox;
                y[b * out_size + o] = src[best];
                arg[b * out_size + o] = best;
              }
            }
          }
        }
        break;
      }
      case LayerKind::kFlatten:
      case LayerKind::kSoftmaxXentHead:
        y = x;
        break;
    }
  }

  void compute_loss(const std::vector<std::int32_t>& labels) {
    labels_ = labels;
    const std::size_t c = spec_.num_classes;
    const auto& logits = acts_.back();
    probs_.resize(batch_size_ * c);
    double total = 0.0;
    std::vector<double> ex(c);
    for (std::size_t b = 0; b < batch_size_; ++b) {
      const float* row = logits.data() + b * c;
      const double m = *std::max_element(row, row + c);
      double sum = 0.0;
      for (std::size_t j = 0; j < c; ++j) {
        ex[j] = std::exp(static_cast<double>(row[j]) - m);
        sum += ex[j];
      }
      for (std::size_t j = 0; j < c; ++j) probs_[b * c + j] = static_cast<float>(ex[j] / sum);
      total += std::log(sum) - (static_cast<double>(row[static_cast<std::size_t>(labels[b])]) - m);
    }
    loss_ = total / static_cast<double>(batch_size_);
  }

  const ModelSpec& spec_;
  std::size_t batch_size_;
  std::vector<Shape> shapes_;
  std::vector<std::vector<float>> acts_;
  std::vector<std::vector<float>> cols_;
  std::vector<std::vector<std::uint32_t>> argmax_;
  std::vector<const ParamEntry*> entries_;
  std::vector<std::int32_t> labels_;
  std::vector<float> probs_;
  double loss_ = 0.0;
};

}  // namespace

ParameterSet init_params(const ModelSpec& spec, Rng rng) {
  validate(spec);
  ParameterSet params = zero_params(spec);
  for (auto& e : params.entries) {
    const auto& layer = spec.layers[e.layer_index - 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.fan_in() + layer.fan_out()));
    for (auto& w : e.weight.data) {
      const double u = rng.uniform_float();
      w = static_cast<float>((2.0 * u - 1.0) * bound);
    }
  }
  return params;
}

ForwardResult forward(const ModelSpec& spec, const ParameterSet& params, const Batch& batch) {
  Pass pass(spec, params, batch);
  return {pass.loss(), pass.predictions()};
}

Gradients backward(const ModelSpec& spec, const ParameterSet& params, const Batch& batch) {
  return loss_and_gradients(spec, params, batch, FreezeMask::none(spec)).grads;
}

BackwardResult loss_and_gradients(const ModelSpec& spec, const ParameterSet& params, const Batch& batch,
                                  const FreezeMask& mask) {
  Pass pass(spec, params, batch);
  return {pass.loss(), pass.gradients(mask)};
}

void sgd_step_in_place(ParameterSet& params, const Gradients& grads, double lr, const FreezeMask& mask) {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw InputError("learning rate must be finite and >= 0");
  if (!same_layout(params, grads)) throw InputError("gradient layout does not match parameters");
  for (std::size_t k = 0; k < params.entries.size(); ++k) {
    const auto& g = grads.entries[k];
    if (mask.is_frozen(g.layer_index)) continue;
    if (!g.weight.all_finite() || !g.bias.all_finite()) {
      throw NumericError("non-finite gradient in layer " + std::to_string(g.layer_index) + " (" + g.layer_name + ")");
    }
  }
  if (lr == 0.0) return;
  const float step = static_cast<float>(lr);
  for (std::size_t k = 0; k < params.entries.size(); ++k) {
    auto& p = params.entries[k];
    if (mask.is_frozen(p.layer_index)) continue;
    const auto& g = grads.entries[k];
    for (std::size_t j = 0; j < p.weight.data.size(); ++j) p.weight.data[j] -= step * g.weight.data[j];
    for (std::size_t j = 0; j < p.bias.data.size(); ++j) p.bias.data[j] -= step * g.bias.data[j];
  }
}

ParameterSet sgd_step(ParameterSet params, const Gradients& grads, double lr, const FreezeMask& mask) {
  sgd_step_in_place(params, grads, lr, mask);
  return params;
}

}  // namespace fdnc
