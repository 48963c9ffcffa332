// Copyright 2026 The CutMixLab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "cutmixlab/tensor.hpp"

namespace cutmixlab {

struct ConvStage {
  int out_channels = 16;
  int stride = 1;
  friend bool operator==(const ConvStage&, const ConvStage&) = default;
};

/// 3x3 conv (padding 1, no bias) + ReLU stages, global average pool, linear
/// head with bias. An empty stage list gives the linear model GAP -> head.
struct ToyCnnSpec {
  int in_channels = 3;
  int in_height = 32;
  int in_width = 32;
  std::vector<ConvStage> stages = {{16, 1}, {32, 2}, {64, 2}};
  int classes = 10;

  void validate() const;
  int num_stages() const { return static_cast<int>(stages.size()); }
  /// (1, C, H, W) of the activation at `layer`: 0 is the input, l is the
  /// output of stage l.
  Shape4 layer_shape(int layer) const;
  std::size_t feature_channels() const;
  std::vector<std::vector<std::size_t>> param_shapes() const;
  std::size_t param_count() const;

  friend bool operator==(const ToyCnnSpec&, const ToyCnnSpec&) = default;
};

template <typename T>
struct BasicMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<T> data;

  BasicMatrix() = default;
  BasicMatrix(std::size_t r, std::size_t c, T fill = T(0)) : rows(r), cols(c), data(r * c, fill) {}

  T& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  T at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  std::span<const T> row(std::size_t i) const { return std::span<const T>(data).subspan(i * cols, cols); }
};

using Logits = BasicMatrix<float>;

/// Box-mix applied to the activation at `layer` during a forward pass:
/// sample i takes partner[i]'s activations inside box[i].
struct FeatureMix {
  int layer = 0;
  std::vector<std::size_t> partner;
  std::vector<BoxPx> box;
};

template <typename T>
struct ForwardCache {
  std::vector<BasicImageBatch<T>> acts;  // acts[l] feeds stage l; acts.back() is the feature map
  std::vector<std::vector<T>> cols;      // im2col per stage, samples concatenated
  BasicMatrix<T> pooled;
  std::optional<FeatureMix> mix;
  BasicImageBatch<T> premix;  // activation at mix->layer before mixing
};

template <typename T>
struct ForwardResult {
  BasicMatrix<T> logits;
  BasicImageBatch<T> features;
  std::optional<BasicImageBatch<T>> tapped;
};

template <typename T>
struct Gradients {
  std::vector<std::vector<T>> params;
  std::optional<BasicImageBatch<T>> input;
};

template <typename T>
class BasicModel {
 public:
  BasicModel(ToyCnnSpec spec, std::uint64_t seed);

  const ToyCnnSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }

  /// Parameter tensors in order: conv weights per stage [out][in][3][3],
  /// head weight [classes][features], head bias [classes].
  std::vector<std::vector<T>>& params() { return params_; }
  const std::vector<std::vector<T>>& params() const { return params_; }
  std::span<const T> head_weight() const { return params_[spec_.stages.size()]; }

  /// Forward pass that keeps the cache for a following backward().
  ForwardResult<T> forward(const BasicImageBatch<T>& x, std::optional<int> tap = std::nullopt,
                           const FeatureMix* mix = nullptr);
  /// Cache-free inference; safe to call concurrently.
  BasicMatrix<T> predict(const BasicImageBatch<T>& x) const;
  ForwardResult<T> run(const BasicImageBatch<T>& x, std::optional<int> tap, const FeatureMix* mix,
                       ForwardCache<T>* cache) const;

  /// Gradients for the cached forward pass; consumes the cache.
  Gradients<T> backward(const BasicMatrix<T>& dlogits, bool input_grad = false);
  Gradients<T> backward_from(const ForwardCache<T>& cache, const BasicMatrix<T>& dlogits,
                             bool input_grad) const;

  /// v <- momentum * v + g + weight_decay * w;  w <- w - lr * v
  void sgd_step(const Gradients<T>& grads, double lr, double momentum, double weight_decay);

  template <typename U>
  BasicModel<U> cast() const {
    BasicModel<U> out(spec_, seed_);
    for (std::size_t p = 0; p < params_.size(); ++p) {
      for (std::size_t i = 0; i < params_[p].size(); ++i) out.params()[p][i] = static_cast<U>(params_[p][i]);
    }
    return out;
  }

 private:
  ToyCnnSpec spec_;
  std::uint64_t seed_;
  std::vector<std::vector<T>> params_;
  std::vector<std::vector<T>> velocity_;
  std::optional<ForwardCache<T>> cache_;
};

using Model = BasicModel<float>;

template <typename T>
struct LossResult {
  double loss = 0.0;
  BasicMatrix<T> dlogits;
};

/// Mean soft-target cross-entropy and its gradient (mass * softmax - target) / N,
/// where mass is the row sum of the target.
template <typename T>
LossResult<T> soft_cross_entropy(const BasicMatrix<T>& logits, const SoftLabelBatch& targets);

/// Row-wise softmax in double precision.
template <typename T>
std::vector<double> softmax_row(std::span<const T> logits);

/// Raw class activation map: sum_c head_weight[k][c] * features[c][h][w].
struct CamMap {
  std::size_t map_h = 0, map_w = 0;
  std::vector<double> values;
  int image_h = 0, image_w = 0;

  double at(std::size_t r, std::size_t c) const { return values[r * map_w + c]; }
};

/// CAM for class k from pre-GAP features of one sample.
CamMap cam_from_features(std::span<const float> head_weight, const ImageBatch& features,
                         std::size_t sample, int class_k, int image_h, int image_w);

/// CAM of image `x` (n == 1) for class k.
CamMap cam(const Model& model, const ImageBatch& x, int class_k);

/// Gradient of the mean soft cross-entropy with respect to the input batch.
template <typename T>
BasicImageBatch<T> loss_input_gradient(const BasicModel<T>& model, const BasicImageBatch<T>& x,
                                       const SoftLabelBatch& y);

/// Flat little-endian f32 parameters behind a JSON header (spec, shapes, seed).
void save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

template <typename U, typename T>
BasicImageBatch<U> convert(const BasicImageBatch<T>& x) {
  std::vector<U> d(x.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<U>(x.data()[i]);
  return BasicImageBatch<U>(x.shape(), std::move(d));
}

}  // namespace cutmixlab
