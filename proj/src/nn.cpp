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

#include "cutmixlab/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Core>

#include "cutmixlab/container.hpp"
#include "cutmixlab/rng.hpp"

namespace cutmixlab {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;

int conv_out(int in, int stride) { return (in - 1) / stride + 1; }

struct ConvGeom {
  std::size_t in_c, in_h, in_w, out_c, out_h, out_w, stride;
  std::size_t col_rows() const { return in_c * 9; }
  std::size_t col_cols() const { return out_h * out_w; }
};

ConvGeom stage_geom(const ToyCnnSpec& spec, int stage) {
  const Shape4 in = spec.layer_shape(stage);
  const Shape4 out = spec.layer_shape(stage + 1);
  return {in.c, in.h, in.w, out.c, out.h, out.w,
          static_cast<std::size_t>(spec.stages[static_cast<std::size_t>(stage)].stride)};
}

// col[(ic*9 + ky*3 + kx), oy*OW + ox] = in[ic, oy*s + ky - 1, ox*s + kx - 1], zero padded.
template <typename T>
void im2col(const T* in, const ConvGeom& g, T* col) {
  const std::size_t ncols = g.col_cols();
  for (std::size_t ic = 0; ic < g.in_c; ++ic) {
    for (std::size_t ky = 0; ky < 3; ++ky) {
      for (std::size_t kx = 0; kx < 3; ++kx) {
        T* dst = col + ((ic * 3 + ky) * 3 + kx) * ncols;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const long iy = static_cast<long>(oy * g.stride + ky) - 1;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const long ix = static_cast<long>(ox * g.stride + kx) - 1;
            const bool inside = iy >= 0 && iy < static_cast<long>(g.in_h) && ix >= 0 &&
                                ix < static_cast<long>(g.in_w);
            dst[oy * g.out_w + ox] =
                inside ? in[(ic * g.in_h + static_cast<std::size_t>(iy)) * g.in_w + static_cast<std::size_t>(ix)]
                       : T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* col, const ConvGeom& g, T* in) {
  const std::size_t ncols = g.col_cols();
  for (std::size_t ic = 0; ic < g.in_c; ++ic) {
    for (std::size_t ky = 0; ky < 3; ++ky) {
      for (std::size_t kx = 0; kx < 3; ++kx) {
        const T* src = col + ((ic * 3 + ky) * 3 + kx) * ncols;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const long iy = static_cast<long>(oy * g.stride + ky) - 1;
          if (iy < 0 || iy >= static_cast<long>(g.in_h)) continue;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const long ix = static_cast<long>(ox * g.stride + kx) - 1;
            if (ix < 0 || ix >= static_cast<long>(g.in_w)) continue;
            in[(ic * g.in_h + static_cast<std::size_t>(iy)) * g.in_w + static_cast<std::size_t>(ix)] +=
                src[oy * g.out_w + ox];
          }
        }
      }
    }
  }
}

void check_mix(const FeatureMix& mix, std::size_t n, const Shape4& layer) {
  require(mix.partner.size() == n && mix.box.size() == n, "feature mix must cover every sample");
  for (std::size_t i = 0; i < n; ++i) {
    require(mix.partner[i] < n, "feature mix partner out of range");
    require(mix.box[i].within(static_cast<int>(layer.w), static_cast<int>(layer.h)),
            "feature mix box out of bounds at layer " + std::to_string(mix.layer));
  }
}

template <typename T>
BasicImageBatch<T> apply_mix(const BasicImageBatch<T>& a, const FeatureMix& mix) {
  BasicImageBatch<T> out = a;
  for (std::size_t i = 0; i < a.n(); ++i) {
    paste_region(out.sample(i), a.sample(mix.partner[i]), mix.box[i]);
  }
  return out;
}

// Adjoint of apply_mix: sample i's gradient goes to itself outside its box and
// to its partner inside.
template <typename T>
BasicImageBatch<T> apply_mix_backward(const BasicImageBatch<T>& d_out, const FeatureMix& mix) {
  BasicImageBatch<T> d_in(d_out.shape(), std::vector<T>(d_out.size(), T(0)));
  for (std::size_t i = 0; i < d_out.n(); ++i) {
    const BoxPx& b = mix.box[i];
    const std::size_t p = mix.partner[i];
    for (std::size_t ch = 0; ch < d_out.c(); ++ch) {
      for (std::size_t y = 0; y < d_out.h(); ++y) {
        for (std::size_t x = 0; x < d_out.w(); ++x) {
          const T g = d_out.at(i, ch, y, x);
          if (b.contains(static_cast<int>(x), static_cast<int>(y))) {
            d_in.at(p, ch, y, x) += g;
          } else {
            d_in.at(i, ch, y, x) += g;
          }
        }
      }
    }
  }
  return d_in;
}

}  // namespace

// ---------------------------------------------------------------------------
// ToyCnnSpec

void ToyCnnSpec::validate() const {
  require(in_channels >= 1 && in_height >= 1 && in_width >= 1, "input shape must be positive");
  require(classes >= 1, "classes must be >= 1");
  for (const auto& s : stages) {
    require(s.out_channels >= 1, "stage out_channels must be >= 1");
    require(s.stride >= 1, "stage stride must be >= 1");
  }
  const Shape4 f = layer_shape(num_stages());
  require(f.h >= 4 && f.w >= 4, "final feature map must be at least 4x4 for CAM");
}

Shape4 ToyCnnSpec::layer_shape(int layer) const {
  require(layer >= 0 && layer <= num_stages(), "layer index " + std::to_string(layer) + " out of range");
  int c = in_channels, h = in_height, w = in_width;
  for (int l = 0; l < layer; ++l) {
    const auto& s = stages[static_cast<std::size_t>(l)];
    c = s.out_channels;
    h = conv_out(h, s.stride);
    w = conv_out(w, s.stride);
  }
  return {1, static_cast<std::size_t>(c), static_cast<std::size_t>(h), static_cast<std::size_t>(w)};
}

std::size_t ToyCnnSpec::feature_channels() const { return layer_shape(num_stages()).c; }

std::vector<std::vector<std::size_t>> ToyCnnSpec::param_shapes() const {
  std::vector<std::vector<std::size_t>> shapes;
  std::size_t in = static_cast<std::size_t>(in_channels);
  for (const auto& s : stages) {
    shapes.push_back({static_cast<std::size_t>(s.out_channels), in, 3, 3});
    in = static_cast<std::size_t>(s.out_channels);
  }
  shapes.push_back({static_cast<std::size_t>(classes), in});
  shapes.push_back({static_cast<std::size_t>(classes)});
  return shapes;
}

std::size_t ToyCnnSpec::param_count() const {
  std::size_t total = 0;
  for (const auto& s : param_shapes()) {
    total += std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
  }
  return total;
}

// ---------------------------------------------------------------------------
// BasicModel

template <typename T>
BasicModel<T>::BasicModel(ToyCnnSpec spec, std::uint64_t seed) : spec_(std::move(spec)), seed_(seed) {
  spec_.validate();
  RngStream rng(seed_, stream_id(StreamPurpose::init, 0));
  for (const auto& shape : spec_.param_shapes()) {
    const std::size_t count = std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
    std::vector<T> p(count, T(0));
    if (shape.size() == 4) {
      const double bound = std::sqrt(6.0 / static_cast<double>(shape[1] * 9));
      for (auto& v : p) v = static_cast<T>((2.0 * rng.uniform() - 1.0) * bound);
    } else if (shape.size() == 2) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(shape[1]));
      for (auto& v : p) v = static_cast<T>((2.0 * rng.uniform() - 1.0) * bound);
    }
    params_.push_back(std::move(p));
  }
  velocity_.reserve(params_.size());
  for (const auto& p : params_) velocity_.emplace_back(p.size(), T(0));
}

template <typename T>
ForwardResult<T> BasicModel<T>::run(const BasicImageBatch<T>& x, std::optional<int> tap,
                                    const FeatureMix* mix, ForwardCache<T>* cache) const {
  const Shape4 in_shape = spec_.layer_shape(0);
  if (x.c() != in_shape.c || x.h() != in_shape.h || x.w() != in_shape.w) {
    throw ShapeError("model expects samples of " + to_string(in_shape) + ", got " + to_string(x.shape()));
  }
  const std::size_t n = x.n();
  require(n > 0, "forward requires a non-empty batch");
  const int S = spec_.num_stages();
  if (tap) require(*tap >= 0 && *tap <= S, "tap layer out of range");
  if (mix) {
    require(mix->layer >= 0 && mix->layer <= S, "feature mix layer out of range");
    check_mix(*mix, n, spec_.layer_shape(mix->layer));
  }

  ForwardResult<T> res;
  BasicImageBatch<T> act = x;
  auto at_layer = [&](int layer, BasicImageBatch<T>& a) {
    if (tap && *tap == layer) res.tapped = a;
    if (mix && mix->layer == layer) {
      if (cache) cache->premix = a;
      a = apply_mix(a, *mix);
    }
  };
  if (cache) {
    cache->acts.clear();
    cache->cols.clear();
    cache->mix = mix ? std::optional<FeatureMix>(*mix) : std::nullopt;
  }
  at_layer(0, act);

  for (int s = 0; s < S; ++s) {
    const ConvGeom g = stage_geom(spec_, s);
    const std::size_t rows = g.col_rows(), cols = g.col_cols();
    BasicImageBatch<T> out(n, g.out_c, g.out_h, g.out_w);
    std::vector<T> col_all;
    std::vector<T> col_one;
    if (cache) {
      col_all.resize(n * rows * cols);
    } else {
      col_one.resize(rows * cols);
    }
    ConstMapMat<T> W(params_[static_cast<std::size_t>(s)].data(), static_cast<Eigen::Index>(g.out_c),
                     static_cast<Eigen::Index>(rows));
    for (std::size_t i = 0; i < n; ++i) {
      T* col = cache ? col_all.data() + i * rows * cols : col_one.data();
      im2col(act.sample(i).data.data(), g, col);
      MapMat<T> O(out.sample(i).data.data(), static_cast<Eigen::Index>(g.out_c), static_cast<Eigen::Index>(cols));
      O.noalias() = W * ConstMapMat<T>(col, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    }
    for (auto& v : out.vec()) v = v < T(0) ? T(0) : v;  // NaN propagates
    if (cache) {
      cache->acts.push_back(std::move(act));
      cache->cols.push_back(std::move(col_all));
    }
    act = std::move(out);
    at_layer(s + 1, act);
  }

  // Global average pool and head.
  const std::size_t C = act.c(), HW = act.h() * act.w();
  const std::size_t K = static_cast<std::size_t>(spec_.classes);
  BasicMatrix<T> pooled(n, C);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < C; ++c) {
      const T* p = act.data().data() + (i * C + c) * HW;
      double sum = 0.0;
      for (std::size_t q = 0; q < HW; ++q) sum += p[q];
      pooled.at(i, c) = static_cast<T>(sum / static_cast<double>(HW));
    }
  }
  const auto& hw = params_[static_cast<std::size_t>(S)];
  const auto& hb = params_[static_cast<std::size_t>(S) + 1];
  res.logits = BasicMatrix<T>(n, K);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < K; ++k) {
      double z = hb[k];
      for (std::size_t c = 0; c < C; ++c) z += static_cast<double>(hw[k * C + c]) * pooled.at(i, c);
      res.logits.at(i, k) = static_cast<T>(z);
    }
  }
  if (cache) {
    cache->pooled = pooled;
    cache->acts.push_back(act);
  }
  res.features = std::move(act);
  return res;
}

template <typename T>
ForwardResult<T> BasicModel<T>::forward(const BasicImageBatch<T>& x, std::optional<int> tap,
                                        const FeatureMix* mix) {
  ForwardCache<T> cache;
  auto res = run(x, tap, mix, &cache);
  cache_ = std::move(cache);
  return res;
}

template <typename T>
BasicMatrix<T> BasicModel<T>::predict(const BasicImageBatch<T>& x) const {
  return run(x, std::nullopt, nullptr, nullptr).logits;
}

template <typename T>
Gradients<T> BasicModel<T>::backward(const BasicMatrix<T>& dlogits, bool input_grad) {
  if (!cache_) throw ValidationError("backward called without a preceding forward");
  ForwardCache<T> cache = std::move(*cache_);
  cache_.reset();
  return backward_from(cache, dlogits, input_grad);
}

template <typename T>
Gradients<T> BasicModel<T>::backward_from(const ForwardCache<T>& cache, const BasicMatrix<T>& dlogits,
                                          bool input_grad) const {
  const int S = spec_.num_stages();
  require(cache.acts.size() == static_cast<std::size_t>(S) + 1, "forward cache is incomplete");
  const BasicImageBatch<T>& feat = cache.acts.back();
  const std::size_t n = feat.n(), C = feat.c(), HW = feat.h() * feat.w();
  const std::size_t K = static_cast<std::size_t>(spec_.classes);
  if (dlogits.rows != n || dlogits.cols != K) throw ShapeError("dlogits shape does not match forward batch");

  Gradients<T> g;
  g.params.reserve(params_.size());
  for (const auto& p : params_) g.params.emplace_back(p.size(), T(0));

  // Head.
  const auto& hw = params_[static_cast<std::size_t>(S)];
  auto& dhw = g.params[static_cast<std::size_t>(S)];
  auto& dhb = g.params[static_cast<std::size_t>(S) + 1];
  BasicImageBatch<T> dact(feat.shape(), std::vector<T>(feat.size(), T(0)));
  for (std::size_t k = 0; k < K; ++k) {
    double db = 0.0;
    for (std::size_t i = 0; i < n; ++i) db += dlogits.at(i, k);
    dhb[k] = static_cast<T>(db);
    for (std::size_t c = 0; c < C; ++c) {
      double dw = 0.0;
      for (std::size_t i = 0; i < n; ++i) dw += static_cast<double>(dlogits.at(i, k)) * cache.pooled.at(i, c);
      dhw[k * C + c] = static_cast<T>(dw);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < C; ++c) {
      double dp = 0.0;
      for (std::size_t k = 0; k < K; ++k) dp += static_cast<double>(dlogits.at(i, k)) * hw[k * C + c];
      const T v = static_cast<T>(dp / static_cast<double>(HW));
      std::fill_n(dact.vec().begin() + static_cast<std::ptrdiff_t>((i * C + c) * HW), HW, v);
    }
  }
  if (cache.mix && cache.mix->layer == S) dact = apply_mix_backward(dact, *cache.mix);

  for (int s = S - 1; s >= 0; --s) {
    const ConvGeom geo = stage_geom(spec_, s);
    const std::size_t rows = geo.col_rows(), cols = geo.col_cols();
    // ReLU mask comes from the stage's own (unmixed) output.
    const BasicImageBatch<T>& out =
        (cache.mix && cache.mix->layer == s + 1) ? cache.premix : cache.acts[static_cast<std::size_t>(s) + 1];
    for (std::size_t q = 0; q < dact.size(); ++q) {
      if (!(out.data()[q] > T(0))) dact.vec()[q] = T(0);
    }
    MapMat<T> dW(g.params[static_cast<std::size_t>(s)].data(), static_cast<Eigen::Index>(geo.out_c),
                 static_cast<Eigen::Index>(rows));
    ConstMapMat<T> W(params_[static_cast<std::size_t>(s)].data(), static_cast<Eigen::Index>(geo.out_c),
                     static_cast<Eigen::Index>(rows));
    const bool need_dx = s > 0 || input_grad;
    BasicImageBatch<T> dprev;
    if (need_dx) dprev = BasicImageBatch<T>(n, geo.in_c, geo.in_h, geo.in_w);
    std::vector<T> dcol(need_dx ? rows * cols : 0);
    const auto& col_all = cache.cols[static_cast<std::size_t>(s)];
    for (std::size_t i = 0; i < n; ++i) {
      ConstMapMat<T> dO(dact.sample(i).data.data(), static_cast<Eigen::Index>(geo.out_c),
                        static_cast<Eigen::Index>(cols));
      ConstMapMat<T> col(col_all.data() + i * rows * cols, static_cast<Eigen::Index>(rows),
                         static_cast<Eigen::Index>(cols));
      dW.noalias() += dO * col.transpose();
      if (need_dx) {
        MapMat<T> dC(dcol.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        dC.noalias() = W.transpose() * dO;
        col2im_add(dcol.data(), geo, dprev.sample(i).data.data());
      }
    }
    if (!need_dx) break;
    dact = std::move(dprev);
    if (cache.mix && cache.mix->layer == s) dact = apply_mix_backward(dact, *cache.mix);
  }
  if (input_grad) g.input = std::move(dact);
  return g;
}

template <typename T>
void BasicModel<T>::sgd_step(const Gradients<T>& grads, double lr, double momentum, double weight_decay) {
  require(grads.params.size() == params_.size(), "gradient count does not match parameters");
  for (std::size_t p = 0; p < params_.size(); ++p) {
    auto& w = params_[p];
    auto& v = velocity_[p];
    const auto& gp = grads.params[p];
    require(gp.size() == w.size(), "gradient shape does not match parameter " + std::to_string(p));
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double vel = momentum * v[i] + gp[i] + weight_decay * w[i];
      v[i] = static_cast<T>(vel);
      w[i] = static_cast<T>(w[i] - lr * vel);
    }
  }
}

// ---------------------------------------------------------------------------
// Loss

template <typename T>
std::vector<double> softmax_row(std::span<const T> logits) {
  const double mx = static_cast<double>(*std::max_element(logits.begin(), logits.end()));
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    p[k] = std::exp(static_cast<double>(logits[k]) - mx);
    sum += p[k];
  }
  for (auto& v : p) v /= sum;
  return p;
}

template <typename T>
LossResult<T> soft_cross_entropy(const BasicMatrix<T>& logits, const SoftLabelBatch& targets) {
  if (logits.rows != targets.n() || logits.cols != targets.k()) {
    throw ShapeError("logits and targets disagree in shape");
  }
  const std::size_t n = logits.rows, K = logits.cols;
  LossResult<T> r;
  r.dlogits = BasicMatrix<T>(n, K);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto z = logits.row(i);
    const double mx = static_cast<double>(*std::max_element(z.begin(), z.end()));
    double sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) sum += std::exp(static_cast<double>(z[k]) - mx);
    const double lse = mx + std::log(sum);
    // Float labels need not sum to exactly one; the gradient uses the actual mass.
    double mass = 0.0;
    for (std::size_t k = 0; k < K; ++k) mass += targets.at(i, k);
    for (std::size_t k = 0; k < K; ++k) {
      const double t = targets.at(i, k);
      const double logp = static_cast<double>(z[k]) - lse;
      if (t != 0.0) total -= t * logp;
      r.dlogits.at(i, k) = static_cast<T>((mass * std::exp(logp) - t) / static_cast<double>(n));
    }
  }
  r.loss = n ? total / static_cast<double>(n) : 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// CAM and input gradient

CamMap cam_from_features(std::span<const float> head_weight, const ImageBatch& features,
                         std::size_t sample, int class_k, int image_h, int image_w) {
  const std::size_t C = features.c();
  require(class_k >= 0 && head_weight.size() % C == 0 &&
              static_cast<std::size_t>(class_k) < head_weight.size() / C,
          "class index " + std::to_string(class_k) + " out of range");
  CamMap m;
  m.map_h = features.h();
  m.map_w = features.w();
  m.image_h = image_h;
  m.image_w = image_w;
  m.values.assign(m.map_h * m.map_w, 0.0);
  const float* wk = head_weight.data() + static_cast<std::size_t>(class_k) * C;
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t y = 0; y < m.map_h; ++y) {
      for (std::size_t x = 0; x < m.map_w; ++x) {
        m.values[y * m.map_w + x] += static_cast<double>(wk[c]) * features.at(sample, c, y, x);
      }
    }
  }
  return m;
}

CamMap cam(const Model& model, const ImageBatch& x, int class_k) {
  require(x.n() == 1, "cam expects a single image");
  require(class_k >= 0 && class_k < model.spec().classes, "class index " + std::to_string(class_k) + " out of range");
  const auto fwd = model.run(x, std::nullopt, nullptr, nullptr);
  return cam_from_features(model.head_weight(), fwd.features, 0, class_k,
                           static_cast<int>(x.h()), static_cast<int>(x.w()));
}

template <typename T>
BasicImageBatch<T> loss_input_gradient(const BasicModel<T>& model, const BasicImageBatch<T>& x,
                                       const SoftLabelBatch& y) {
  ForwardCache<T> cache;
  const auto fwd = model.run(x, std::nullopt, nullptr, &cache);
  const auto loss = soft_cross_entropy(fwd.logits, y);
  auto g = model.backward_from(cache, loss.dlogits, true);
  return std::move(*g.input);
}

// ---------------------------------------------------------------------------
// Checkpoints

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  const auto& spec = model.spec();
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : spec.stages) stages.push_back({s.out_channels, s.stride});
  nlohmann::json header = {
      {"kind", "checkpoint"},
      {"seed", model.seed()},
      {"spec",
       {{"in_channels", spec.in_channels},
        {"in_height", spec.in_height},
        {"in_width", spec.in_width},
        {"stages", stages},
        {"classes", spec.classes}}},
      {"shapes", spec.param_shapes()},
  };
  std::vector<float> flat;
  flat.reserve(spec.param_count());
  for (const auto& p : model.params()) flat.insert(flat.end(), p.begin(), p.end());
  write_container(path, header, flat);
}

Model load_checkpoint(const std::filesystem::path& path) {
  const Container c = read_container(path);
  try {
    if (c.header.at("kind") != "checkpoint") throw FormatError(path.string() + ": not a checkpoint");
    const auto& js = c.header.at("spec");
    ToyCnnSpec spec;
    spec.in_channels = js.at("in_channels");
    spec.in_height = js.at("in_height");
    spec.in_width = js.at("in_width");
    spec.classes = js.at("classes");
    spec.stages.clear();
    for (const auto& s : js.at("stages")) spec.stages.push_back({s.at(0).get<int>(), s.at(1).get<int>()});
    Model m(spec, c.header.at("seed").get<std::uint64_t>());
    if (c.header.at("shapes").get<std::vector<std::vector<std::size_t>>>() != spec.param_shapes()) {
      throw FormatError(path.string() + ": parameter shapes do not match spec");
    }
    if (c.payload.size() != spec.param_count()) {
      throw FormatError(path.string() + ": expected " + std::to_string(spec.param_count()) +
                        " parameters, found " + std::to_string(c.payload.size()));
    }
    std::size_t off = 0;
    for (auto& p : m.params()) {
      std::copy_n(c.payload.begin() + static_cast<std::ptrdiff_t>(off), p.size(), p.begin());
      off += p.size();
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": bad checkpoint header: " + e.what());
  }
}

template class BasicModel<float>;
template class BasicModel<double>;
template LossResult<float> soft_cross_entropy(const BasicMatrix<float>&, const SoftLabelBatch&);
template LossResult<double> soft_cross_entropy(const BasicMatrix<double>&, const SoftLabelBatch&);
template std::vector<double> softmax_row(std::span<const float>);
template std::vector<double> softmax_row(std::span<const double>);
template BasicImageBatch<float> loss_input_gradient(const BasicModel<float>&, const BasicImageBatch<float>&,
                                                    const SoftLabelBatch&);
template BasicImageBatch<double> loss_input_gradient(const BasicModel<double>&, const BasicImageBatch<double>&,
                                                     const SoftLabelBatch&);

}  // namespace cutmixlab
