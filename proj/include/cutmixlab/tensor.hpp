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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <concepts>
#include <span>
#include <type_traits>
#include <string>
#include <vector>

#include "cutmixlab/errors.hpp"

namespace cutmixlab {

struct Shape4 {
  std::size_t n = 0, c = 0, h = 0, w = 0;

  std::size_t numel() const { return n * c * h * w; }
  std::size_t sample_numel() const { return c * h * w; }
  friend bool operator==(const Shape4&, const Shape4&) = default;
};

std::string to_string(const Shape4& s);

/// Half-open pixel rectangle [x1,x2) x [y1,y2).
struct BoxPx {
  int x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  int width() const { return x2 - x1; }
  int height() const { return y2 - y1; }
  long long area() const { return static_cast<long long>(width()) * height(); }
  bool contains(int x, int y) const { return x >= x1 && x < x2 && y >= y1 && y < y2; }
  bool within(int w, int h) const {
    return 0 <= x1 && x1 <= x2 && x2 <= w && 0 <= y1 && y1 <= y2 && y2 <= h;
  }
  friend bool operator==(const BoxPx&, const BoxPx&) = default;
};

std::string to_string(const BoxPx& b);

/// Binary CutMix mask: 0 inside the box, 1 outside.
struct MaskView {
  BoxPx box;
  int width = 0, height = 0;

  int at(int x, int y) const { return box.contains(x, y) ? 0 : 1; }
  long long zero_count() const { return box.area(); }
};

/// Non-owning view of one C x H x W sample, indexed (c, y, x).
template <typename T>
struct SampleRef {
  std::span<T> data;
  std::size_t c = 0, h = 0, w = 0;

  T& at(std::size_t ch, std::size_t y, std::size_t x) const { return data[(ch * h + y) * w + x]; }
  bool same_geometry(std::size_t oc, std::size_t oh, std::size_t ow) const {
    return c == oc && h == oh && w == ow;
  }
};

/// Dense N x C x H x W tensor, row-major.
template <typename T>
class BasicImageBatch {
 public:
  BasicImageBatch() = default;
  BasicImageBatch(std::size_t n, std::size_t c, std::size_t h, std::size_t w, T fill = T(0))
      : shape_{n, c, h, w}, data_(n * c * h * w, fill) {}
  BasicImageBatch(Shape4 shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_.numel()) {
      throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " +
                       to_string(shape_));
    }
  }

  const Shape4& shape() const { return shape_; }
  std::size_t n() const { return shape_.n; }
  std::size_t c() const { return shape_.c; }
  std::size_t h() const { return shape_.h; }
  std::size_t w() const { return shape_.w; }
  std::size_t size() const { return data_.size(); }
  std::size_t sample_size() const { return shape_.sample_numel(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::vector<T>& vec() { return data_; }
  const std::vector<T>& vec() const { return data_; }

  T& at(std::size_t i, std::size_t ch, std::size_t y, std::size_t x) {
    return data_[((i * shape_.c + ch) * shape_.h + y) * shape_.w + x];
  }
  T at(std::size_t i, std::size_t ch, std::size_t y, std::size_t x) const {
    return data_[((i * shape_.c + ch) * shape_.h + y) * shape_.w + x];
  }

  SampleRef<T> sample(std::size_t i) {
    return {std::span<T>(data_).subspan(i * sample_size(), sample_size()), shape_.c, shape_.h,
            shape_.w};
  }
  SampleRef<const T> sample(std::size_t i) const {
    return {std::span<const T>(data_).subspan(i * sample_size(), sample_size()), shape_.c,
            shape_.h, shape_.w};
  }

  /// Copy of samples [first, first + count).
  BasicImageBatch slice(std::size_t first, std::size_t count) const {
    BasicImageBatch out(count, shape_.c, shape_.h, shape_.w);
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(first * sample_size()),
                count * sample_size(), out.data_.begin());
    return out;
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
  }

  friend bool operator==(const BasicImageBatch&, const BasicImageBatch&) = default;

 private:
  Shape4 shape_;
  std::vector<T> data_;
};

using ImageBatch = BasicImageBatch<float>;

/// N x K soft targets; rows are probability vectors.
class SoftLabelBatch {
 public:
  SoftLabelBatch() = default;
  SoftLabelBatch(std::size_t n, std::size_t k) : n_(n), k_(k), data_(n * k, 0.0f) {}

  static SoftLabelBatch one_hot(std::span<const int> classes, std::size_t k);

  std::size_t n() const { return n_; }
  std::size_t k() const { return k_; }
  std::span<float> row(std::size_t i) { return std::span<float>(data_).subspan(i * k_, k_); }
  std::span<const float> row(std::size_t i) const {
    return std::span<const float>(data_).subspan(i * k_, k_);
  }
  float& at(std::size_t i, std::size_t j) { return data_[i * k_ + j]; }
  float at(std::size_t i, std::size_t j) const { return data_[i * k_ + j]; }
  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  std::vector<float>& vec() { return data_; }
  const std::vector<float>& vec() const { return data_; }

  /// Index of the largest entry of row i; ties go to the lower index.
  std::size_t argmax(std::size_t i) const;

  /// Throws ValidationError unless every entry is >= 0 and each row sums to 1 within tol.
  void validate(double tol = 1e-6) const;

  SoftLabelBatch slice(std::size_t first, std::size_t count) const;

  friend bool operator==(const SoftLabelBatch&, const SoftLabelBatch&) = default;

 private:
  std::size_t n_ = 0, k_ = 0;
  std::vector<float> data_;
};

/// out = lambda * a + (1 - lambda) * b, elementwise.
ImageBatch blend(const ImageBatch& a, const ImageBatch& b, double lambda);

/// Copies src pixels inside box into dst (all channels).
template <typename T, typename S>
  requires std::same_as<std::remove_const_t<S>, T>
void paste_region(SampleRef<T> dst, SampleRef<S> src, const BoxPx& box) {
  if (!src.same_geometry(dst.c, dst.h, dst.w)) throw ShapeError("paste_region: sample geometry differs");
  if (!box.within(static_cast<int>(dst.w), static_cast<int>(dst.h))) {
    throw ValidationError("paste_region: box " + to_string(box) + " out of bounds");
  }
  const auto width = static_cast<std::size_t>(box.width());
  if (width == 0) return;
  for (std::size_t ch = 0; ch < dst.c; ++ch) {
    for (int y = box.y1; y < box.y2; ++y) {
      const std::size_t off = (ch * dst.h + static_cast<std::size_t>(y)) * dst.w + static_cast<std::size_t>(box.x1);
      std::copy_n(src.data.begin() + static_cast<std::ptrdiff_t>(off), width,
                  dst.data.begin() + static_cast<std::ptrdiff_t>(off));
    }
  }
}

template <typename T>
void fill_region(SampleRef<T> dst, const BoxPx& box, T value) {
  if (!box.within(static_cast<int>(dst.w), static_cast<int>(dst.h))) {
    throw ValidationError("fill_region: box " + to_string(box) + " out of bounds");
  }
  for (std::size_t ch = 0; ch < dst.c; ++ch) {
    for (int y = box.y1; y < box.y2; ++y) {
      for (int x = box.x1; x < box.x2; ++x) dst.at(ch, static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = value;
    }
  }
}

}  // namespace cutmixlab
