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

#include "cutmixlab/tensor.hpp"

#include <numeric>

namespace cutmixlab {

std::string to_string(const Shape4& s) {
  return "(" + std::to_string(s.n) + "," + std::to_string(s.c) + "," + std::to_string(s.h) + "," +
         std::to_string(s.w) + ")";
}

std::string to_string(const BoxPx& b) {
  return "(" + std::to_string(b.x1) + "," + std::to_string(b.y1) + "," + std::to_string(b.x2) + "," +
         std::to_string(b.y2) + ")";
}

SoftLabelBatch SoftLabelBatch::one_hot(std::span<const int> classes, std::size_t k) {
  SoftLabelBatch out(classes.size(), k);
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] < 0 || static_cast<std::size_t>(classes[i]) >= k) {
      throw ValidationError("class index " + std::to_string(classes[i]) + " outside [0," +
                            std::to_string(k) + ")");
    }
    out.at(i, static_cast<std::size_t>(classes[i])) = 1.0f;
  }
  return out;
}

std::size_t SoftLabelBatch::argmax(std::size_t i) const {
  auto r = row(i);
  return static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
}

void SoftLabelBatch::validate(double tol) const {
  for (std::size_t i = 0; i < n_; ++i) {
    double sum = 0.0;
    for (float v : row(i)) {
      if (!(v >= 0.0f)) throw ValidationError("soft label row " + std::to_string(i) + " has a negative entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) {
      throw ValidationError("soft label row " + std::to_string(i) + " sums to " + std::to_string(sum));
    }
  }
}

SoftLabelBatch SoftLabelBatch::slice(std::size_t first, std::size_t count) const {
  SoftLabelBatch out(count, k_);
  std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(first * k_), count * k_, out.data_.begin());
  return out;
}

ImageBatch blend(const ImageBatch& a, const ImageBatch& b, double lambda) {
  if (!(a.shape() == b.shape())) {
    throw ShapeError("blend: shape " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
  require(lambda >= 0.0 && lambda <= 1.0, "blend: lambda must lie in [0,1]");
  ImageBatch out(a.shape(), std::vector<float>(a.size()));
  auto pa = a.data();
  auto pb = b.data();
  auto po = out.data();
  // Endpoints are exact so that lambda in {0,1} reproduces an input bitwise.
  if (lambda == 1.0) {
    std::copy(pa.begin(), pa.end(), po.begin());
  } else if (lambda == 0.0) {
    std::copy(pb.begin(), pb.end(), po.begin());
  } else {
    for (std::size_t p = 0; p < po.size(); ++p) {
      po[p] = static_cast<float>(lambda * pa[p] + (1.0 - lambda) * pb[p]);
    }
  }
  return out;
}

}  // namespace cutmixlab
