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
#include <vector>

#include "cutmixlab/rng.hpp"
#include "cutmixlab/tensor.hpp"

namespace cutmixlab {

/// One realized CutMix box draw.
///
/// `lambda_adj` is the surviving-area fraction of the clipped, rounded box,
/// `1 - area / (width * height)`; it is what labels are mixed with.
struct BoxDraw {
  double lambda_raw = 1.0;
  double center_x = 0.0, center_y = 0.0;
  BoxPx box;
  int width = 0, height = 0;
  double lambda_adj = 1.0;

  long long total_pixels() const { return static_cast<long long>(width) * height; }
  long long kept_pixels() const { return total_pixels() - box.area(); }
};

/// Surviving-area fraction for `box` on a width x height image.
double exact_area_lambda(const BoxPx& box, int width, int height);

/// Draw from Beta(alpha, alpha); alpha = 1 gives Uniform(0,1).
double sample_lambda(double alpha, RngStream& rng);

/// Box of extent (box_w, box_h) centered at (cx, cy), clamped to the image
/// and rounded half away from zero.
BoxPx box_from_center(double cx, double cy, double box_w, double box_h, int width, int height);

/// Deterministic part of the box draw: side lengths W*sqrt(1-lambda) and
/// H*sqrt(1-lambda) around a given center.
BoxDraw box_draw_at(double lambda, int width, int height, double cx, double cy);

/// Box center uniform on [0,W) x [0,H).
BoxDraw sample_box(double lambda, int width, int height, RngStream& rng);

/// Box center ~ Normal(image center, sigma_frac * size), clamped to the image.
BoxDraw sample_box_center_gaussian(double lambda, int width, int height, double sigma_frac,
                                   RngStream& rng);

/// Uniform random permutation of [0, n) (Fisher-Yates). Fixed points allowed.
std::vector<std::size_t> shuffle_pairing(std::size_t n, RngStream& rng);

}  // namespace cutmixlab
