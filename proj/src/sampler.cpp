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

#include "cutmixlab/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cutmixlab {

namespace {

void check_geometry(double lambda, int width, int height) {
  require(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0,1]");
  require(width >= 1 && height >= 1, "image dimensions must be >= 1");
}

int round_clamped(double v, int hi) {
  // std::round is half-away-from-zero.
  return static_cast<int>(std::round(std::clamp(v, 0.0, static_cast<double>(hi))));
}

}  // namespace

double exact_area_lambda(const BoxPx& box, int width, int height) {
  const long long total = static_cast<long long>(width) * height;
  return 1.0 - static_cast<double>(box.area()) / static_cast<double>(total);
}

double sample_lambda(double alpha, RngStream& rng) {
  require(alpha > 0.0, "alpha must be positive");
  return rng.beta(alpha, alpha);
}

BoxPx box_from_center(double cx, double cy, double box_w, double box_h, int width, int height) {
  BoxPx b;
  b.x1 = round_clamped(cx - box_w / 2.0, width);
  b.x2 = round_clamped(cx + box_w / 2.0, width);
  b.y1 = round_clamped(cy - box_h / 2.0, height);
  b.y2 = round_clamped(cy + box_h / 2.0, height);
  return b;
}

BoxDraw box_draw_at(double lambda, int width, int height, double cx, double cy) {
  check_geometry(lambda, width, height);
  const double cut = std::sqrt(1.0 - lambda);
  BoxDraw d;
  d.lambda_raw = lambda;
  d.center_x = cx;
  d.center_y = cy;
  d.width = width;
  d.height = height;
  d.box = box_from_center(cx, cy, width * cut, height * cut, width, height);
  d.lambda_adj = exact_area_lambda(d.box, width, height);
  return d;
}

BoxDraw sample_box(double lambda, int width, int height, RngStream& rng) {
  check_geometry(lambda, width, height);
  const double cx = rng.uniform() * width;
  const double cy = rng.uniform() * height;
  return box_draw_at(lambda, width, height, cx, cy);
}

BoxDraw sample_box_center_gaussian(double lambda, int width, int height, double sigma_frac,
                                   RngStream& rng) {
  check_geometry(lambda, width, height);
  require(sigma_frac > 0.0, "sigma_frac must be positive");
  const double cx = std::clamp(width / 2.0 + sigma_frac * width * rng.normal(), 0.0,
                               static_cast<double>(width));
  const double cy = std::clamp(height / 2.0 + sigma_frac * height * rng.normal(), 0.0,
                               static_cast<double>(height));
  return box_draw_at(lambda, width, height, cx, cy);
}

std::vector<std::size_t> shuffle_pairing(std::size_t n, RngStream& rng) {
  require(n >= 1, "shuffle_pairing requires n >= 1");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

}  // namespace cutmixlab
