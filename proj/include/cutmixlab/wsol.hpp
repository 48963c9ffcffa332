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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cutmixlab/data_io.hpp"
#include "cutmixlab/nn.hpp"
#include "cutmixlab/tensor.hpp"

namespace cutmixlab {

inline constexpr double kDefaultCamSigma = 0.15;

struct BinaryMap {
  std::size_t h = 0, w = 0;
  std::vector<std::uint8_t> cells;

  BinaryMap() = default;
  BinaryMap(std::size_t rows, std::size_t cols) : h(rows), w(cols), cells(rows * cols, 0) {}
  std::uint8_t at(std::size_t r, std::size_t c) const { return cells[r * w + c]; }
  std::uint8_t& at(std::size_t r, std::size_t c) { return cells[r * w + c]; }
  std::size_t count() const;
};

struct Cell {
  std::size_t r = 0, c = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// cell = 1 iff value > sigma * max(values).
BinaryMap binarize_cam(const CamMap& cam, double sigma = kDefaultCamSigma);
BinaryMap binarize_values(std::span<const double> values, std::size_t h, std::size_t w, double sigma);

/// Largest 8-connected foreground component in row-major order; ties go to the
/// component whose first cell comes first in row-major order. Empty map -> {}.
std::vector<Cell> largest_connected_region(const BinaryMap& map);

/// Smallest rectangle covering `cells`, scaled from the map grid to the image
/// with cell (r, c) -> [c*W/W', (c+1)*W/W') x [r*H/H', (r+1)*H/H').
BoxPx tightest_bbox(std::span<const Cell> cells, std::size_t map_h, std::size_t map_w, int image_h, int image_w);

double iou(const BoxPx& a, const BoxPx& b);

/// Box estimated from a CAM, or nullopt when the foreground is empty.
std::optional<BoxPx> estimate_box(const CamMap& cam, double sigma = kDefaultCamSigma);

struct LocSample {
  int predicted = 0;
  int truth = 0;
  std::optional<BoxPx> predicted_box;
  BoxPx gt_box;
};

/// IoU of a sample's box with the ground truth; a missing box scores 0.
double sample_iou(const LocSample& s);
/// Correct class AND IoU strictly above 0.5.
bool localized(const LocSample& s);
double loc_accuracy(std::span<const LocSample> samples);

struct WsolConfig {
  double sigma = kDefaultCamSigma;
  /// CAM of the ground-truth class instead of the predicted class.
  bool use_gt_class = false;
};

struct WsolReport {
  std::size_t n = 0;
  double loc_acc = 0.0;
  double cls_acc = 0.0;
  double mean_iou = 0.0;

  nlohmann::json to_json() const;
};

std::vector<LocSample> localize_dataset(const Model& model, const Dataset& ds, const WsolConfig& cfg);
WsolReport summarize_wsol(std::span<const LocSample> samples);
WsolReport evaluate_wsol(const Model& model, const Dataset& ds, const WsolConfig& cfg = {});

}  // namespace cutmixlab
