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

#include "cutmixlab/wsol.hpp"

#include <algorithm>
#include <cmath>

#include "cutmixlab/errors.hpp"

namespace cutmixlab {

std::size_t BinaryMap::count() const {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

BinaryMap binarize_values(std::span<const double> values, std::size_t h, std::size_t w, double sigma) {
  require(sigma > 0.0 && sigma < 1.0, "sigma must lie in (0,1)");
  require(h > 0 && w > 0 && values.size() == h * w, "CAM values do not match the map size");
  for (double v : values) require(std::isfinite(v), "CAM contains non-finite values");
  const double t = sigma * *std::max_element(values.begin(), values.end());
  BinaryMap out(h, w);
  for (std::size_t i = 0; i < values.size(); ++i) out.cells[i] = values[i] > t ? 1 : 0;
  return out;
}

BinaryMap binarize_cam(const CamMap& cam, double sigma) {
  return binarize_values(cam.values, cam.map_h, cam.map_w, sigma);
}

std::vector<Cell> largest_connected_region(const BinaryMap& map) {
  require(map.h > 0 && map.w > 0, "binary map must be non-empty");
  std::vector<int> label(map.cells.size(), -1);
  std::vector<Cell> best, current, stack;
  int next = 0;
  for (std::size_t r0 = 0; r0 < map.h; ++r0) {
    for (std::size_t c0 = 0; c0 < map.w; ++c0) {
      if (!map.at(r0, c0) || label[r0 * map.w + c0] >= 0) continue;
      current.clear();
      stack.assign(1, Cell{r0, c0});
      label[r0 * map.w + c0] = next;
      while (!stack.empty()) {
        const Cell cell = stack.back();
        stack.pop_back();
        current.push_back(cell);
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            const auto r = static_cast<std::ptrdiff_t>(cell.r) + dr;
            const auto c = static_cast<std::ptrdiff_t>(cell.c) + dc;
            if (r < 0 || c < 0 || r >= static_cast<std::ptrdiff_t>(map.h) || c >= static_cast<std::ptrdiff_t>(map.w)) continue;
            const auto idx = static_cast<std::size_t>(r) * map.w + static_cast<std::size_t>(c);
            if (map.cells[idx] && label[idx] < 0) {
              label[idx] = next;
              stack.push_back(Cell{static_cast<std::size_t>(r), static_cast<std::size_t>(c)});
            }
          }
        }
      }
      ++next;
      // Components are discovered in row-major order of their first cell, so
      // strict > keeps the earliest on ties.
      if (current.size() > best.size()) best = current;
    }
  }
  std::sort(best.begin(), best.end());
  return best;
}

BoxPx tightest_bbox(std::span<const Cell> cells, std::size_t map_h, std::size_t map_w, int image_h, int image_w) {
  require(!cells.empty(), "tightest_bbox needs at least one cell");
  require(map_h > 0 && map_w > 0 && image_h > 0 && image_w > 0, "tightest_bbox needs positive sizes");
  std::size_t r1 = map_h, c1 = map_w, r2 = 0, c2 = 0;
  for (const auto& cell : cells) {
    require(cell.r < map_h && cell.c < map_w, "cell outside the map");
    r1 = std::min(r1, cell.r);
    c1 = std::min(c1, cell.c);
    r2 = std::max(r2, cell.r + 1);
    c2 = std::max(c2, cell.c + 1);
  }
  const auto W = static_cast<std::size_t>(image_w), H = static_cast<std::size_t>(image_h);
  return BoxPx{static_cast<int>(c1 * W / map_w), static_cast<int>(r1 * H / map_h), static_cast<int>(c2 * W / map_w),
               static_cast<int>(r2 * H / map_h)};
}

double iou(const BoxPx& a, const BoxPx& b) {
  require(a.x1 <= a.x2 && a.y1 <= a.y2 && b.x1 <= b.x2 && b.y1 <= b.y2, "iou needs valid boxes");
  require(a.area() > 0 || b.area() > 0, "iou of two empty boxes is undefined");
  const long long iw = std::max(0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const long long ih = std::max(0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const long long inter = iw * ih;
  return static_cast<double>(inter) / static_cast<double>(a.area() + b.area() - inter);
}

std::optional<BoxPx> estimate_box(const CamMap& cam, double sigma) {
  const auto region = largest_connected_region(binarize_cam(cam, sigma));
  if (region.empty()) return std::nullopt;
  return tightest_bbox(region, cam.map_h, cam.map_w, cam.image_h, cam.image_w);
}

double sample_iou(const LocSample& s) { return s.predicted_box ? iou(*s.predicted_box, s.gt_box) : 0.0; }

bool localized(const LocSample& s) { return s.predicted == s.truth && sample_iou(s) > 0.5; }

double loc_accuracy(std::span<const LocSample> samples) {
  require(!samples.empty(), "loc_accuracy needs at least one sample");
  std::size_t hits = 0;
  for (const auto& s : samples) hits += localized(s);
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

nlohmann::json WsolReport::to_json() const {
  return {{"n", n}, {"loc_acc", loc_acc}, {"cls_acc", cls_acc}, {"mean_iou", mean_iou}};
}

std::vector<LocSample> localize_dataset(const Model& model, const Dataset& ds, const WsolConfig& cfg) {
  require(ds.size() > 0, "WSOL evaluation needs a non-empty dataset");
  require(ds.gt_boxes.size() == ds.size(), "WSOL evaluation needs a ground-truth box per sample");
  std::vector<LocSample> out;
  out.reserve(ds.size());
  const std::size_t chunk = 256;
  const int H = static_cast<int>(ds.images.h()), W = static_cast<int>(ds.images.w());
  for (std::size_t first = 0; first < ds.size(); first += chunk) {
    const std::size_t count = std::min(chunk, ds.size() - first);
    const auto fwd = model.run(ds.images.slice(first, count), std::nullopt, nullptr, nullptr);
    for (std::size_t j = 0; j < count; ++j) {
      const auto row = fwd.logits.row(j);
      LocSample s;
      s.predicted = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
      s.truth = ds.classes[first + j];
      s.gt_box = ds.gt_boxes[first + j];
      const int k = cfg.use_gt_class ? s.truth : s.predicted;
      s.predicted_box = estimate_box(cam_from_features(model.head_weight(), fwd.features, j, k, H, W), cfg.sigma);
      out.push_back(s);
    }
  }
  return out;
}

WsolReport summarize_wsol(std::span<const LocSample> samples) {
  WsolReport r;
  r.n = samples.size();
  r.loc_acc = loc_accuracy(samples);
  double iou_sum = 0.0;
  std::size_t correct = 0;
  for (const auto& s : samples) {
    iou_sum += sample_iou(s);
    correct += s.predicted == s.truth;
  }
  r.cls_acc = static_cast<double>(correct) / static_cast<double>(r.n);
  r.mean_iou = iou_sum / static_cast<double>(r.n);
  return r;
}

WsolReport evaluate_wsol(const Model& model, const Dataset& ds, const WsolConfig& cfg) {
  const auto samples = localize_dataset(model, ds, cfg);
  return summarize_wsol(samples);
}

}  // namespace cutmixlab
