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

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cutmixlab/data_io.hpp"
#include "cutmixlab/nn.hpp"
#include "cutmixlab/rng.hpp"

namespace cutmixlab {

struct AttackConfig {
  double epsilon = 8.0 / 255.0;
  float lo = 0.0f;
  float hi = 1.0f;

  void validate() const;
};

/// clamp(x + epsilon * sign(dL/dx), lo, hi) with sign(0) = 0.
ImageBatch fgsm(const Model& model, const ImageBatch& x, const SoftLabelBatch& y, const AttackConfig& cfg);

/// Centered s x s box; the top-left corner is floor((W - s) / 2).
BoxPx center_box(int width, int height, int s);
/// Zeroes the centered s x s hole of every sample.
ImageBatch occlude_center(const ImageBatch& x, int s);
/// Zeroes everything outside the centered s x s hole.
ImageBatch occlude_boundary(const ImageBatch& x, int s);
/// lambda * a + (1 - lambda) * b.
ImageBatch inbetween_mixup(const ImageBatch& a, const ImageBatch& b, double lambda);
/// a with its centered s x s region taken from b.
ImageBatch inbetween_cutmix_center(const ImageBatch& a, const ImageBatch& b, int s);

struct SweepPoint {
  double param = 0.0;
  double top1_err = 0.0;
  /// Fraction of predictions outside every class with positive target mass.
  double neither_rate = 0.0;
};

struct SweepResult {
  std::string name;
  std::vector<SweepPoint> points;

  /// param,top1_err
  std::string to_csv() const;
  /// param,neither_rate
  std::string neither_csv() const;
  nlohmann::json to_json() const;
};

/// A prediction is correct when it hits a class of maximal target mass, so a
/// balanced pair accepts either class.
struct MixedScore {
  double top1_err = 0.0;
  double neither_rate = 0.0;
};
MixedScore score_mixed(const Logits& logits, const SoftLabelBatch& targets);

/// Produces the perturbed inputs and their targets for one sweep parameter.
using SweepGenerator = std::function<std::pair<ImageBatch, SoftLabelBatch>(double param)>;

/// Evaluates `generator` at each parameter; parameters must be strictly increasing.
SweepResult sweep_top1(const Model& model, const SweepGenerator& generator, std::span<const double> params,
                       const std::string& name = "sweep");

enum class OcclusionKind { center, boundary };
SweepResult sweep_occlusion(const Model& model, const Dataset& ds, OcclusionKind kind, std::span<const double> sizes);

/// Index pairs (a, b) with different classes, drawn with a fixed stream.
std::vector<std::pair<std::size_t, std::size_t>> make_inbetween_pairs(const Dataset& ds, std::size_t count,
                                                                      RngStream& rng);

enum class InbetweenKind { mixup, cutmix_center };
/// Mixup params are lambda in [0,1]; center-CutMix params are hole sizes s.
SweepResult sweep_inbetween(const Model& model, const Dataset& ds,
                            std::span<const std::pair<std::size_t, std::size_t>> pairs, InbetweenKind kind,
                            std::span<const double> params);

struct FgsmReport {
  double epsilon = 0.0;
  double clean_acc = 0.0;
  double attacked_acc = 0.0;

  nlohmann::json to_json() const;
};
FgsmReport evaluate_fgsm(const Model& model, const Dataset& ds, const AttackConfig& cfg);

}  // namespace cutmixlab
