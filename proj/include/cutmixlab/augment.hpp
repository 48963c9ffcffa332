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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cutmixlab/rng.hpp"
#include "cutmixlab/sampler.hpp"
#include "cutmixlab/tensor.hpp"

namespace cutmixlab {

enum class Method {
  none,
  mixup,
  cutout,
  cutmix,
  cutmix_center_gaussian,
  cutmix_fixed_size,
  cutmix_scheduled,
  cutmix_onehot,
  cutmix_complete_label,
  feature_cutmix,
};

std::string_view to_string(Method m);
Method parse_method(std::string_view name);
bool is_box_mix(Method m);

enum class Schedule { constant, linear_0_to_1 };

std::string_view to_string(Schedule s);
Schedule parse_schedule(std::string_view name);

struct AugmentConfig {
  Method method = Method::none;
  double alpha = 1.0;
  int cutout_hole = 16;
  float cutout_fill = 0.0f;
  int fixed_box = 16;
  double apply_prob = 1.0;
  Schedule schedule = Schedule::constant;
  /// 0 = input, l = output of conv stage l.
  std::vector<int> feature_layer_set = {0, 1, 2, 3};
  double center_sigma_frac = 0.125;
  /// Draw (lambda, box) per sample instead of once per minibatch.
  bool per_sample = false;

  void validate() const;
  friend bool operator==(const AugmentConfig&, const AugmentConfig&) = default;
};

struct MixRecord {
  std::size_t partner = 0;
  double lambda_raw = 1.0;
  std::optional<BoxPx> box;
  double lambda_adj = 1.0;
};

/// Per-sample provenance of one augmented batch. Boxes refer to a
/// width x height grid (the input, or a feature map for Feature CutMix).
struct MixPlan {
  int width = 0, height = 0;
  std::vector<MixRecord> records;

  static MixPlan identity(std::size_t n, int width, int height);
};

struct AugmentResult {
  ImageBatch images;
  SoftLabelBatch labels;
  MixPlan plan;
};

/// Label for a pair under the variant's rule:
/// one-hot CutMix takes the label of the sample holding more than half the
/// area (an exact tie keeps the base sample), complete-label takes the even
/// mixture, everything else mixes by lambda_adj.
std::vector<float> apply_variant_label_rule(Method variant, double lambda_adj,
                                            std::span<const float> label_i,
                                            std::span<const float> label_j);

/// Linear 0 -> 1 probability over the run; total_epochs == 1 gives 1.
double scheduled_apply_prob(int epoch, int total_epochs);

/// Samples the plan for any mixing method: probability gate, permutation,
/// lambda, box. Draw order is fixed so a seed reproduces the plan exactly.
MixPlan draw_mix_plan(std::size_t n, int width, int height, const AugmentConfig& cfg,
                      RngStream& rng);

/// Permutation and box for a batch at a given lambda (no gate, no lambda draw).
MixPlan draw_box_plan(std::size_t n, int width, int height, double lambda, RngStream& rng);

/// Applies a realized plan. Box methods paste partner pixels inside each box,
/// mixup blends, cutout fills. Labels follow the method's label rule.
AugmentResult apply_mix_plan(const ImageBatch& images, const SoftLabelBatch& labels,
                             const MixPlan& plan, Method method, float cutout_fill = 0.0f);

/// Mixes labels only (used when the image mix happens inside the network).
SoftLabelBatch mix_labels(const SoftLabelBatch& labels, const MixPlan& plan, Method method);

AugmentResult cutmix_batch(const ImageBatch& images, const SoftLabelBatch& labels,
                           const AugmentConfig& cfg, RngStream& rng);
AugmentResult mixup_batch(const ImageBatch& images, const SoftLabelBatch& labels,
                          const AugmentConfig& cfg, RngStream& rng);
AugmentResult cutout_batch(const ImageBatch& images, const SoftLabelBatch& labels,
                           const AugmentConfig& cfg, RngStream& rng);

/// Box-mix on an activation batch at its own spatial resolution.
AugmentResult feature_cutmix(const ImageBatch& features, const SoftLabelBatch& labels,
                             double lambda, RngStream& rng);

/// Layer for Feature CutMix, uniform over cfg.feature_layer_set.
int choose_feature_layer(const AugmentConfig& cfg, RngStream& rng);

/// Input-level dispatch on cfg.method. feature_cutmix is treated as CutMix on
/// the input (layer 0); deeper layers are applied inside the network.
AugmentResult augment_batch(const ImageBatch& images, const SoftLabelBatch& labels,
                            const AugmentConfig& cfg, RngStream& rng);

}  // namespace cutmixlab
