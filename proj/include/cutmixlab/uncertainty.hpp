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

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cutmixlab/nn.hpp"
#include "cutmixlab/rng.hpp"

namespace cutmixlab {

/// Maximum softmax probability per row.
std::vector<double> msp_score(const Logits& logits);

/// Detector scores; a score >= t is classified in-distribution.
struct ScoreSet {
  std::vector<double> in_scores;
  std::vector<double> out_scores;

  void validate() const;
};

/// TNR (percent) at the largest threshold whose TPR reaches tpr_target.
double tnr_at_tpr(const ScoreSet& s, double tpr_target = 0.95);
/// Mann-Whitney AUROC (percent) with ties credited one half.
double auroc(const ScoreSet& s);
/// Best balanced accuracy (percent) over all thresholds.
double detection_accuracy(const ScoreSet& s);

struct OodMetrics {
  std::string ood_name;
  double tnr_at_tpr95 = 0.0;
  double auroc = 0.0;
  double detection_acc = 0.0;

  nlohmann::json to_json() const;
};
OodMetrics ood_metrics(const ScoreSet& s, const std::string& name);

enum class NoiseKind { uniform, gaussian };
NoiseKind parse_noise_kind(std::string_view name);
std::string_view to_string(NoiseKind k);

/// Noise images over [lo, hi]: uniform, or Normal(mid-range, quarter-range)
/// clamped to the range.
ImageBatch make_noise_ood(NoiseKind kind, std::size_t n, std::size_t c, std::size_t h, std::size_t w, float lo,
                          float hi, RngStream& rng);

}  // namespace cutmixlab
