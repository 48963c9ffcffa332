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

#include "cutmixlab/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>

#include "cutmixlab/errors.hpp"

namespace cutmixlab {

std::vector<double> msp_score(const Logits& logits) {
  std::vector<double> out(logits.rows);
  for (std::size_t i = 0; i < logits.rows; ++i) {
    const auto p = softmax_row(logits.row(i));
    out[i] = *std::max_element(p.begin(), p.end());
  }
  return out;
}

void ScoreSet::validate() const {
  require(!in_scores.empty() && !out_scores.empty(), "score sets must be non-empty");
  for (double v : in_scores) require(std::isfinite(v), "in-distribution scores must be finite");
  for (double v : out_scores) require(std::isfinite(v), "out-of-distribution scores must be finite");
}

double tnr_at_tpr(const ScoreSet& s, double tpr_target) {
  s.validate();
  require(tpr_target > 0.0 && tpr_target <= 1.0, "tpr_target must lie in (0,1]");
  std::vector<double> in = s.in_scores;
  std::sort(in.begin(), in.end(), std::greater<>());
  const std::size_t n = in.size();
  // Smallest k with k/n >= target, evaluated the same way as TPR itself.
  std::size_t k = 1;
  while (k < n && !(static_cast<double>(k) / static_cast<double>(n) >= tpr_target)) ++k;
  const double t = in[k - 1];
  const auto below = std::count_if(s.out_scores.begin(), s.out_scores.end(), [t](double v) { return v < t; });
  return 100.0 * (static_cast<double>(below) / static_cast<double>(s.out_scores.size()));
}

double auroc(const ScoreSet& s) {
  s.validate();
  std::vector<double> out = s.out_scores;
  std::sort(out.begin(), out.end());
  // a counts half-pairs: 2 per win, 1 per tie; d = 2 * n_in * n_out.
  std::uint64_t a = 0;
  for (double v : s.in_scores) {
    const auto lo = std::lower_bound(out.begin(), out.end(), v);
    const auto hi = std::upper_bound(lo, out.end(), v);
    a += 2 * static_cast<std::uint64_t>(lo - out.begin()) + static_cast<std::uint64_t>(hi - lo);
  }
  const std::uint64_t d = 2 * static_cast<std::uint64_t>(s.in_scores.size()) * s.out_scores.size();
  // Evaluating the smaller side directly makes auroc(in,out) + auroc(out,in) == 100 exactly.
  if (2 * a <= d) return 100.0 * static_cast<double>(a) / static_cast<double>(d);
  return 100.0 - 100.0 * static_cast<double>(d - a) / static_cast<double>(d);
}

double detection_accuracy(const ScoreSet& s) {
  s.validate();
  std::vector<double> in = s.in_scores, out = s.out_scores;
  std::sort(in.begin(), in.end());
  std::sort(out.begin(), out.end());
  std::vector<double> thresholds = in;
  thresholds.insert(thresholds.end(), out.begin(), out.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  thresholds.push_back(std::numeric_limits<double>::infinity());
  const auto n_in = static_cast<double>(in.size()), n_out = static_cast<double>(out.size());
  double best = 0.0;
  for (double t : thresholds) {
    const auto tp = static_cast<double>(in.end() - std::lower_bound(in.begin(), in.end(), t));
    const auto tn = static_cast<double>(std::lower_bound(out.begin(), out.end(), t) - out.begin());
    best = std::max(best, 0.5 * (tp / n_in + tn / n_out));
  }
  return 100.0 * best;
}

nlohmann::json OodMetrics::to_json() const {
  return {{"ood_name", ood_name}, {"tnr_at_tpr95", tnr_at_tpr95}, {"auroc", auroc}, {"detection_acc", detection_acc}};
}

OodMetrics ood_metrics(const ScoreSet& s, const std::string& name) {
  return OodMetrics{name, tnr_at_tpr(s, 0.95), auroc(s), detection_accuracy(s)};
}

NoiseKind parse_noise_kind(std::string_view name) {
  if (name == "uniform") return NoiseKind::uniform;
  if (name == "gaussian") return NoiseKind::gaussian;
  throw ValidationError("unknown OOD noise kind '" + std::string(name) + "' (expected uniform or gaussian)");
}

std::string_view to_string(NoiseKind k) { return k == NoiseKind::uniform ? "uniform" : "gaussian"; }

ImageBatch make_noise_ood(NoiseKind kind, std::size_t n, std::size_t c, std::size_t h, std::size_t w, float lo,
                          float hi, RngStream& rng) {
  require(n >= 1, "noise batch needs n >= 1");
  require(lo < hi, "noise range must satisfy lo < hi");
  ImageBatch out(n, c, h, w);
  const double a = lo, b = hi, mid = 0.5 * (a + b), sd = 0.25 * (b - a);
  for (auto& v : out.vec()) {
    const double x = kind == NoiseKind::uniform ? a + (b - a) * rng.uniform() : std::clamp(mid + sd * rng.normal(), a, b);
    v = static_cast<float>(std::min(x, b));
  }
  return out;
}

}  // namespace cutmixlab
