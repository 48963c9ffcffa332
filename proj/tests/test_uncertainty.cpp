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

#include <gtest/gtest.h>

#include <cmath>

#include "cutmixlab/uncertainty.hpp"
#include "oracles.hpp"

using namespace cutmixlab;

namespace {

ScoreSet random_set(RngStream& rng, std::size_t max_n, bool discrete) {
  ScoreSet s;
  const std::size_t ni = 1 + rng.below(max_n), no = 1 + rng.below(max_n);
  const double shift = rng.uniform() * 2.0 - 0.5;
  auto draw = [&](double mu) { return discrete ? std::floor(4.0 * (rng.normal() + mu)) / 4.0 : rng.normal() + mu; };
  for (std::size_t i = 0; i < ni; ++i) s.in_scores.push_back(draw(shift));
  for (std::size_t i = 0; i < no; ++i) s.out_scores.push_back(draw(0.0));
  return s;
}

}  // namespace

TEST(MspScore, Cases) {
  Logits z(3, 4);
  z.at(1, 2) = 50.0f;
  z.at(2, 0) = 1.0f;
  z.at(2, 1) = 2.0f;
  z.at(2, 2) = 3.0f;
  z.at(2, 3) = -1e30f;
  const auto s = msp_score(z);
  EXPECT_NEAR(s[0], 0.25, 1e-15);
  EXPECT_NEAR(s[1], 1.0, 1e-9);
  const double e = std::exp(1.0);
  EXPECT_NEAR(s[2], e * e * e / (e + e * e + e * e * e), 1e-12);
}

TEST(TnrAtTpr, Cases) {
  EXPECT_EQ(tnr_at_tpr(ScoreSet{{1, 1, 1}, {0, 0, 0}}), 100.0);
  std::vector<double> in;
  for (int i = 0; i < 20; ++i) in.push_back(0.95 - 0.05 * i);
  std::vector<double> out;
  for (double v : in) out.push_back(v - 0.5);
  EXPECT_NEAR(tnr_at_tpr(ScoreSet{in, out}), oracle::tnr_at_tpr(in, out, 0.95), 1e-12);
  EXPECT_NEAR(tnr_at_tpr(ScoreSet{in, in}), oracle::tnr_at_tpr(in, in, 0.95), 1e-12);
  EXPECT_THROW(tnr_at_tpr(ScoreSet{{}, {1}}), ValidationError);
  EXPECT_THROW(tnr_at_tpr(ScoreSet{{NAN}, {1}}), ValidationError);
}

TEST(Auroc, Cases) {
  EXPECT_EQ(auroc(ScoreSet{{2, 3}, {0, 1}}), 100.0);
  EXPECT_EQ(auroc(ScoreSet{{1, 2, 2}, {2, 1, 2}}), 50.0);
  EXPECT_EQ(auroc(ScoreSet{{3, 1}, {2, 0}}), 75.0);
}

TEST(DetectionAccuracy, Cases) {
  EXPECT_EQ(detection_accuracy(ScoreSet{{2, 3}, {0, 1}}), 100.0);
  EXPECT_EQ(detection_accuracy(ScoreSet{{3, 1}, {2, 0}}), 75.0);
  const std::vector<double> same = {0.1, 0.4, 0.4, 0.9};
  EXPECT_NEAR(detection_accuracy(ScoreSet{same, same}), oracle::detection_accuracy(same, same), 1e-12);
  EXPECT_GE(detection_accuracy(ScoreSet{same, same}), 50.0);
}

TEST(OodMetrics, MatchOraclesOnRandomSets) {
  RngStream rng(1, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_set(rng, trial < 100 ? 40 : 400, trial % 2 == 0);
    ASSERT_NEAR(tnr_at_tpr(s), oracle::tnr_at_tpr(s.in_scores, s.out_scores, 0.95), 1e-9);
    ASSERT_NEAR(auroc(s), oracle::auroc_pairs(s.in_scores, s.out_scores), 1e-9);
    ASSERT_NEAR(detection_accuracy(s), oracle::detection_accuracy(s.in_scores, s.out_scores), 1e-9);
    for (double t : {0.5, 0.8, 0.99, 1.0}) {
      ASSERT_NEAR(tnr_at_tpr(s, t), oracle::tnr_at_tpr(s.in_scores, s.out_scores, t), 1e-9);
    }
  }
}

TEST(OodMetrics, AurocSwapSumsToHundredExactly) {
  RngStream rng(2, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto s = random_set(rng, 60, trial % 3 == 0);
    ASSERT_EQ(auroc(s) + auroc(ScoreSet{s.out_scores, s.in_scores}), 100.0);
  }
}

TEST(OodMetrics, InvariantUnderIncreasingTransform) {
  RngStream rng(3, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = random_set(rng, 100, trial % 2 == 0);
    ScoreSet t;
    for (double v : s.in_scores) t.in_scores.push_back(std::exp(v) * 3.0 + 1.0);
    for (double v : s.out_scores) t.out_scores.push_back(std::exp(v) * 3.0 + 1.0);
    ASSERT_EQ(tnr_at_tpr(s), tnr_at_tpr(t));
    ASSERT_EQ(auroc(s), auroc(t));
    ASSERT_EQ(detection_accuracy(s), detection_accuracy(t));
  }
}

TEST(OodMetrics, RangeAndJson) {
  RngStream rng(4, 0);
  const auto s = random_set(rng, 50, false);
  const auto m = ood_metrics(s, "uniform");
  for (double v : {m.tnr_at_tpr95, m.auroc, m.detection_acc}) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 100.0);
  }
  const auto j = m.to_json();
  EXPECT_EQ(j.at("ood_name"), "uniform");
  EXPECT_EQ(j.size(), 4u);
}

TEST(NoiseOod, UniformWithinRange) {
  RngStream rng(5, 0);
  const auto b = make_noise_ood(NoiseKind::uniform, 20, 3, 8, 8, -1.5f, 2.0f, rng);
  for (float v : b.vec()) {
    ASSERT_GE(v, -1.5f);
    ASSERT_LE(v, 2.0f);
  }
}

TEST(NoiseOod, GaussianMeanNearMidRange) {
  RngStream rng(6, 0);
  const std::size_t n = 50, pix = 3 * 16 * 16;
  const auto b = make_noise_ood(NoiseKind::gaussian, n, 3, 16, 16, 0.0f, 1.0f, rng);
  double s = 0.0;
  for (float v : b.vec()) {
    ASSERT_GE(v, 0.0f);
    ASSERT_LE(v, 1.0f);
    s += v;
  }
  // Symmetric clamping keeps the mean at mid-range; std <= 0.25.
  EXPECT_NEAR(s / static_cast<double>(n * pix), 0.5, 3.0 * 0.25 / std::sqrt(static_cast<double>(n * pix)));
}

TEST(NoiseOod, DeterministicAndValidated) {
  RngStream a(7, 1), b(7, 1);
  EXPECT_EQ(make_noise_ood(NoiseKind::gaussian, 3, 1, 4, 4, 0, 1, a).vec(),
            make_noise_ood(NoiseKind::gaussian, 3, 1, 4, 4, 0, 1, b).vec());
  EXPECT_THROW(make_noise_ood(NoiseKind::uniform, 0, 1, 4, 4, 0, 1, a), ValidationError);
  EXPECT_THROW(parse_noise_kind("salt"), ValidationError);
  EXPECT_EQ(parse_noise_kind("gaussian"), NoiseKind::gaussian);
}
