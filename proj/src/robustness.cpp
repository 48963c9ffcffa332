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

#include "cutmixlab/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cutmixlab/errors.hpp"
#include "cutmixlab/trainer.hpp"

namespace cutmixlab {

void AttackConfig::validate() const {
  require(epsilon >= 0.0 && std::isfinite(epsilon), "epsilon must be finite and >= 0");
  require(lo < hi, "clamp range must satisfy lo < hi");
}

ImageBatch fgsm(const Model& model, const ImageBatch& x, const SoftLabelBatch& y, const AttackConfig& cfg) {
  cfg.validate();
  require(x.n() == y.n(), "fgsm needs one target per sample");
  const auto grad = loss_input_gradient(model, x, y);
  ImageBatch out = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const float g = grad.data()[i];
    if (!std::isfinite(g)) throw NumericError("fgsm: non-finite input gradient at element " + std::to_string(i));
    const double sign = g > 0.0f ? 1.0 : (g < 0.0f ? -1.0 : 0.0);
    const double v = static_cast<double>(x.data()[i]) + cfg.epsilon * sign;
    out.vec()[i] = static_cast<float>(std::clamp(v, static_cast<double>(cfg.lo), static_cast<double>(cfg.hi)));
  }
  return out;
}

BoxPx center_box(int width, int height, int s) {
  require(s >= 0 && s <= std::min(width, height),
          "hole size " + std::to_string(s) + " outside [0, " + std::to_string(std::min(width, height)) + "]");
  const int x1 = (width - s) / 2, y1 = (height - s) / 2;
  return BoxPx{x1, y1, x1 + s, y1 + s};
}

ImageBatch occlude_center(const ImageBatch& x, int s) {
  const BoxPx box = center_box(static_cast<int>(x.w()), static_cast<int>(x.h()), s);
  ImageBatch out = x;
  for (std::size_t i = 0; i < x.n(); ++i) fill_region(out.sample(i), box, 0.0f);
  return out;
}

ImageBatch occlude_boundary(const ImageBatch& x, int s) {
  const BoxPx box = center_box(static_cast<int>(x.w()), static_cast<int>(x.h()), s);
  ImageBatch out(x.shape(), std::vector<float>(x.size(), 0.0f));
  for (std::size_t i = 0; i < x.n(); ++i) paste_region(out.sample(i), x.sample(i), box);
  return out;
}

ImageBatch inbetween_mixup(const ImageBatch& a, const ImageBatch& b, double lambda) {
  require(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0,1]");
  return blend(a, b, lambda);
}

ImageBatch inbetween_cutmix_center(const ImageBatch& a, const ImageBatch& b, int s) {
  if (a.shape() != b.shape()) throw ShapeError("in-between pair shapes differ");
  const BoxPx box = center_box(static_cast<int>(a.w()), static_cast<int>(a.h()), s);
  ImageBatch out = a;
  for (std::size_t i = 0; i < a.n(); ++i) paste_region(out.sample(i), b.sample(i), box);
  return out;
}

namespace {

std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(9);
  os << v;
  return os.str();
}

}  // namespace

std::string SweepResult::to_csv() const {
  std::string out = "param,top1_err\n";
  for (const auto& p : points) out += fmt_num(p.param) + "," + fmt_num(p.top1_err) + "\n";
  return out;
}

std::string SweepResult::neither_csv() const {
  std::string out = "param,neither_rate\n";
  for (const auto& p : points) out += fmt_num(p.param) + "," + fmt_num(p.neither_rate) + "\n";
  return out;
}

nlohmann::json SweepResult::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points) pts.push_back({{"param", p.param}, {"top1_err", p.top1_err}, {"neither_rate", p.neither_rate}});
  return {{"name", name}, {"points", pts}};
}

MixedScore score_mixed(const Logits& logits, const SoftLabelBatch& targets) {
  require(logits.rows > 0, "cannot score an empty batch");
  if (logits.rows != targets.n() || logits.cols != targets.k()) throw ShapeError("logits and targets disagree");
  std::size_t wrong = 0, neither = 0;
  for (std::size_t i = 0; i < logits.rows; ++i) {
    const auto row = logits.row(i);
    const auto pred = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    const auto t = targets.row(i);
    const float top = *std::max_element(t.begin(), t.end());
    wrong += t[pred] != top;
    neither += !(t[pred] > 0.0f);
  }
  const auto n = static_cast<double>(logits.rows);
  return {static_cast<double>(wrong) / n, static_cast<double>(neither) / n};
}

SweepResult sweep_top1(const Model& model, const SweepGenerator& generator, std::span<const double> params,
                       const std::string& name) {
  require(!params.empty(), "sweep needs at least one parameter");
  for (std::size_t i = 1; i < params.size(); ++i) require(params[i] > params[i - 1], "sweep parameters must be strictly increasing");
  SweepResult res;
  res.name = name;
  for (double p : params) {
    const auto [images, targets] = generator(p);
    require(images.n() > 0, "sweep generator returned an empty batch");
    const auto score = score_mixed(predict_batched(model, images), targets);
    res.points.push_back({p, score.top1_err, score.neither_rate});
  }
  return res;
}

namespace {

int as_size(double p) {
  require(p >= 0.0 && std::floor(p) == p, "hole sizes must be non-negative integers");
  return static_cast<int>(p);
}

}  // namespace

SweepResult sweep_occlusion(const Model& model, const Dataset& ds, OcclusionKind kind, std::span<const double> sizes) {
  require(ds.size() > 0, "occlusion sweep needs a non-empty dataset");
  auto gen = [&](double p) {
    const int s = as_size(p);
    ImageBatch out = kind == OcclusionKind::center ? occlude_center(ds.images, s) : occlude_boundary(ds.images, s);
    return std::pair{std::move(out), ds.labels};
  };
  return sweep_top1(model, gen, sizes, kind == OcclusionKind::center ? "occlusion_center" : "occlusion_boundary");
}

std::vector<std::pair<std::size_t, std::size_t>> make_inbetween_pairs(const Dataset& ds, std::size_t count,
                                                                      RngStream& rng) {
  require(ds.size() >= 2, "in-between pairs need at least two samples");
  const bool has_two = std::any_of(ds.classes.begin(), ds.classes.end(), [&](int c) { return c != ds.classes[0]; });
  require(has_two, "in-between pairs need at least two classes");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  while (pairs.size() < count) {
    const std::size_t a = rng.below(ds.size());
    const std::size_t b = rng.below(ds.size());
    if (ds.classes[a] != ds.classes[b]) pairs.emplace_back(a, b);
  }
  return pairs;
}

SweepResult sweep_inbetween(const Model& model, const Dataset& ds,
                            std::span<const std::pair<std::size_t, std::size_t>> pairs, InbetweenKind kind,
                            std::span<const double> params) {
  require(!pairs.empty(), "in-between sweep needs at least one pair");
  std::vector<std::size_t> ia, ib;
  for (const auto& [a, b] : pairs) {
    ia.push_back(a);
    ib.push_back(b);
  }
  const Dataset A = ds.subset(ia), B = ds.subset(ib);
  const double area = static_cast<double>(ds.images.w() * ds.images.h());
  auto gen = [&](double p) {
    double lambda = 0.0;
    ImageBatch images;
    if (kind == InbetweenKind::mixup) {
      images = inbetween_mixup(A.images, B.images, p);
      lambda = p;
    } else {
      const int s = as_size(p);
      images = inbetween_cutmix_center(A.images, B.images, s);
      lambda = 1.0 - static_cast<double>(s) * s / area;
    }
    SoftLabelBatch targets(A.size(), A.labels.k());
    for (std::size_t i = 0; i < A.size(); ++i) {
      for (std::size_t k = 0; k < targets.k(); ++k) {
        targets.at(i, k) = static_cast<float>(lambda * A.labels.at(i, k) + (1.0 - lambda) * B.labels.at(i, k));
      }
    }
    return std::pair{std::move(images), std::move(targets)};
  };
  return sweep_top1(model, gen, params, kind == InbetweenKind::mixup ? "inbetween_mixup" : "inbetween_cutmix");
}

nlohmann::json FgsmReport::to_json() const {
  return {{"epsilon", epsilon}, {"clean_acc", clean_acc}, {"attacked_acc", attacked_acc}};
}

namespace {

std::size_t count_hits(const Logits& logits, std::span<const int> classes) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < logits.rows; ++i) {
    const auto row = logits.row(i);
    hits += static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()) == classes[i];
  }
  return hits;
}

}  // namespace

FgsmReport evaluate_fgsm(const Model& model, const Dataset& ds, const AttackConfig& cfg) {
  require(ds.size() > 0, "FGSM evaluation needs a non-empty dataset");
  FgsmReport r;
  r.epsilon = cfg.epsilon;
  const std::size_t chunk = 256;
  std::size_t clean = 0, attacked = 0;
  for (std::size_t first = 0; first < ds.size(); first += chunk) {
    const std::size_t count = std::min(chunk, ds.size() - first);
    const ImageBatch x = ds.images.slice(first, count);
    const SoftLabelBatch y = ds.labels.slice(first, count);
    const std::span<const int> cls(ds.classes.data() + first, count);
    clean += count_hits(model.predict(x), cls);
    attacked += count_hits(model.predict(fgsm(model, x, y, cfg)), cls);
  }
  r.clean_acc = static_cast<double>(clean) / static_cast<double>(ds.size());
  r.attacked_acc = static_cast<double>(attacked) / static_cast<double>(ds.size());
  return r;
}

}  // namespace cutmixlab
