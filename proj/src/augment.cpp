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

#include "cutmixlab/augment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

namespace cutmixlab {

namespace {

constexpr std::array<std::pair<Method, std::string_view>, 10> kMethodNames = {{
    {Method::none, "none"},
    {Method::mixup, "mixup"},
    {Method::cutout, "cutout"},
    {Method::cutmix, "cutmix"},
    {Method::cutmix_center_gaussian, "cutmix_center_gaussian"},
    {Method::cutmix_fixed_size, "cutmix_fixed_size"},
    {Method::cutmix_scheduled, "cutmix_scheduled"},
    {Method::cutmix_onehot, "cutmix_onehot"},
    {Method::cutmix_complete_label, "cutmix_complete_label"},
    {Method::feature_cutmix, "feature_cutmix"},
}};

void check_batch(const ImageBatch& images, const SoftLabelBatch& labels) {
  require(images.n() > 0, "augmentation requires a non-empty batch");
  if (images.n() != labels.n()) {
    throw ShapeError("batch has " + std::to_string(images.n()) + " images but " +
                     std::to_string(labels.n()) + " labels");
  }
}

// Box and lambda for one box-mix draw under the given variant.
BoxDraw draw_variant_box(const AugmentConfig& cfg, int width, int height, RngStream& rng) {
  switch (cfg.method) {
    case Method::cutmix_fixed_size: {
      const double side = cfg.fixed_box;
      const double cx = rng.uniform() * width;
      const double cy = rng.uniform() * height;
      BoxDraw d;
      d.width = width;
      d.height = height;
      d.lambda_raw = 1.0 - side * side / (static_cast<double>(width) * height);
      d.center_x = cx;
      d.center_y = cy;
      d.box = box_from_center(cx, cy, side, side, width, height);
      d.lambda_adj = exact_area_lambda(d.box, width, height);
      return d;
    }
    case Method::cutmix_center_gaussian: {
      const double lambda = sample_lambda(cfg.alpha, rng);
      return sample_box_center_gaussian(lambda, width, height, cfg.center_sigma_frac, rng);
    }
    default: {
      const double lambda = sample_lambda(cfg.alpha, rng);
      return sample_box(lambda, width, height, rng);
    }
  }
}

MixRecord record_from(std::size_t partner, const BoxDraw& d) {
  return MixRecord{partner, d.lambda_raw, d.box, d.lambda_adj};
}

}  // namespace

std::string_view to_string(Method m) {
  for (const auto& [method, name] : kMethodNames) {
    if (method == m) return name;
  }
  throw ValidationError("unknown augmentation method value " + std::to_string(static_cast<int>(m)));
}

Method parse_method(std::string_view name) {
  for (const auto& [method, n] : kMethodNames) {
    if (n == name) return method;
  }
  throw ValidationError("unknown augmentation method '" + std::string(name) + "'");
}

bool is_box_mix(Method m) {
  switch (m) {
    case Method::cutmix:
    case Method::cutmix_center_gaussian:
    case Method::cutmix_fixed_size:
    case Method::cutmix_scheduled:
    case Method::cutmix_onehot:
    case Method::cutmix_complete_label:
    case Method::feature_cutmix:
      return true;
    default:
      return false;
  }
}

std::string_view to_string(Schedule s) {
  return s == Schedule::constant ? "constant" : "linear_0_to_1";
}

Schedule parse_schedule(std::string_view name) {
  if (name == "constant") return Schedule::constant;
  if (name == "linear_0_to_1") return Schedule::linear_0_to_1;
  throw ValidationError("unknown schedule '" + std::string(name) + "'");
}

void AugmentConfig::validate() const {
  (void)to_string(method);
  require(alpha > 0.0, "alpha must be positive");
  require(apply_prob >= 0.0 && apply_prob <= 1.0, "apply_prob must lie in [0,1]");
  require(cutout_hole >= 0, "cutout_hole must be >= 0");
  require(fixed_box >= 0, "fixed_box must be >= 0");
  require(center_sigma_frac > 0.0, "center_sigma_frac must be positive");
  if (method == Method::feature_cutmix) {
    require(!feature_layer_set.empty(), "feature_layer_set must be non-empty");
    for (int l : feature_layer_set) require(l >= 0, "feature layer indices must be >= 0");
  }
}

MixPlan MixPlan::identity(std::size_t n, int width, int height) {
  MixPlan plan;
  plan.width = width;
  plan.height = height;
  plan.records.resize(n);
  for (std::size_t i = 0; i < n; ++i) plan.records[i].partner = i;
  return plan;
}

std::vector<float> apply_variant_label_rule(Method variant, double lambda_adj,
                                            std::span<const float> label_i,
                                            std::span<const float> label_j) {
  if (label_i.size() != label_j.size()) throw ShapeError("label widths differ");
  require(lambda_adj >= 0.0 && lambda_adj <= 1.0, "lambda_adj must lie in [0,1]");
  double w = lambda_adj;
  switch (variant) {
    case Method::cutmix_onehot:
      w = lambda_adj >= 0.5 ? 1.0 : 0.0;
      break;
    case Method::cutmix_complete_label:
      w = 0.5;
      break;
    case Method::mixup:
    case Method::cutmix:
    case Method::cutmix_center_gaussian:
    case Method::cutmix_fixed_size:
    case Method::cutmix_scheduled:
    case Method::feature_cutmix:
      break;
    default:
      throw ValidationError("no label rule for method '" + std::string(to_string(variant)) + "'");
  }
  std::vector<float> out(label_i.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = static_cast<float>(w * label_i[k] + (1.0 - w) * label_j[k]);
  }
  return out;
}

double scheduled_apply_prob(int epoch, int total_epochs) {
  require(total_epochs >= 1 && epoch >= 0 && epoch < total_epochs,
          "scheduled_apply_prob requires 0 <= epoch < total_epochs");
  if (total_epochs == 1) return 1.0;
  return static_cast<double>(epoch) / static_cast<double>(total_epochs - 1);
}

MixPlan draw_box_plan(std::size_t n, int width, int height, double lambda, RngStream& rng) {
  require(width >= 1 && height >= 1, "box plan requires a non-empty spatial grid");
  MixPlan plan;
  plan.width = width;
  plan.height = height;
  const auto perm = shuffle_pairing(n, rng);
  const BoxDraw d = sample_box(lambda, width, height, rng);
  plan.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) plan.records.push_back(record_from(perm[i], d));
  return plan;
}

MixPlan draw_mix_plan(std::size_t n, int width, int height, const AugmentConfig& cfg,
                      RngStream& rng) {
  cfg.validate();
  require(n >= 1, "mix plan requires n >= 1");
  require(width >= 1 && height >= 1, "mix plan requires a non-empty spatial grid");
  if (cfg.method == Method::none) return MixPlan::identity(n, width, height);

  const double gate = rng.uniform();
  if (!(gate < cfg.apply_prob)) return MixPlan::identity(n, width, height);

  MixPlan plan;
  plan.width = width;
  plan.height = height;
  plan.records.resize(n);

  if (cfg.method == Method::cutout) {
    require(cfg.cutout_hole <= std::min(width, height), "cutout hole larger than image");
    for (std::size_t i = 0; i < n; ++i) {
      const double cx = rng.uniform() * width;
      const double cy = rng.uniform() * height;
      plan.records[i] = MixRecord{
          i, 1.0, box_from_center(cx, cy, cfg.cutout_hole, cfg.cutout_hole, width, height), 1.0};
    }
    return plan;
  }

  const auto perm = shuffle_pairing(n, rng);

  if (cfg.method == Method::mixup) {
    double lambda = sample_lambda(cfg.alpha, rng);
    for (std::size_t i = 0; i < n; ++i) {
      if (cfg.per_sample && i > 0) lambda = sample_lambda(cfg.alpha, rng);
      plan.records[i] = MixRecord{perm[i], lambda, std::nullopt, lambda};
    }
    return plan;
  }

  if (cfg.method == Method::cutmix_fixed_size) {
    require(cfg.fixed_box <= std::min(width, height), "fixed box larger than image");
  }
  BoxDraw d = draw_variant_box(cfg, width, height, rng);
  for (std::size_t i = 0; i < n; ++i) {
    if (cfg.per_sample && i > 0) d = draw_variant_box(cfg, width, height, rng);
    plan.records[i] = record_from(perm[i], d);
  }
  return plan;
}

SoftLabelBatch mix_labels(const SoftLabelBatch& labels, const MixPlan& plan, Method method) {
  if (plan.records.size() != labels.n()) throw ShapeError("plan size differs from label batch");
  if (method == Method::none || method == Method::cutout) return labels;
  SoftLabelBatch out(labels.n(), labels.k());
  for (std::size_t i = 0; i < labels.n(); ++i) {
    const MixRecord& r = plan.records[i];
    require(r.partner < labels.n(), "plan partner index out of range");
    const auto mixed = apply_variant_label_rule(method, r.lambda_adj, labels.row(i), labels.row(r.partner));
    std::copy(mixed.begin(), mixed.end(), out.row(i).begin());
  }
  return out;
}

AugmentResult apply_mix_plan(const ImageBatch& images, const SoftLabelBatch& labels,
                             const MixPlan& plan, Method method, float cutout_fill) {
  check_batch(images, labels);
  if (plan.records.size() != images.n()) throw ShapeError("plan size differs from batch size");
  if (plan.width != static_cast<int>(images.w()) || plan.height != static_cast<int>(images.h())) {
    throw ShapeError("plan geometry differs from image geometry");
  }
  AugmentResult res{images, SoftLabelBatch{}, plan};
  for (std::size_t i = 0; i < images.n(); ++i) {
    const MixRecord& r = plan.records[i];
    require(r.partner < images.n(), "plan partner index out of range");
    if (method == Method::mixup) {
      if (r.lambda_adj == 1.0) continue;
      auto dst = res.images.sample(i);
      auto a = images.sample(i);
      auto b = images.sample(r.partner);
      const double lam = r.lambda_adj;
      for (std::size_t p = 0; p < dst.data.size(); ++p) {
        dst.data[p] = lam == 0.0 ? b.data[p]
                                 : static_cast<float>(lam * a.data[p] + (1.0 - lam) * b.data[p]);
      }
    } else if (method == Method::cutout) {
      if (r.box) fill_region(res.images.sample(i), *r.box, cutout_fill);
    } else if (method != Method::none) {
      // Sources are read from the unmodified input batch.
      if (r.box) paste_region(res.images.sample(i), images.sample(r.partner), *r.box);
    }
  }
  res.labels = mix_labels(labels, plan, method);
  return res;
}

AugmentResult cutmix_batch(const ImageBatch& images, const SoftLabelBatch& labels,
                           const AugmentConfig& cfg, RngStream& rng) {
  check_batch(images, labels);
  AugmentConfig box_cfg = cfg;
  if (!is_box_mix(box_cfg.method)) box_cfg.method = Method::cutmix;
  const MixPlan plan = draw_mix_plan(images.n(), static_cast<int>(images.w()),
                                     static_cast<int>(images.h()), box_cfg, rng);
  return apply_mix_plan(images, labels, plan, box_cfg.method);
}

AugmentResult mixup_batch(const ImageBatch& images, const SoftLabelBatch& labels,
                          const AugmentConfig& cfg, RngStream& rng) {
  check_batch(images, labels);
  AugmentConfig c = cfg;
  c.method = Method::mixup;
  const MixPlan plan = draw_mix_plan(images.n(), static_cast<int>(images.w()),
                                     static_cast<int>(images.h()), c, rng);
  return apply_mix_plan(images, labels, plan, Method::mixup);
}

AugmentResult cutout_batch(const ImageBatch& images, const SoftLabelBatch& labels,
                           const AugmentConfig& cfg, RngStream& rng) {
  check_batch(images, labels);
  AugmentConfig c = cfg;
  c.method = Method::cutout;
  const MixPlan plan = draw_mix_plan(images.n(), static_cast<int>(images.w()),
                                     static_cast<int>(images.h()), c, rng);
  return apply_mix_plan(images, labels, plan, Method::cutout, cfg.cutout_fill);
}

AugmentResult feature_cutmix(const ImageBatch& features, const SoftLabelBatch& labels,
                             double lambda, RngStream& rng) {
  check_batch(features, labels);
  require(features.h() * features.w() > 0, "feature map has no spatial extent");
  const MixPlan plan = draw_box_plan(features.n(), static_cast<int>(features.w()),
                                     static_cast<int>(features.h()), lambda, rng);
  return apply_mix_plan(features, labels, plan, Method::feature_cutmix);
}

int choose_feature_layer(const AugmentConfig& cfg, RngStream& rng) {
  require(!cfg.feature_layer_set.empty(), "feature_layer_set must be non-empty");
  if (cfg.feature_layer_set.size() == 1) return cfg.feature_layer_set.front();
  return cfg.feature_layer_set[rng.below(cfg.feature_layer_set.size())];
}

AugmentResult augment_batch(const ImageBatch& images, const SoftLabelBatch& labels,
                            const AugmentConfig& cfg, RngStream& rng) {
  check_batch(images, labels);
  switch (cfg.method) {
    case Method::none:
      return AugmentResult{images, labels,
                           MixPlan::identity(images.n(), static_cast<int>(images.w()),
                                             static_cast<int>(images.h()))};
    case Method::mixup:
      return mixup_batch(images, labels, cfg, rng);
    case Method::cutout:
      return cutout_batch(images, labels, cfg, rng);
    default:
      return cutmix_batch(images, labels, cfg, rng);
  }
}

}  // namespace cutmixlab
