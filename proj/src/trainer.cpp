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

#include "cutmixlab/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "cutmixlab/errors.hpp"
#include "cutmixlab/rng.hpp"
#include "cutmixlab/sampler.hpp"

namespace cutmixlab {

void TrainConfig::validate() const {
  require(epochs >= 0, "epochs must be >= 0");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(lr >= 0.0 && std::isfinite(lr), "lr must be finite and >= 0");
  require(momentum >= 0.0 && momentum < 1.0, "momentum must lie in [0,1)");
  require(weight_decay >= 0.0, "weight_decay must be >= 0");
  require(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0, "lr_decay_factor must lie in (0,1]");
  for (std::size_t i = 0; i < lr_milestones.size(); ++i) {
    require(lr_milestones[i] >= 0 && lr_milestones[i] < epochs, "lr milestones must lie in [0, epochs)");
    if (i > 0) require(lr_milestones[i] > lr_milestones[i - 1], "lr milestones must be strictly increasing");
  }
  require(eval_every >= 1, "eval_every must be >= 1");
  augment.validate();
}

double TrainConfig::lr_at(int epoch) const {
  double r = lr;
  for (int m : lr_milestones) {
    if (epoch >= m) r *= lr_decay_factor;
  }
  return r;
}

std::optional<double> TrainLog::best_val_top1() const {
  std::optional<double> best;
  for (const auto& r : records) {
    if (r.val_top1 && (!best || *r.val_top1 < *best)) best = r.val_top1;
  }
  return best;
}

std::optional<double> TrainLog::final_val_top1() const {
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    if (it->val_top1) return it->val_top1;
  }
  return std::nullopt;
}

namespace {

std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(9);
  os << v;
  return os.str();
}

}  // namespace

std::string TrainLog::to_csv() const {
  std::string out = "epoch,train_loss,val_top1,lr,apply_prob\n";
  for (const auto& r : records) {
    out += std::to_string(r.epoch) + "," + fmt_num(r.train_loss) + "," + (r.val_top1 ? fmt_num(*r.val_top1) : "") +
           "," + fmt_num(r.lr) + "," + fmt_num(r.apply_prob) + "\n";
  }
  return out;
}

unsigned worker_threads() {
  if (const char* env = std::getenv("CUTMIXLAB_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return 1;
}

Logits predict_batched(const Model& model, const ImageBatch& images, std::size_t chunk) {
  require(chunk >= 1, "chunk must be >= 1");
  const std::size_t n = images.n();
  const std::size_t K = static_cast<std::size_t>(model.spec().classes);
  Logits out(n, K);
  const std::size_t chunks = (n + chunk - 1) / chunk;
  auto work = [&](std::size_t c) {
    const std::size_t first = c * chunk, count = std::min(chunk, n - first);
    const auto z = model.predict(images.slice(first, count));
    std::copy(z.data.begin(), z.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(first * K));
  };
  const unsigned threads = std::min<std::size_t>(worker_threads(), chunks);
  if (threads <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) work(c);
    return out;
  }
  // Each chunk writes a disjoint slice, so the result does not depend on scheduling.
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t c = t; c < chunks; c += threads) work(c);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

double top1_error(const Logits& logits, std::span<const int> classes) {
  require(logits.rows > 0, "top-1 error of an empty set is undefined");
  if (classes.size() != logits.rows) throw ShapeError("class count differs from logit rows");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < logits.rows; ++i) {
    const auto row = logits.row(i);
    const auto pred = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    wrong += pred != classes[i];
  }
  return static_cast<double>(wrong) / static_cast<double>(logits.rows);
}

double evaluate_top1(const Model& model, const ImageBatch& images, std::span<const int> classes) {
  require(images.n() > 0, "cannot evaluate on an empty dataset");
  return top1_error(predict_batched(model, images), classes);
}

double evaluate_top1(const Model& model, const Dataset& ds) { return evaluate_top1(model, ds.images, ds.classes); }

namespace {

struct Batch {
  ImageBatch images;
  SoftLabelBatch labels;
};

Batch gather(const Dataset& ds, std::span<const std::size_t> idx) {
  Batch b{ImageBatch(idx.size(), ds.images.c(), ds.images.h(), ds.images.w()), SoftLabelBatch(idx.size(), ds.labels.k())};
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const auto src = ds.images.sample(idx[j]).data;
    std::copy(src.begin(), src.end(), b.images.sample(j).data.begin());
    const auto row = ds.labels.row(idx[j]);
    std::copy(row.begin(), row.end(), b.labels.row(j).begin());
  }
  return b;
}

bool is_scheduled(const AugmentConfig& a) {
  return a.method == Method::cutmix_scheduled || a.schedule == Schedule::linear_0_to_1;
}

}  // namespace

TrainLog train(Model& model, const Dataset& train_set, const Dataset* val, const TrainConfig& cfg,
               const EpochCallback& on_epoch) {
  cfg.validate();
  require(train_set.size() > 0, "training set is empty");
  train_set.validate();
  const ToyCnnSpec& spec = model.spec();
  if (train_set.images.c() != static_cast<std::size_t>(spec.in_channels) ||
      train_set.images.h() != static_cast<std::size_t>(spec.in_height) ||
      train_set.images.w() != static_cast<std::size_t>(spec.in_width)) {
    throw ShapeError("training images " + to_string(train_set.images.shape()) + " do not match model input " +
                     to_string(spec.layer_shape(0)));
  }
  if (train_set.labels.k() != static_cast<std::size_t>(spec.classes)) {
    throw ShapeError("dataset has " + std::to_string(train_set.labels.k()) + " classes, model has " +
                     std::to_string(spec.classes));
  }
  if (cfg.augment.method == Method::feature_cutmix) {
    for (int l : cfg.augment.feature_layer_set) {
      require(l <= spec.num_stages(), "feature layer " + std::to_string(l) + " exceeds model depth");
    }
  }

  TrainLog log;
  const std::size_t n = train_set.size();
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    RngStream order_rng(cfg.seed, stream_id(StreamPurpose::epoch_order, static_cast<std::uint64_t>(epoch)));
    const auto order = shuffle_pairing(n, order_rng);
    AugmentConfig acfg = cfg.augment;
    if (is_scheduled(acfg)) acfg.apply_prob = scheduled_apply_prob(epoch, cfg.epochs);
    const double lr = cfg.lr_at(epoch);

    double loss_sum = 0.0;
    std::uint64_t batch_index = 0;
    for (std::size_t first = 0; first < n; first += bs, ++batch_index) {
      const std::size_t count = std::min(bs, n - first);
      const Batch b = gather(train_set, std::span<const std::size_t>(order).subspan(first, count));
      RngStream aug_rng(cfg.seed, stream_id(StreamPurpose::augment,
                                            (static_cast<std::uint64_t>(epoch) << 24) | batch_index));

      ForwardResult<float> fwd;
      SoftLabelBatch targets;
      if (acfg.method == Method::feature_cutmix) {
        const int layer = choose_feature_layer(acfg, aug_rng);
        const Shape4 ls = spec.layer_shape(layer);
        const MixPlan plan =
            draw_mix_plan(count, static_cast<int>(ls.w), static_cast<int>(ls.h), acfg, aug_rng);
        FeatureMix fm;
        fm.layer = layer;
        for (const auto& r : plan.records) {
          fm.partner.push_back(r.partner);
          fm.box.push_back(r.box.value_or(BoxPx{}));
        }
        fwd = model.forward(b.images, std::nullopt, &fm);
        targets = mix_labels(b.labels, plan, Method::feature_cutmix);
      } else {
        AugmentResult aug = augment_batch(b.images, b.labels, acfg, aug_rng);
        fwd = model.forward(aug.images);
        targets = std::move(aug.labels);
      }
      const auto loss = soft_cross_entropy(fwd.logits, targets);
      if (!std::isfinite(loss.loss)) {
        throw NumericError("non-finite training loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index) + " (lr " + fmt_num(lr) + ")");
      }
      const auto grads = model.backward(loss.dlogits);
      model.sgd_step(grads, lr, cfg.momentum, cfg.weight_decay);
      loss_sum += loss.loss * static_cast<double>(count);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(n);
    rec.lr = lr;
    rec.apply_prob = acfg.method == Method::none ? 0.0 : acfg.apply_prob;
    if (val && ((epoch + 1) % cfg.eval_every == 0 || epoch + 1 == cfg.epochs)) {
      rec.val_top1 = evaluate_top1(model, *val);
    }
    log.records.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return log;
}

}  // namespace cutmixlab
