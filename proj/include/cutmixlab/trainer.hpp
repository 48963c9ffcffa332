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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cutmixlab/augment.hpp"
#include "cutmixlab/data_io.hpp"
#include "cutmixlab/nn.hpp"

namespace cutmixlab {

struct TrainConfig {
  int epochs = 30;
  int batch_size = 64;
  double lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  /// Epochs at which the learning rate is multiplied by lr_decay_factor.
  std::vector<int> lr_milestones;
  double lr_decay_factor = 0.1;
  std::uint64_t seed = 0;
  AugmentConfig augment;
  int eval_every = 1;

  void validate() const;
  double lr_at(int epoch) const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  /// Clean validation top-1 error; absent on epochs without evaluation.
  std::optional<double> val_top1;
  double lr = 0.0;
  double apply_prob = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> records;

  /// Minimum validation error over the logged epochs.
  std::optional<double> best_val_top1() const;
  std::optional<double> final_val_top1() const;
  /// epoch,train_loss,val_top1,lr,apply_prob
  std::string to_csv() const;
};

/// Called after each epoch; used for progress output.
using EpochCallback = std::function<void(const EpochRecord&)>;

/// Runs minibatch SGD with the configured augmentation. `val` may be null.
/// Deterministic given cfg.seed.
TrainLog train(Model& model, const Dataset& train_set, const Dataset* val, const TrainConfig& cfg,
               const EpochCallback& on_epoch = {});

/// Fraction of samples whose argmax logit differs from the class; ties go to the lower index.
double top1_error(const Logits& logits, std::span<const int> classes);
double evaluate_top1(const Model& model, const ImageBatch& images, std::span<const int> classes);
double evaluate_top1(const Model& model, const Dataset& ds);

/// Logits for a large batch, evaluated in chunks (optionally on worker threads).
Logits predict_batched(const Model& model, const ImageBatch& images, std::size_t chunk = 256);

/// Worker threads allowed by CUTMIXLAB_THREADS (default 1).
unsigned worker_threads();

}  // namespace cutmixlab
