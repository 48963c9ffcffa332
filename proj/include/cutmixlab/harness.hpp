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
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cutmixlab/data_io.hpp"
#include "cutmixlab/nn.hpp"
#include "cutmixlab/trainer.hpp"

namespace cutmixlab {

inline constexpr int kConfigSchemaVersion = 1;

enum class EvalKind { wsol, fgsm, occlusion, inbetween, ood };

std::string_view to_string(EvalKind k);
EvalKind parse_eval_kind(std::string_view name);

enum class DataSourceKind { synthetic, container, cifar10, png_dir };

std::string_view to_string(DataSourceKind k);
DataSourceKind parse_data_source_kind(std::string_view name);

/// Where the train/val splits come from. Synthetic data is generated from the
/// first experiment seed; file sources are read as-is. Raw [0,1] sources are
/// normalized with the training-split statistics.
struct DataSource {
  DataSourceKind kind = DataSourceKind::synthetic;
  SyntheticShapeSpec synthetic;
  int val_per_class = 100;
  std::vector<std::filesystem::path> train_paths;
  std::vector<std::filesystem::path> val_paths;
  bool normalize = true;

  friend bool operator==(const DataSource&, const DataSource&) = default;
};

struct EvalSettings {
  double sigma = 0.15;
  bool wsol_use_gt_class = false;
  /// In model-input units (after normalization).
  double epsilon = 8.0 / 255.0;
  std::vector<double> occlusion_sizes = {0, 4, 8, 12, 16, 20, 24, 28, 32};
  std::size_t inbetween_pairs = 400;
  std::vector<double> mixup_lambdas = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<double> cutmix_sizes = {0, 4, 8, 12, 16, 20, 24, 28, 32};
  std::vector<std::string> ood = {"uniform", "gaussian"};
  std::size_t ood_count = 1000;

  friend bool operator==(const EvalSettings&, const EvalSettings&) = default;
};

struct ExperimentConfig {
  std::string name = "experiment";
  DataSource dataset;
  std::vector<ConvStage> stages = ToyCnnSpec{}.stages;
  TrainConfig train;
  std::vector<EvalKind> eval;
  EvalSettings eval_settings;
  std::filesystem::path out_dir = "runs/experiment";
  std::vector<std::uint64_t> seeds = {0};

  /// Structural checks plus existence of every referenced path.
  void validate() const;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

nlohmann::json to_json(const AugmentConfig& c);
AugmentConfig augment_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);
/// Missing keys take defaults; unknown keys and wrong schema versions are rejected.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Train and validation splits ready for the model (normalized, bounded).
struct ExperimentData {
  Dataset train;
  Dataset val;
};

ExperimentData load_experiment_data(const DataSource& src, std::uint64_t seed);
ToyCnnSpec model_spec_for(const ExperimentConfig& cfg, const Dataset& train);

/// Evaluations of one trained model; each writes JSON (and CSV for sweeps)
/// into `dir` and returns the JSON.
nlohmann::json run_wsol_eval(const Model& m, const Dataset& val, const EvalSettings& s, const std::filesystem::path& dir);
nlohmann::json run_fgsm_eval(const Model& m, const Dataset& val, const EvalSettings& s, const std::filesystem::path& dir);
nlohmann::json run_occlusion_eval(const Model& m, const Dataset& val, const EvalSettings& s,
                                  const std::filesystem::path& dir);
nlohmann::json run_inbetween_eval(const Model& m, const Dataset& val, const EvalSettings& s, std::uint64_t seed,
                                  const std::filesystem::path& dir);
/// Each entry of s.ood is "uniform", "gaussian" or a dataset path.
nlohmann::json run_ood_eval(const Model& m, const Dataset& val, const EvalSettings& s, std::uint64_t seed,
                            const std::filesystem::path& dir);

using ProgressFn = std::function<void(const std::string&)>;

/// Trains one model per seed and runs the configured evaluations. Writes
/// config.json and seed_<s>/ {train_log.csv, train_log.json, model.ckpt,
/// <eval>.json, sweep CSVs} under cfg.out_dir.
void run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress = {});

/// Aggregates a run directory into <run>/report: summary.json (keys: train
/// plus one per configured evaluation) and one CSV per curve. Returns the summary.
nlohmann::json emit_report(const std::filesystem::path& run_dir);

/// Parses argv and runs a subcommand. 0 success, 1 validation or usage error,
/// 2 runtime failure.
int cli_dispatch(int argc, const char* const* argv);

}  // namespace cutmixlab
