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

#include "cutmixlab/harness.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "cutmixlab/container.hpp"
#include "cutmixlab/errors.hpp"
#include "cutmixlab/robustness.hpp"
#include "cutmixlab/uncertainty.hpp"
#include "cutmixlab/wsol.hpp"

namespace cutmixlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(9);
  os << v;
  return os.str();
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
  require(j.is_object(), std::string(where) + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ValidationError("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (const auto it = j.find(key); it != j.end()) out = it->template get<T>();
}

std::vector<fs::path> read_paths(const json& j, const char* key) {
  std::vector<fs::path> out;
  if (const auto it = j.find(key); it != j.end()) {
    for (const auto& s : it->get<std::vector<std::string>>()) out.emplace_back(s);
  }
  return out;
}

json paths_json(const std::vector<fs::path>& ps) {
  json a = json::array();
  for (const auto& p : ps) a.push_back(p.generic_string());
  return a;
}

bool is_noise_name(const std::string& s) { return s == "uniform" || s == "gaussian"; }

std::string seed_dir_name(std::uint64_t seed) { return "seed_" + std::to_string(seed); }

void write_json_file(const fs::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

json read_json_file(const fs::path& path) {
  if (!fs::exists(path)) throw FormatError("missing required file: " + path.string());
  try {
    return json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void maybe_write(const fs::path& dir, const std::string& name, const std::string& text) {
  if (!dir.empty()) write_text_file(dir / name, text);
}

}  // namespace

// ---------------------------------------------------------------------------
// Enumerations

std::string_view to_string(EvalKind k) {
  switch (k) {
    case EvalKind::wsol: return "wsol";
    case EvalKind::fgsm: return "fgsm";
    case EvalKind::occlusion: return "occlusion";
    case EvalKind::inbetween: return "inbetween";
    case EvalKind::ood: return "ood";
  }
  return "?";
}

EvalKind parse_eval_kind(std::string_view name) {
  for (EvalKind k : {EvalKind::wsol, EvalKind::fgsm, EvalKind::occlusion, EvalKind::inbetween, EvalKind::ood}) {
    if (to_string(k) == name) return k;
  }
  throw ValidationError("unknown evaluation '" + std::string(name) + "'");
}

std::string_view to_string(DataSourceKind k) {
  switch (k) {
    case DataSourceKind::synthetic: return "synthetic";
    case DataSourceKind::container: return "container";
    case DataSourceKind::cifar10: return "cifar10";
    case DataSourceKind::png_dir: return "png_dir";
  }
  return "?";
}

DataSourceKind parse_data_source_kind(std::string_view name) {
  for (DataSourceKind k :
       {DataSourceKind::synthetic, DataSourceKind::container, DataSourceKind::cifar10, DataSourceKind::png_dir}) {
    if (to_string(k) == name) return k;
  }
  throw ValidationError("unknown dataset kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Config serialization

json to_json(const AugmentConfig& c) {
  return {{"method", to_string(c.method)},
          {"alpha", c.alpha},
          {"cutout_hole", c.cutout_hole},
          {"cutout_fill", c.cutout_fill},
          {"fixed_box", c.fixed_box},
          {"apply_prob", c.apply_prob},
          {"schedule", to_string(c.schedule)},
          {"feature_layer_set", c.feature_layer_set},
          {"center_sigma_frac", c.center_sigma_frac},
          {"per_sample", c.per_sample}};
}

AugmentConfig augment_config_from_json(const json& j) {
  check_keys(j,
             {"method", "alpha", "cutout_hole", "cutout_fill", "fixed_box", "apply_prob", "schedule",
              "feature_layer_set", "center_sigma_frac", "per_sample"},
             "augment");
  AugmentConfig c;
  if (j.contains("method")) c.method = parse_method(j.at("method").get<std::string>());
  if (j.contains("schedule")) c.schedule = parse_schedule(j.at("schedule").get<std::string>());
  read_opt(j, "alpha", c.alpha);
  read_opt(j, "cutout_hole", c.cutout_hole);
  read_opt(j, "cutout_fill", c.cutout_fill);
  read_opt(j, "fixed_box", c.fixed_box);
  read_opt(j, "apply_prob", c.apply_prob);
  read_opt(j, "feature_layer_set", c.feature_layer_set);
  read_opt(j, "center_sigma_frac", c.center_sigma_frac);
  read_opt(j, "per_sample", c.per_sample);
  return c;
}

json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"lr", c.lr},
          {"momentum", c.momentum},
          {"weight_decay", c.weight_decay},
          {"lr_milestones", c.lr_milestones},
          {"lr_decay_factor", c.lr_decay_factor},
          {"seed", c.seed},
          {"augment", to_json(c.augment)},
          {"eval_every", c.eval_every}};
}

TrainConfig train_config_from_json(const json& j) {
  check_keys(j,
             {"epochs", "batch_size", "lr", "momentum", "weight_decay", "lr_milestones", "lr_decay_factor", "seed",
              "augment", "eval_every"},
             "train");
  TrainConfig c;
  read_opt(j, "epochs", c.epochs);
  read_opt(j, "batch_size", c.batch_size);
  read_opt(j, "lr", c.lr);
  read_opt(j, "momentum", c.momentum);
  read_opt(j, "weight_decay", c.weight_decay);
  read_opt(j, "lr_milestones", c.lr_milestones);
  read_opt(j, "lr_decay_factor", c.lr_decay_factor);
  read_opt(j, "seed", c.seed);
  read_opt(j, "eval_every", c.eval_every);
  if (j.contains("augment")) c.augment = augment_config_from_json(j.at("augment"));
  return c;
}

json to_json(const ExperimentConfig& c) {
  const auto& syn = c.dataset.synthetic;
  json stages = json::array();
  for (const auto& s : c.stages) stages.push_back({s.out_channels, s.stride});
  json eval = json::array();
  for (EvalKind k : c.eval) eval.push_back(to_string(k));
  const auto& es = c.eval_settings;
  return {
      {"schema_version", kConfigSchemaVersion},
      {"name", c.name},
      {"dataset",
       {{"kind", to_string(c.dataset.kind)},
        {"synthetic",
         {{"n_per_class", syn.n_per_class},
          {"size", syn.size},
          {"channels", syn.channels},
          {"min_scale", syn.min_scale},
          {"max_scale", syn.max_scale},
          {"noise_std", syn.noise_std}}},
        {"val_per_class", c.dataset.val_per_class},
        {"train", paths_json(c.dataset.train_paths)},
        {"val", paths_json(c.dataset.val_paths)},
        {"normalize", c.dataset.normalize}}},
      {"model", {{"stages", stages}}},
      {"train", to_json(c.train)},
      {"eval", eval},
      {"eval_settings",
       {{"sigma", es.sigma},
        {"wsol_use_gt_class", es.wsol_use_gt_class},
        {"epsilon", es.epsilon},
        {"occlusion_sizes", es.occlusion_sizes},
        {"inbetween_pairs", es.inbetween_pairs},
        {"mixup_lambdas", es.mixup_lambdas},
        {"cutmix_sizes", es.cutmix_sizes},
        {"ood", es.ood},
        {"ood_count", es.ood_count}}},
      {"out_dir", c.out_dir.generic_string()},
      {"seeds", c.seeds},
  };
}

ExperimentConfig experiment_config_from_json(const json& j) {
  try {
    check_keys(j, {"schema_version", "name", "dataset", "model", "train", "eval", "eval_settings", "out_dir", "seeds"},
               "experiment config");
    require(j.contains("schema_version"), "experiment config needs a schema_version");
    const int version = j.at("schema_version").get<int>();
    require(version == kConfigSchemaVersion, "unsupported schema_version " + std::to_string(version) +
                                                 " (expected " + std::to_string(kConfigSchemaVersion) + ")");
    ExperimentConfig c;
    read_opt(j, "name", c.name);
    if (j.contains("dataset")) {
      const auto& d = j.at("dataset");
      check_keys(d, {"kind", "synthetic", "val_per_class", "train", "val", "normalize"}, "dataset");
      if (d.contains("kind")) c.dataset.kind = parse_data_source_kind(d.at("kind").get<std::string>());
      if (d.contains("synthetic")) {
        const auto& s = d.at("synthetic");
        check_keys(s, {"n_per_class", "size", "channels", "min_scale", "max_scale", "noise_std"}, "dataset.synthetic");
        auto& syn = c.dataset.synthetic;
        read_opt(s, "n_per_class", syn.n_per_class);
        read_opt(s, "size", syn.size);
        read_opt(s, "channels", syn.channels);
        read_opt(s, "min_scale", syn.min_scale);
        read_opt(s, "max_scale", syn.max_scale);
        read_opt(s, "noise_std", syn.noise_std);
      }
      read_opt(d, "val_per_class", c.dataset.val_per_class);
      read_opt(d, "normalize", c.dataset.normalize);
      c.dataset.train_paths = read_paths(d, "train");
      c.dataset.val_paths = read_paths(d, "val");
    }
    if (j.contains("model")) {
      const auto& m = j.at("model");
      check_keys(m, {"stages"}, "model");
      if (m.contains("stages")) {
        c.stages.clear();
        for (const auto& s : m.at("stages")) {
          require(s.is_array() && s.size() == 2, "model.stages entries are [out_channels, stride]");
          c.stages.push_back({s.at(0).get<int>(), s.at(1).get<int>()});
        }
      }
    }
    if (j.contains("train")) c.train = train_config_from_json(j.at("train"));
    if (j.contains("eval")) {
      for (const auto& e : j.at("eval")) c.eval.push_back(parse_eval_kind(e.get<std::string>()));
    }
    if (j.contains("eval_settings")) {
      const auto& e = j.at("eval_settings");
      check_keys(e,
                 {"sigma", "wsol_use_gt_class", "epsilon", "occlusion_sizes", "inbetween_pairs", "mixup_lambdas",
                  "cutmix_sizes", "ood", "ood_count"},
                 "eval_settings");
      auto& es = c.eval_settings;
      read_opt(e, "sigma", es.sigma);
      read_opt(e, "wsol_use_gt_class", es.wsol_use_gt_class);
      read_opt(e, "epsilon", es.epsilon);
      read_opt(e, "occlusion_sizes", es.occlusion_sizes);
      read_opt(e, "inbetween_pairs", es.inbetween_pairs);
      read_opt(e, "mixup_lambdas", es.mixup_lambdas);
      read_opt(e, "cutmix_sizes", es.cutmix_sizes);
      read_opt(e, "ood", es.ood);
      read_opt(e, "ood_count", es.ood_count);
    }
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
    read_opt(j, "seeds", c.seeds);
    return c;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed experiment config: ") + e.what());
  }
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  if (!fs::exists(path)) throw ValidationError("config file not found: " + path.string());
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return experiment_config_from_json(j);
}

void ExperimentConfig::validate() const {
  require(!seeds.empty(), "seeds must be non-empty");
  require(std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() == seeds.size(), "seeds must be distinct");
  require(!out_dir.empty(), "out_dir must be set");
  require(!stages.empty(), "model needs at least one conv stage for CAM");
  train.validate();
  for (int l : train.augment.feature_layer_set) {
    require(l >= 0 && l <= static_cast<int>(stages.size()),
            "feature layer " + std::to_string(l) + " outside [0, " + std::to_string(stages.size()) + "]");
  }
  require(std::set<EvalKind>(eval.begin(), eval.end()).size() == eval.size(), "eval list has duplicates");

  auto need_paths = [](const std::vector<fs::path>& ps, const char* what) {
    require(!ps.empty(), std::string("dataset.") + what + " needs at least one path");
    for (const auto& p : ps) require(fs::exists(p), std::string("dataset.") + what + " path not found: " + p.string());
  };
  switch (dataset.kind) {
    case DataSourceKind::synthetic:
      dataset.synthetic.validate();
      require(dataset.val_per_class >= 1, "val_per_class must be >= 1");
      break;
    case DataSourceKind::cifar10:
      need_paths(dataset.train_paths, "train");
      need_paths(dataset.val_paths, "val");
      break;
    case DataSourceKind::container:
    case DataSourceKind::png_dir:
      need_paths(dataset.train_paths, "train");
      need_paths(dataset.val_paths, "val");
      require(dataset.train_paths.size() == 1 && dataset.val_paths.size() == 1,
              "container and png_dir sources take exactly one train and one val path");
      break;
  }

  const auto& es = eval_settings;
  require(es.sigma > 0.0 && es.sigma < 1.0, "sigma must lie in (0,1)");
  require(es.epsilon >= 0.0 && std::isfinite(es.epsilon), "epsilon must be finite and >= 0");
  require(es.inbetween_pairs >= 1, "inbetween_pairs must be >= 1");
  require(es.ood_count >= 1, "ood_count must be >= 1");
  for (const auto& o : es.ood) {
    require(is_noise_name(o) || fs::exists(o), "OOD source is neither a noise kind nor an existing file: " + o);
  }
  if (std::find(eval.begin(), eval.end(), EvalKind::ood) != eval.end()) {
    require(!es.ood.empty(), "ood evaluation needs at least one OOD source");
  }
}

// ---------------------------------------------------------------------------
// Data

ExperimentData load_experiment_data(const DataSource& src, std::uint64_t seed) {
  ExperimentData d;
  switch (src.kind) {
    case DataSourceKind::synthetic: {
      RngStream train_rng(seed, stream_id(StreamPurpose::data, 0));
      RngStream val_rng(seed, stream_id(StreamPurpose::data, 1));
      SyntheticShapeSpec val_spec = src.synthetic;
      val_spec.n_per_class = src.val_per_class;
      d.train = gen_synthetic(src.synthetic, train_rng);
      d.val = gen_synthetic(val_spec, val_rng);
      break;
    }
    case DataSourceKind::container:
      require(src.train_paths.size() == 1 && src.val_paths.size() == 1, "container source takes one path per split");
      d.train = load_dataset(src.train_paths.front());
      d.val = load_dataset(src.val_paths.front());
      break;
    case DataSourceKind::cifar10:
      d.train = load_cifar10_bin(src.train_paths);
      d.val = load_cifar10_bin(src.val_paths);
      break;
    case DataSourceKind::png_dir:
      require(src.train_paths.size() == 1 && src.val_paths.size() == 1, "png_dir source takes one path per split");
      d.train = load_png_dir(src.train_paths.front());
      d.val = load_png_dir(src.val_paths.front());
      break;
  }
  d.train.split = "train";
  d.val.split = "val";
  require(d.train.normalization == d.val.normalization, "train and val splits use different normalizations");
  if (src.normalize && d.train.normalization.empty()) {
    const Normalization norm = compute_normalization(d.train.images);
    apply_normalization(d.train, norm);
    apply_normalization(d.val, norm);
  }
  d.train.validate();
  d.val.validate();
  if (d.train.class_names != d.val.class_names) throw ShapeError("train and val class lists differ");
  if (d.train.images.c() != d.val.images.c() || d.train.images.h() != d.val.images.h() ||
      d.train.images.w() != d.val.images.w()) {
    throw ShapeError("train and val image geometry differs");
  }
  return d;
}

ToyCnnSpec model_spec_for(const ExperimentConfig& cfg, const Dataset& train) {
  ToyCnnSpec s;
  s.in_channels = static_cast<int>(train.images.c());
  s.in_height = static_cast<int>(train.images.h());
  s.in_width = static_cast<int>(train.images.w());
  s.classes = static_cast<int>(train.num_classes());
  s.stages = cfg.stages;
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Evaluations

namespace {

void check_model_matches(const Model& m, const Dataset& ds) {
  const auto& s = m.spec();
  if (static_cast<std::size_t>(s.in_channels) != ds.images.c() ||
      static_cast<std::size_t>(s.in_height) != ds.images.h() || static_cast<std::size_t>(s.in_width) != ds.images.w() ||
      static_cast<std::size_t>(s.classes) != ds.num_classes()) {
    throw ShapeError("model expects " + std::to_string(s.in_channels) + "x" + std::to_string(s.in_height) + "x" +
                     std::to_string(s.in_width) + " inputs with " + std::to_string(s.classes) +
                     " classes; dataset does not match");
  }
}

}  // namespace

json run_wsol_eval(const Model& m, const Dataset& val, const EvalSettings& s, const fs::path& dir) {
  check_model_matches(m, val);
  require(val.gt_boxes.size() == val.size(), "WSOL evaluation needs ground-truth boxes for every sample");
  WsolConfig cfg;
  cfg.sigma = s.sigma;
  cfg.use_gt_class = s.wsol_use_gt_class;
  json j = evaluate_wsol(m, val, cfg).to_json();
  j["sigma"] = s.sigma;
  maybe_write(dir, "wsol.json", j.dump(2) + "\n");
  return j;
}

json run_fgsm_eval(const Model& m, const Dataset& val, const EvalSettings& s, const fs::path& dir) {
  check_model_matches(m, val);
  AttackConfig cfg;
  cfg.epsilon = s.epsilon;
  cfg.lo = val.input_lo;
  cfg.hi = val.input_hi;
  json j = evaluate_fgsm(m, val, cfg).to_json();
  maybe_write(dir, "fgsm.json", j.dump(2) + "\n");
  return j;
}

json run_occlusion_eval(const Model& m, const Dataset& val, const EvalSettings& s, const fs::path& dir) {
  check_model_matches(m, val);
  const auto center = sweep_occlusion(m, val, OcclusionKind::center, s.occlusion_sizes);
  const auto boundary = sweep_occlusion(m, val, OcclusionKind::boundary, s.occlusion_sizes);
  maybe_write(dir, "occlusion_center.csv", center.to_csv());
  maybe_write(dir, "occlusion_boundary.csv", boundary.to_csv());
  json j = {{"center", center.to_json()}, {"boundary", boundary.to_json()}};
  maybe_write(dir, "occlusion.json", j.dump(2) + "\n");
  return j;
}

json run_inbetween_eval(const Model& m, const Dataset& val, const EvalSettings& s, std::uint64_t seed,
                        const fs::path& dir) {
  check_model_matches(m, val);
  RngStream rng(seed, stream_id(StreamPurpose::eval_pairs, 0));
  const auto pairs = make_inbetween_pairs(val, s.inbetween_pairs, rng);
  const auto mix = sweep_inbetween(m, val, pairs, InbetweenKind::mixup, s.mixup_lambdas);
  const auto cut = sweep_inbetween(m, val, pairs, InbetweenKind::cutmix_center, s.cutmix_sizes);
  maybe_write(dir, "inbetween_mixup.csv", mix.to_csv());
  maybe_write(dir, "inbetween_mixup_neither.csv", mix.neither_csv());
  maybe_write(dir, "inbetween_cutmix_center.csv", cut.to_csv());
  maybe_write(dir, "inbetween_cutmix_center_neither.csv", cut.neither_csv());
  json j = {{"pairs", pairs.size()}, {"mixup", mix.to_json()}, {"cutmix_center", cut.to_json()}};
  maybe_write(dir, "inbetween.json", j.dump(2) + "\n");
  return j;
}

json run_ood_eval(const Model& m, const Dataset& val, const EvalSettings& s, std::uint64_t seed, const fs::path& dir) {
  check_model_matches(m, val);
  require(!s.ood.empty(), "no OOD sources given");
  const auto in_scores = msp_score(predict_batched(m, val.images));
  json metrics = json::array();
  for (std::size_t i = 0; i < s.ood.size(); ++i) {
    const std::string& src = s.ood[i];
    ImageBatch out;
    std::string name = src;
    if (is_noise_name(src)) {
      RngStream rng(seed, stream_id(StreamPurpose::ood, i));
      out = make_noise_ood(parse_noise_kind(src), s.ood_count, val.images.c(), val.images.h(), val.images.w(), 0.0f,
                           1.0f, rng);
      if (!val.normalization.empty()) out = normalize_images(out, val.normalization);
    } else {
      const Dataset ood = load_dataset(src);
      if (ood.images.c() != val.images.c() || ood.images.h() != val.images.h() || ood.images.w() != val.images.w()) {
        throw ShapeError("OOD dataset " + src + " has a different image geometry");
      }
      out = (ood.normalization.empty() && !val.normalization.empty()) ? normalize_images(ood.images, val.normalization)
                                                                       : ood.images;
      name = fs::path(src).stem().string();
    }
    ScoreSet set{in_scores, msp_score(predict_batched(m, out))};
    metrics.push_back(ood_metrics(set, name).to_json());
  }
  json j = {{"in_count", in_scores.size()}, {"metrics", metrics}};
  maybe_write(dir, "ood.json", j.dump(2) + "\n");
  return j;
}

// ---------------------------------------------------------------------------
// Experiment driver

namespace {

json train_log_json(const TrainLog& log) {
  json recs = json::array();
  for (const auto& r : log.records) {
    recs.push_back({{"epoch", r.epoch},
                    {"train_loss", r.train_loss},
                    {"val_top1", r.val_top1 ? json(*r.val_top1) : json(nullptr)},
                    {"lr", r.lr},
                    {"apply_prob", r.apply_prob}});
  }
  const auto best = log.best_val_top1(), fin = log.final_val_top1();
  return {{"records", recs},
          {"best_val_top1", best ? json(*best) : json(nullptr)},
          {"final_val_top1", fin ? json(*fin) : json(nullptr)}};
}

}  // namespace

void run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  auto say = [&](const std::string& msg) {
    if (progress) progress(msg);
  };
  fs::create_directories(cfg.out_dir);
  write_json_file(cfg.out_dir / "config.json", to_json(cfg));

  const ExperimentData data = load_experiment_data(cfg.dataset, cfg.seeds.front());
  const ToyCnnSpec spec = model_spec_for(cfg, data.train);
  say("data: " + std::to_string(data.train.size()) + " train, " + std::to_string(data.val.size()) + " val");

  for (std::uint64_t seed : cfg.seeds) {
    const fs::path dir = cfg.out_dir / seed_dir_name(seed);
    fs::create_directories(dir);
    TrainConfig tc = cfg.train;
    tc.seed = seed;
    Model model(spec, seed);
    const TrainLog log = train(model, data.train, &data.val, tc, [&](const EpochRecord& r) {
      say("seed " + std::to_string(seed) + " epoch " + std::to_string(r.epoch) + " loss " + fmt_num(r.train_loss) +
          (r.val_top1 ? " val_top1 " + fmt_num(*r.val_top1) : std::string()));
    });
    write_text_file(dir / "train_log.csv", log.to_csv());
    write_json_file(dir / "train_log.json", train_log_json(log));
    save_checkpoint(model, dir / "model.ckpt");

    for (EvalKind k : cfg.eval) {
      say("seed " + std::to_string(seed) + " eval " + std::string(to_string(k)));
      switch (k) {
        case EvalKind::wsol: run_wsol_eval(model, data.val, cfg.eval_settings, dir); break;
        case EvalKind::fgsm: run_fgsm_eval(model, data.val, cfg.eval_settings, dir); break;
        case EvalKind::occlusion: run_occlusion_eval(model, data.val, cfg.eval_settings, dir); break;
        case EvalKind::inbetween: run_inbetween_eval(model, data.val, cfg.eval_settings, seed, dir); break;
        case EvalKind::ood: run_ood_eval(model, data.val, cfg.eval_settings, seed, dir); break;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Report

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

/// Column-per-seed table with a trailing mean column.
struct SeedTable {
  std::string key_name;
  std::vector<double> keys;
  std::vector<std::vector<double>> columns;  // one per seed

  std::string to_csv(const std::vector<std::uint64_t>& seeds) const {
    std::string out = key_name;
    for (auto s : seeds) out += ",seed_" + std::to_string(s);
    out += ",mean\n";
    for (std::size_t r = 0; r < keys.size(); ++r) {
      out += fmt_num(keys[r]);
      std::vector<double> row;
      for (const auto& col : columns) {
        out += "," + fmt_num(col[r]);
        row.push_back(col[r]);
      }
      out += "," + fmt_num(mean_of(row)) + "\n";
    }
    return out;
  }

  std::vector<double> means() const {
    std::vector<double> m;
    for (std::size_t r = 0; r < keys.size(); ++r) {
      std::vector<double> row;
      for (const auto& col : columns) row.push_back(col[r]);
      m.push_back(mean_of(row));
    }
    return m;
  }
};

/// Builds a table from per-seed sweep JSON; every seed must use the same params.
SeedTable sweep_table(const std::vector<json>& sweeps, const char* field, const fs::path& source) {
  SeedTable t{"param", {}, {}};
  for (std::size_t s = 0; s < sweeps.size(); ++s) {
    std::vector<double> params, values;
    for (const auto& p : sweeps[s].at("points")) {
      params.push_back(p.at("param").get<double>());
      values.push_back(p.at(field).get<double>());
    }
    if (s == 0) {
      t.keys = params;
    } else if (params != t.keys) {
      throw FormatError(source.string() + ": sweep parameters differ between seeds");
    }
    t.columns.push_back(std::move(values));
  }
  return t;
}

}  // namespace

json emit_report(const fs::path& run_dir) {
  const fs::path config_path = run_dir / "config.json";
  const ExperimentConfig cfg = experiment_config_from_json(read_json_file(config_path));
  const fs::path out = run_dir / "report";
  fs::create_directories(out);

  std::vector<json> logs;
  std::map<EvalKind, std::vector<json>> evals;
  for (auto seed : cfg.seeds) {
    const fs::path dir = run_dir / seed_dir_name(seed);
    logs.push_back(read_json_file(dir / "train_log.json"));
    for (EvalKind k : cfg.eval) evals[k].push_back(read_json_file(dir / (std::string(to_string(k)) + ".json")));
  }

  json summary = json::object();
  try {
    // Training curves: validation error and loss per epoch.
    SeedTable val{"epoch", {}, {}}, loss{"epoch", {}, {}};
    json per_seed = json::array();
    std::vector<double> finals, bests;
    for (std::size_t s = 0; s < logs.size(); ++s) {
      const auto& recs = logs[s].at("records");
      std::vector<double> epochs_with_val, vals, epochs, losses;
      for (const auto& r : recs) {
        epochs.push_back(r.at("epoch").get<double>());
        losses.push_back(r.at("train_loss").get<double>());
        if (!r.at("val_top1").is_null()) {
          epochs_with_val.push_back(r.at("epoch").get<double>());
          vals.push_back(r.at("val_top1").get<double>());
        }
      }
      if (s == 0) {
        val.keys = epochs_with_val;
        loss.keys = epochs;
      }
      val.columns.push_back(vals);
      loss.columns.push_back(losses);
      json entry = {{"seed", cfg.seeds[s]},
                    {"final_val_top1", logs[s].at("final_val_top1")},
                    {"best_val_top1", logs[s].at("best_val_top1")},
                    {"final_train_loss", losses.empty() ? json(nullptr) : json(losses.back())}};
      if (!logs[s].at("final_val_top1").is_null()) finals.push_back(logs[s].at("final_val_top1").get<double>());
      if (!logs[s].at("best_val_top1").is_null()) bests.push_back(logs[s].at("best_val_top1").get<double>());
      per_seed.push_back(entry);
    }
    write_text_file(out / "train_val_top1.csv", val.to_csv(cfg.seeds));
    write_text_file(out / "train_loss.csv", loss.to_csv(cfg.seeds));
    summary["train"] = {{"name", cfg.name},
                        {"method", to_string(cfg.train.augment.method)},
                        {"epochs", cfg.train.epochs},
                        {"seeds", cfg.seeds},
                        {"per_seed", per_seed},
                        {"mean_final_val_top1", finals.size() == cfg.seeds.size() ? json(mean_of(finals)) : json(nullptr)},
                        {"mean_best_val_top1", bests.size() == cfg.seeds.size() ? json(mean_of(bests)) : json(nullptr)}};

    for (EvalKind k : cfg.eval) {
      const auto& rows = evals[k];
      json per = json::array();
      for (std::size_t s = 0; s < rows.size(); ++s) {
        json e = rows[s];
        e["seed"] = cfg.seeds[s];
        per.push_back(e);
      }
      auto mean_field = [&](const char* f) {
        std::vector<double> v;
        for (const auto& r : rows) v.push_back(r.at(f).get<double>());
        return mean_of(v);
      };
      switch (k) {
        case EvalKind::wsol:
          summary["wsol"] = {{"sigma", cfg.eval_settings.sigma},
                             {"per_seed", per},
                             {"mean_loc_acc", mean_field("loc_acc")},
                             {"mean_cls_acc", mean_field("cls_acc")},
                             {"mean_iou", mean_field("mean_iou")}};
          break;
        case EvalKind::fgsm:
          summary["fgsm"] = {{"epsilon", cfg.eval_settings.epsilon},
                             {"per_seed", per},
                             {"mean_clean_acc", mean_field("clean_acc")},
                             {"mean_attacked_acc", mean_field("attacked_acc")}};
          break;
        case EvalKind::occlusion: {
          json sec = json::object();
          for (const char* part : {"center", "boundary"}) {
            std::vector<json> sweeps;
            for (const auto& r : rows) sweeps.push_back(r.at(part));
            const auto t = sweep_table(sweeps, "top1_err", run_dir);
            write_text_file(out / ("occlusion_" + std::string(part) + ".csv"), t.to_csv(cfg.seeds));
            sec[part] = {{"param", t.keys}, {"mean_top1_err", t.means()}};
          }
          summary["occlusion"] = sec;
          break;
        }
        case EvalKind::inbetween: {
          json sec = json::object();
          for (const char* part : {"mixup", "cutmix_center"}) {
            std::vector<json> sweeps;
            for (const auto& r : rows) sweeps.push_back(r.at(part));
            const auto err = sweep_table(sweeps, "top1_err", run_dir);
            const auto nei = sweep_table(sweeps, "neither_rate", run_dir);
            write_text_file(out / ("inbetween_" + std::string(part) + ".csv"), err.to_csv(cfg.seeds));
            write_text_file(out / ("inbetween_" + std::string(part) + "_neither.csv"), nei.to_csv(cfg.seeds));
            sec[part] = {{"param", err.keys}, {"mean_top1_err", err.means()}, {"mean_neither_rate", nei.means()}};
          }
          summary["inbetween"] = sec;
          break;
        }
        case EvalKind::ood: {
          json means = json::array();
          const auto& first = rows.front().at("metrics");
          for (std::size_t i = 0; i < first.size(); ++i) {
            std::vector<double> tnr, au, det;
            for (const auto& r : rows) {
              const auto& m = r.at("metrics").at(i);
              tnr.push_back(m.at("tnr_at_tpr95").get<double>());
              au.push_back(m.at("auroc").get<double>());
              det.push_back(m.at("detection_acc").get<double>());
            }
            means.push_back({{"ood_name", first.at(i).at("ood_name")},
                             {"tnr_at_tpr95", mean_of(tnr)},
                             {"auroc", mean_of(au)},
                             {"detection_acc", mean_of(det)}});
          }
          summary["ood"] = {{"per_seed", per}, {"mean", means}};
          break;
        }
      }
    }
  } catch (const json::exception& e) {
    throw FormatError(run_dir.string() + ": malformed log: " + e.what());
  }
  write_json_file(out / "summary.json", summary);
  return summary;
}

// ---------------------------------------------------------------------------
// CLI

namespace {

Dataset load_eval_data(const std::string& path, const Model& m) {
  if (path.empty()) throw ValidationError("--in-data is required");
  if (!fs::exists(path)) throw ValidationError("dataset not found: " + path);
  Dataset ds = load_dataset(path);
  check_model_matches(m, ds);
  return ds;
}

Model load_model_arg(const std::string& path) {
  if (path.empty()) throw ValidationError("--model is required");
  if (!fs::exists(path)) throw ValidationError("model not found: " + path);
  return load_checkpoint(path);
}

json plan_json(const MixPlan& plan) {
  json recs = json::array();
  for (const auto& r : plan.records) {
    recs.push_back({{"partner", r.partner},
                    {"lambda_raw", r.lambda_raw},
                    {"box", r.box ? json::array({r.box->x1, r.box->y1, r.box->x2, r.box->y2}) : json(nullptr)},
                    {"lambda_adj", r.lambda_adj}});
  }
  return {{"width", plan.width}, {"height", plan.height}, {"records", recs}};
}

struct CliOptions {
  std::string config, out, method, dataset, model, in, in_data;
  std::vector<std::string> ood, train_paths, val_paths;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha, sigma, epsilon;
  std::optional<int> epochs, n_per_class, val_per_class;
};

/// Config from --config (or defaults) with command-line overrides applied.
ExperimentConfig resolve_config(const CliOptions& o) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_experiment_config(o.config);
  if (o.seed) c.seeds = {*o.seed};
  if (!o.out.empty()) c.out_dir = o.out;
  if (!o.method.empty()) c.train.augment.method = parse_method(o.method);
  if (o.alpha) c.train.augment.alpha = *o.alpha;
  if (o.epochs) c.train.epochs = *o.epochs;
  if (o.sigma) c.eval_settings.sigma = *o.sigma;
  if (o.epsilon) c.eval_settings.epsilon = *o.epsilon;
  if (!o.ood.empty()) c.eval_settings.ood = o.ood;
  if (!o.dataset.empty()) {
    if (o.dataset == "synthetic") {
      c.dataset.kind = DataSourceKind::synthetic;
    } else {
      c.dataset.kind = DataSourceKind::container;
      c.dataset.train_paths = {fs::path(o.dataset) / "train.cml"};
      c.dataset.val_paths = {fs::path(o.dataset) / "val.cml"};
    }
  }
  return c;
}

int cmd_gen_data(const CliOptions& o) {
  require(!o.out.empty(), "--out is required");
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_experiment_config(o.config);
  if (!o.dataset.empty()) c.dataset.kind = parse_data_source_kind(o.dataset);
  if (!o.train_paths.empty()) c.dataset.train_paths.assign(o.train_paths.begin(), o.train_paths.end());
  if (!o.val_paths.empty()) c.dataset.val_paths.assign(o.val_paths.begin(), o.val_paths.end());
  if (o.n_per_class) c.dataset.synthetic.n_per_class = *o.n_per_class;
  if (o.val_per_class) c.dataset.val_per_class = *o.val_per_class;
  if (o.seed) c.seeds = {*o.seed};
  c.out_dir = o.out;
  c.validate();
  const auto data = load_experiment_data(c.dataset, c.seeds.front());
  save_dataset(data.train, fs::path(o.out) / "train.cml");
  save_dataset(data.val, fs::path(o.out) / "val.cml");
  std::cout << json{{"train", (fs::path(o.out) / "train.cml").generic_string()},
                    {"val", (fs::path(o.out) / "val.cml").generic_string()},
                    {"train_size", data.train.size()},
                    {"val_size", data.val.size()}}
                   .dump(2)
            << "\n";
  return 0;
}

int cmd_augment(const CliOptions& o) {
  require(!o.in.empty(), "--in is required");
  require(!o.out.empty(), "--out is required");
  require(fs::exists(o.in), "input not found: " + o.in);
  Dataset ds = load_dataset(o.in);
  AugmentConfig cfg;
  cfg.method = o.method.empty() ? Method::cutmix : parse_method(o.method);
  if (o.alpha) cfg.alpha = *o.alpha;
  cfg.validate();
  const std::uint64_t seed = o.seed.value_or(0);
  RngStream rng(seed, stream_id(StreamPurpose::cli, 0));
  auto res = augment_batch(ds.images, ds.labels, cfg, rng);
  ds.images = std::move(res.images);
  ds.labels = std::move(res.labels);
  ds.meta["augment"] = {{"method", to_string(cfg.method)},
                        {"alpha", cfg.alpha},
                        {"seed", seed},
                        {"source", fs::path(o.in).generic_string()},
                        {"plan", plan_json(res.plan)}};
  save_dataset(ds, o.out);
  return 0;
}

int cmd_train(const CliOptions& o) {
  const auto cfg = resolve_config(o);
  run_experiment(cfg, [](const std::string& m) { std::cerr << m << "\n"; });
  std::cout << cfg.out_dir.generic_string() << "\n";
  return 0;
}

int cmd_eval_wsol(const CliOptions& o) {
  const Model m = load_model_arg(o.model);
  const Dataset ds = load_eval_data(o.in_data, m);
  EvalSettings s;
  if (o.sigma) s.sigma = *o.sigma;
  std::cout << run_wsol_eval(m, ds, s, o.out).dump(2) << "\n";
  return 0;
}

int cmd_eval_robust(const CliOptions& o) {
  const Model m = load_model_arg(o.model);
  const Dataset ds = load_eval_data(o.in_data, m);
  EvalSettings s;
  if (o.epsilon) s.epsilon = *o.epsilon;
  const std::uint64_t seed = o.seed.value_or(0);
  json j = {{"fgsm", run_fgsm_eval(m, ds, s, o.out)},
            {"occlusion", run_occlusion_eval(m, ds, s, o.out)},
            {"inbetween", run_inbetween_eval(m, ds, s, seed, o.out)}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_eval_ood(const CliOptions& o) {
  const Model m = load_model_arg(o.model);
  const Dataset ds = load_eval_data(o.in_data, m);
  EvalSettings s;
  if (!o.ood.empty()) s.ood = o.ood;
  for (const auto& src : s.ood) {
    require(is_noise_name(src) || fs::exists(src), "OOD source is neither a noise kind nor an existing file: " + src);
  }
  std::cout << run_ood_eval(m, ds, s, o.seed.value_or(0), o.out).dump(2) << "\n";
  return 0;
}

int cmd_report(const CliOptions& o) {
  fs::path run_dir;
  if (!o.in.empty()) {
    run_dir = o.in;
  } else {
    const auto cfg = resolve_config(o);
    run_experiment(cfg, [](const std::string& m) { std::cerr << m << "\n"; });
    run_dir = cfg.out_dir;
  }
  emit_report(run_dir);
  std::cout << (run_dir / "report" / "summary.json").generic_string() << "\n";
  return 0;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv) {
  CLI::App app{"cutmixlab: CutMix augmentation lab"};
  app.require_subcommand(1);
  CliOptions o;

  auto add_seed = [&](CLI::App* c) { c->add_option("--seed", o.seed, "Seed for all randomness"); };
  auto add_overrides = [&](CLI::App* c) {
    c->add_option("--config", o.config, "Experiment config (JSON)");
    add_seed(c);
    c->add_option("--out", o.out, "Output directory");
    c->add_option("--method", o.method, "Augmentation method");
    c->add_option("--alpha", o.alpha, "Beta(alpha, alpha) parameter");
    c->add_option("--epochs", o.epochs, "Training epochs");
    c->add_option("--dataset", o.dataset, "'synthetic' or a directory holding train.cml and val.cml");
    c->add_option("--ood", o.ood, "OOD sources: uniform, gaussian or dataset files");
    c->add_option("--sigma", o.sigma, "CAM binarization threshold (default 0.15)");
    c->add_option("--epsilon", o.epsilon, "FGSM step in model-input units (default 8/255)");
  };

  auto* gen = app.add_subcommand("gen-data", "Generate or ingest train/val splits into the native container");
  gen->add_option("--config", o.config, "Experiment config whose dataset block is used");
  gen->add_option("--dataset", o.dataset, "synthetic | container | cifar10 | png_dir");
  gen->add_option("--train", o.train_paths, "Training source files or directory");
  gen->add_option("--val", o.val_paths, "Validation source files or directory");
  gen->add_option("--n-per-class", o.n_per_class, "Synthetic training samples per class");
  gen->add_option("--val-per-class", o.val_per_class, "Synthetic validation samples per class");
  gen->add_option("--out", o.out, "Output directory")->required();
  add_seed(gen);

  auto* aug = app.add_subcommand("augment", "Augment a dataset as one batch and record the mix plan");
  aug->add_option("--method", o.method, "Augmentation method");
  aug->add_option("--alpha", o.alpha, "Beta(alpha, alpha) parameter");
  aug->add_option("--in", o.in, "Input dataset")->required();
  aug->add_option("--out", o.out, "Output dataset")->required();
  add_seed(aug);

  auto* tr = app.add_subcommand("train", "Train one model per seed and run the configured evaluations");
  add_overrides(tr);

  auto* ew = app.add_subcommand("eval-wsol", "CAM localization accuracy of a checkpoint");
  ew->add_option("--model", o.model, "Checkpoint")->required();
  ew->add_option("--in-data", o.in_data, "Dataset with ground-truth boxes")->required();
  ew->add_option("--sigma", o.sigma, "CAM binarization threshold (default 0.15)");
  ew->add_option("--out", o.out, "Directory for wsol.json");

  auto* er = app.add_subcommand("eval-robust", "FGSM, occlusion and in-between sweeps of a checkpoint");
  er->add_option("--model", o.model, "Checkpoint")->required();
  er->add_option("--in-data", o.in_data, "Evaluation dataset")->required();
  er->add_option("--epsilon", o.epsilon, "FGSM step in model-input units (default 8/255)");
  er->add_option("--out", o.out, "Directory for JSON and CSV output");
  add_seed(er);

  auto* eo = app.add_subcommand("eval-ood", "Max-softmax OOD detection metrics of a checkpoint");
  eo->add_option("--model", o.model, "Checkpoint")->required();
  eo->add_option("--in-data", o.in_data, "In-distribution dataset")->required();
  eo->add_option("--ood", o.ood, "OOD sources: uniform, gaussian or dataset files");
  eo->add_option("--out", o.out, "Directory for ood.json");
  add_seed(eo);

  auto* rp = app.add_subcommand("report", "Aggregate a run directory (or run a config first) into a report bundle");
  rp->add_option("--in", o.in, "Existing run directory");
  add_overrides(rp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e);
      return 0;
    }
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*gen) return cmd_gen_data(o);
    if (*aug) return cmd_augment(o);
    if (*tr) return cmd_train(o);
    if (*ew) return cmd_eval_wsol(o);
    if (*er) return cmd_eval_robust(o);
    if (*eo) return cmd_eval_ood(o);
    if (*rp) return cmd_report(o);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace cutmixlab
