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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cutmixlab/rng.hpp"
#include "cutmixlab/tensor.hpp"

namespace cutmixlab {

/// Per-channel affine map x -> (x - mean) / std. Empty vectors mean identity.
struct Normalization {
  std::vector<float> mean;
  std::vector<float> std;

  bool empty() const { return mean.empty(); }
  friend bool operator==(const Normalization&, const Normalization&) = default;
};

struct Dataset {
  ImageBatch images;
  /// Soft targets; one-hot for freshly ingested data.
  SoftLabelBatch labels;
  /// Ground-truth class per sample (the base sample's class for mixed data).
  std::vector<int> classes;
  std::vector<std::string> class_names;
  std::string split = "train";
  Normalization normalization;
  /// Bounds of valid model inputs after normalization, over all channels.
  float input_lo = 0.0f;
  float input_hi = 1.0f;
  /// Tight object boxes in pixel coordinates; empty when unknown.
  std::vector<BoxPx> gt_boxes;
  /// Free-form provenance stored in the container header (e.g. a mix plan).
  nlohmann::json meta = nlohmann::json::object();

  std::size_t size() const { return images.n(); }
  std::size_t num_classes() const { return class_names.size(); }
  void validate() const;
  Dataset subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// ---------------------------------------------------------------------------
// CIFAR-10 binary

inline constexpr std::size_t kCifarRecordBytes = 3073;
std::vector<std::string> cifar10_class_names();

/// Parses CIFAR-10 records into [0,1] pixels and one-hot labels.
Dataset parse_cifar10(std::span<const std::uint8_t> bytes, const std::string& source = "<memory>");
/// Reads and concatenates record files in the given order (no normalization).
Dataset load_cifar10_bin(std::span<const std::filesystem::path> paths);
Dataset load_cifar10_bin(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// PNG directories: one subdirectory per class, sorted by name.

Dataset load_png_dir(const std::filesystem::path& root);
/// 8-bit RGB PNG of sample i, pixel values clamped from [0,1].
void write_png(const std::filesystem::path& path, const ImageBatch& images, std::size_t i);

// ---------------------------------------------------------------------------
// Normalization

/// Per-channel mean and population std; channels with std below 1e-8 use 1.
Normalization compute_normalization(const ImageBatch& images);
/// Applies `norm` and records it with the resulting input range. Requires an
/// un-normalized dataset with raw pixels in [0,1].
void apply_normalization(Dataset& ds, const Normalization& norm);
/// Maps raw [0,1] pixels through `norm` without touching any dataset.
ImageBatch normalize_images(const ImageBatch& raw, const Normalization& norm);

// ---------------------------------------------------------------------------
// Synthetic shapes

enum class ShapeKind { disk, square, triangle, cross };
inline constexpr int kShapeKinds = 4;
std::string shape_name(ShapeKind k);

struct SyntheticShapeSpec {
  int n_per_class = 400;
  int size = 32;
  int channels = 3;
  /// Half-extent r of the shape; the tight box is (2r+1) pixels wide.
  int min_scale = 5;
  int max_scale = 12;
  double noise_std = 0.1;

  void validate() const;
  friend bool operator==(const SyntheticShapeSpec&, const SyntheticShapeSpec&) = default;
};

/// Foreground mask of a shape centered at integer (cx, cy); row-major size x size.
std::vector<std::uint8_t> render_shape_mask(ShapeKind kind, int size, int cx, int cy, int r);

/// One shape per image at a random center and scale, on a N(0, noise_std)
/// background; samples are interleaved by class. Not normalized.
Dataset gen_synthetic(const SyntheticShapeSpec& spec, RngStream& rng);

// ---------------------------------------------------------------------------
// Native container

void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace cutmixlab
