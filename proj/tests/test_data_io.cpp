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

#include <cstring>
#include <filesystem>
#include <fstream>

#include <png.h>

#include "cutmixlab/container.hpp"
#include "cutmixlab/data_io.hpp"
#include "cutmixlab/wsol.hpp"

using namespace cutmixlab;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("cutmixlab_test_data_io_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

bool bitwise_equal(const std::vector<float>& a, const std::vector<float>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

}  // namespace

TEST(Cifar10, OneRecordAllWhite) {
  std::vector<std::uint8_t> rec(kCifarRecordBytes, 255);
  rec[0] = 3;
  const auto ds = parse_cifar10(rec);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds.classes[0], 3);
  EXPECT_EQ(ds.labels.at(0, 3), 1.0f);
  EXPECT_EQ(ds.images.shape(), (Shape4{1, 3, 32, 32}));
  for (float v : ds.images.vec()) ASSERT_EQ(v, 1.0f);
  EXPECT_EQ(ds.class_names.size(), 10u);
}

TEST(Cifar10, PlaneOrderIsRgbRowMajor) {
  std::vector<std::uint8_t> rec(kCifarRecordBytes, 0);
  rec[0] = 0;
  rec[1 + 1024 + 32 * 2 + 5] = 51;  // G plane, row 2, column 5
  const auto ds = parse_cifar10(rec);
  EXPECT_FLOAT_EQ(ds.images.at(0, 1, 2, 5), 0.2f);
}

TEST(Cifar10, Errors) {
  EXPECT_THROW(parse_cifar10(std::vector<std::uint8_t>{}), ValidationError);
  std::vector<std::uint8_t> truncated(kCifarRecordBytes + 100, 0);
  try {
    parse_cifar10(truncated);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("byte offset 3073"), std::string::npos) << e.what();
  }
  std::vector<std::uint8_t> bad_label(2 * kCifarRecordBytes, 0);
  bad_label[kCifarRecordBytes] = 10;
  EXPECT_THROW(parse_cifar10(bad_label), FormatError);
}

TEST(Cifar10, FilesConcatenateInOrder) {
  const auto d = temp_dir("cifar");
  std::vector<std::uint8_t> a(kCifarRecordBytes, 0), b(2 * kCifarRecordBytes, 0);
  a[0] = 7;
  b[0] = 1;
  b[kCifarRecordBytes] = 9;
  write_bytes(d / "a.bin", a);
  write_bytes(d / "b.bin", b);
  const std::vector<fs::path> files = {d / "a.bin", d / "b.bin"};
  const auto ds = load_cifar10_bin(files);
  EXPECT_EQ(ds.classes, (std::vector<int>{7, 1, 9}));
  EXPECT_EQ(ds.labels.n(), 3u);
  EXPECT_THROW(load_cifar10_bin(d / "missing.bin"), ValidationError);
}

TEST(PngDir, RoundTripThroughWritePng) {
  const auto d = temp_dir("png");
  ImageBatch imgs(2, 3, 4, 5);
  for (std::size_t i = 0; i < imgs.size(); ++i) imgs.vec()[i] = static_cast<float>((i * 37) % 256) / 255.0f;
  write_png(d / "cat" / "0.png", imgs, 0);
  write_png(d / "dog" / "0.png", imgs, 1);
  const auto ds = load_png_dir(d);
  EXPECT_EQ(ds.class_names, (std::vector<std::string>{"cat", "dog"}));
  EXPECT_EQ(ds.classes, (std::vector<int>{0, 1}));
  ASSERT_EQ(ds.images.shape(), imgs.shape());
  for (std::size_t i = 0; i < imgs.size(); ++i) ASSERT_NEAR(ds.images.vec()[i], imgs.vec()[i], 0.5 / 255.0 + 1e-7);
}

TEST(PngDir, RejectsNonRgb8) {
  const auto d = temp_dir("png_gray");
  fs::create_directories(d / "a");
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = 2;
  img.height = 2;
  img.format = PNG_FORMAT_GRAY;
  const std::uint8_t px[4] = {0, 64, 128, 255};
  ASSERT_TRUE(png_image_write_to_file(&img, (d / "a" / "g.png").string().c_str(), 0, px, 0, nullptr));
  EXPECT_THROW(load_png_dir(d), FormatError);
}

TEST(Normalization, ComputeAndApply) {
  Dataset ds;
  ds.images = ImageBatch(Shape4{2, 2, 1, 2}, {0.0f, 1.0f, 0.5f, 0.5f, 1.0f, 0.0f, 0.5f, 0.5f});
  const auto norm = compute_normalization(ds.images);
  EXPECT_FLOAT_EQ(norm.mean[0], 0.5f);
  EXPECT_FLOAT_EQ(norm.std[0], 0.5f);
  EXPECT_FLOAT_EQ(norm.mean[1], 0.5f);
  EXPECT_EQ(norm.std[1], 1.0f);  // zero variance guard
  apply_normalization(ds, norm);
  EXPECT_EQ(ds.images.at(0, 0, 0, 0), -1.0f);
  EXPECT_EQ(ds.images.at(0, 0, 0, 1), 1.0f);
  EXPECT_EQ(ds.images.at(0, 1, 0, 0), 0.0f);
  EXPECT_FLOAT_EQ(ds.input_lo, -1.0f);
  EXPECT_FLOAT_EQ(ds.input_hi, 1.0f);
  EXPECT_THROW(apply_normalization(ds, norm), ValidationError);
}

TEST(Synthetic, GroundTruthBoxMatchesRenderedForeground) {
  SyntheticShapeSpec spec;
  spec.n_per_class = 50;
  spec.noise_std = 0.0;
  RngStream rng(1, 0);
  const auto ds = gen_synthetic(spec, rng);
  ASSERT_EQ(ds.size(), 200u);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    ASSERT_EQ(ds.classes[i], static_cast<int>(i % 4));
    int x1 = 1000, y1 = 1000, x2 = -1, y2 = -1;
    for (std::size_t y = 0; y < 32; ++y) {
      for (std::size_t x = 0; x < 32; ++x) {
        if (ds.images.at(i, 0, y, x) != 0.0f) {
          x1 = std::min(x1, static_cast<int>(x));
          y1 = std::min(y1, static_cast<int>(y));
          x2 = std::max(x2, static_cast<int>(x) + 1);
          y2 = std::max(y2, static_cast<int>(y) + 1);
        }
      }
    }
    ASSERT_EQ(iou(ds.gt_boxes[i], BoxPx{x1, y1, x2, y2}), 1.0) << "sample " << i;
  }
}

TEST(Synthetic, DiskBoxGeometryAndZeroNoise) {
  const auto m = render_shape_mask(ShapeKind::disk, 32, 10, 12, 5);
  int x1 = 99, x2 = -1, y1 = 99, y2 = -1;
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      if (m[static_cast<std::size_t>(y * 32 + x)]) {
        x1 = std::min(x1, x);
        x2 = std::max(x2, x + 1);
        y1 = std::min(y1, y);
        y2 = std::max(y2, y + 1);
      }
    }
  }
  EXPECT_EQ((BoxPx{x1, y1, x2, y2}), (BoxPx{5, 7, 16, 18}));

  SyntheticShapeSpec spec;
  spec.n_per_class = 2;
  spec.noise_std = 0.0;
  RngStream rng(2, 0);
  const auto ds = gen_synthetic(spec, rng);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const BoxPx& b = ds.gt_boxes[i];
    for (std::size_t y = 0; y < 32; ++y) {
      for (std::size_t x = 0; x < 32; ++x) {
        if (!b.contains(static_cast<int>(x), static_cast<int>(y))) ASSERT_EQ(ds.images.at(i, 0, y, x), 0.0f);
      }
    }
  }
}

TEST(Synthetic, DeterministicAndValidated) {
  SyntheticShapeSpec spec;
  spec.n_per_class = 5;
  RngStream a(3, 0), b(3, 0);
  const auto da = gen_synthetic(spec, a), db = gen_synthetic(spec, b);
  EXPECT_TRUE(bitwise_equal(da.images.vec(), db.images.vec()));
  EXPECT_EQ(da.gt_boxes, db.gt_boxes);
  spec.max_scale = 16;
  EXPECT_THROW(gen_synthetic(spec, a), ValidationError);
}

TEST(Container, DatasetRoundTripIsBitwise) {
  const auto d = temp_dir("container");
  SyntheticShapeSpec spec;
  spec.n_per_class = 6;
  RngStream rng(4, 0);
  auto ds = gen_synthetic(spec, rng);
  apply_normalization(ds, compute_normalization(ds.images));
  ds.split = "val";
  ds.meta = {{"note", "fixture"}};
  save_dataset(ds, d / "ds.cml");
  const auto back = load_dataset(d / "ds.cml");
  EXPECT_TRUE(bitwise_equal(back.images.vec(), ds.images.vec()));
  EXPECT_TRUE(bitwise_equal(back.labels.vec(), ds.labels.vec()));
  EXPECT_EQ(back, ds);
}

TEST(Container, RejectsCorruptFiles) {
  const auto d = temp_dir("corrupt");
  write_bytes(d / "bad_magic.cml", {'x', 'm', 'l', '1', 0, 0, 0, 0});
  EXPECT_THROW(load_dataset(d / "bad_magic.cml"), FormatError);
  write_container(d / "model.cml", nlohmann::json{{"kind", "checkpoint"}}, std::vector<float>{});
  EXPECT_THROW(load_dataset(d / "model.cml"), FormatError);
  SyntheticShapeSpec spec;
  spec.n_per_class = 1;
  RngStream rng(5, 0);
  save_dataset(gen_synthetic(spec, rng), d / "ok.cml");
  const auto size = fs::file_size(d / "ok.cml");
  fs::resize_file(d / "ok.cml", size - 4);
  EXPECT_THROW(load_dataset(d / "ok.cml"), FormatError);
}

TEST(DatasetType, ValidateAndSubset) {
  SyntheticShapeSpec spec;
  spec.n_per_class = 3;
  RngStream rng(6, 0);
  const auto ds = gen_synthetic(spec, rng);
  EXPECT_NO_THROW(ds.validate());
  const std::vector<std::size_t> idx = {5, 0};
  const auto sub = ds.subset(idx);
  EXPECT_EQ(sub.classes, (std::vector<int>{ds.classes[5], ds.classes[0]}));
  EXPECT_EQ(sub.images.sample(0).data[7], ds.images.sample(5).data[7]);
  EXPECT_EQ(sub.gt_boxes[1], ds.gt_boxes[0]);
  auto broken = ds;
  broken.classes.pop_back();
  EXPECT_THROW(broken.validate(), ShapeError);
}
