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

#include "cutmixlab/data_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "cutmixlab/container.hpp"
#include "cutmixlab/errors.hpp"

namespace cutmixlab {

void Dataset::validate() const {
  const std::size_t n = images.n();
  if (labels.n() != n || classes.size() != n) {
    throw ShapeError("dataset has " + std::to_string(n) + " images, " + std::to_string(labels.n()) +
                     " label rows and " + std::to_string(classes.size()) + " classes");
  }
  require(!class_names.empty(), "dataset has no class names");
  if (labels.k() != class_names.size()) throw ShapeError("label width differs from class count");
  for (int c : classes) require(c >= 0 && static_cast<std::size_t>(c) < class_names.size(), "class index out of range");
  require(split == "train" || split == "val", "split must be train or val");
  if (!normalization.empty()) {
    require(normalization.mean.size() == images.c() && normalization.std.size() == images.c(),
            "normalization must have one entry per channel");
  }
  require(input_lo < input_hi, "input range must satisfy lo < hi");
  if (!gt_boxes.empty()) {
    require(gt_boxes.size() == n, "gt_boxes must be empty or one per sample");
    for (const auto& b : gt_boxes) {
      require(b.within(static_cast<int>(images.w()), static_cast<int>(images.h())), "gt box out of bounds");
    }
  }
  labels.validate(1e-5);
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.images = ImageBatch(indices.size(), images.c(), images.h(), images.w());
  out.labels = SoftLabelBatch(indices.size(), labels.k());
  for (std::size_t j = 0; j < indices.size(); ++j) {
    const std::size_t i = indices[j];
    require(i < size(), "subset index out of range");
    std::copy(images.sample(i).data.begin(), images.sample(i).data.end(), out.images.sample(j).data.begin());
    std::copy(labels.row(i).begin(), labels.row(i).end(), out.labels.row(j).begin());
    out.classes.push_back(classes[i]);
    if (!gt_boxes.empty()) out.gt_boxes.push_back(gt_boxes[i]);
  }
  out.class_names = class_names;
  out.split = split;
  out.normalization = normalization;
  out.input_lo = input_lo;
  out.input_hi = input_hi;
  return out;
}

// ---------------------------------------------------------------------------
// CIFAR-10

std::vector<std::string> cifar10_class_names() {
  return {"airplane", "automobile", "bird", "cat", "deer", "dog", "frog", "horse", "ship", "truck"};
}

Dataset parse_cifar10(std::span<const std::uint8_t> bytes, const std::string& source) {
  if (bytes.empty()) throw ValidationError(source + ": empty dataset");
  const std::size_t records = bytes.size() / kCifarRecordBytes;
  if (bytes.size() % kCifarRecordBytes != 0) {
    throw FormatError(source + ": truncated record at byte offset " + std::to_string(records * kCifarRecordBytes) +
                      " (file size " + std::to_string(bytes.size()) + " is not a multiple of 3073)");
  }
  Dataset ds;
  ds.images = ImageBatch(records, 3, 32, 32);
  ds.class_names = cifar10_class_names();
  ds.classes.resize(records);
  for (std::size_t r = 0; r < records; ++r) {
    const std::size_t off = r * kCifarRecordBytes;
    const int label = bytes[off];
    if (label > 9) {
      throw FormatError(source + ": label byte " + std::to_string(label) + " > 9 at byte offset " +
                        std::to_string(off));
    }
    ds.classes[r] = label;
    auto dst = ds.images.sample(r).data;
    for (std::size_t p = 0; p < 3072; ++p) dst[p] = static_cast<float>(bytes[off + 1 + p] / 255.0);
  }
  ds.labels = SoftLabelBatch::one_hot(ds.classes, 10);
  return ds;
}

namespace {

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void append(Dataset& into, const Dataset& more) {
  if (into.images.n() == 0) {
    into = more;
    return;
  }
  ImageBatch images(into.size() + more.size(), into.images.c(), into.images.h(), into.images.w());
  std::copy(into.images.vec().begin(), into.images.vec().end(), images.vec().begin());
  std::copy(more.images.vec().begin(), more.images.vec().end(),
            images.vec().begin() + static_cast<std::ptrdiff_t>(into.images.size()));
  into.images = std::move(images);
  into.classes.insert(into.classes.end(), more.classes.begin(), more.classes.end());
  into.labels = SoftLabelBatch::one_hot(into.classes, into.class_names.size());
}

}  // namespace

Dataset load_cifar10_bin(std::span<const std::filesystem::path> paths) {
  require(!paths.empty(), "no CIFAR-10 files given");
  Dataset ds;
  for (const auto& p : paths) append(ds, parse_cifar10(read_bytes(p), p.string()));
  return ds;
}

Dataset load_cifar10_bin(const std::filesystem::path& path) {
  const std::filesystem::path one[] = {path};
  return load_cifar10_bin(one);
}

// ---------------------------------------------------------------------------
// PNG

namespace {

struct PngImage {
  png_image img{};
  PngImage() {
    img.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&img); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

std::vector<std::uint8_t> read_png_rgb8(const std::filesystem::path& path, png_uint_32& w, png_uint_32& h) {
  PngImage p;
  if (!png_image_begin_read_from_file(&p.img, path.string().c_str())) {
    throw FormatError(path.string() + ": not a readable PNG (" + p.img.message + ")");
  }
  if (p.img.format != PNG_FORMAT_RGB) {
    throw FormatError(path.string() + ": only 8-bit RGB PNG is supported");
  }
  w = p.img.width;
  h = p.img.height;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(p.img));
  if (!png_image_finish_read(&p.img, nullptr, buf.data(), 0, nullptr)) {
    throw FormatError(path.string() + ": PNG decode failed (" + p.img.message + ")");
  }
  return buf;
}

}  // namespace

Dataset load_png_dir(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  require(fs::is_directory(root), "PNG root is not a directory: " + root.string());
  std::vector<fs::path> class_dirs;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory()) class_dirs.push_back(e.path());
  }
  std::sort(class_dirs.begin(), class_dirs.end());
  require(!class_dirs.empty(), "PNG root has no class subdirectories: " + root.string());

  Dataset ds;
  std::vector<float> pixels;
  png_uint_32 W = 0, H = 0;
  for (std::size_t c = 0; c < class_dirs.size(); ++c) {
    ds.class_names.push_back(class_dirs[c].filename().string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(class_dirs[c])) {
      if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      png_uint_32 w = 0, h = 0;
      const auto rgb = read_png_rgb8(f, w, h);
      if (ds.classes.empty()) {
        W = w;
        H = h;
      } else if (w != W || h != H) {
        throw FormatError(f.string() + ": size " + std::to_string(w) + "x" + std::to_string(h) +
                          " differs from " + std::to_string(W) + "x" + std::to_string(H));
      }
      // Interleaved RGB -> planar CHW.
      const std::size_t hw = static_cast<std::size_t>(w) * h;
      const std::size_t base = pixels.size();
      pixels.resize(base + 3 * hw);
      for (std::size_t p = 0; p < hw; ++p) {
        for (std::size_t ch = 0; ch < 3; ++ch) pixels[base + ch * hw + p] = static_cast<float>(rgb[p * 3 + ch] / 255.0);
      }
      ds.classes.push_back(static_cast<int>(c));
    }
  }
  require(!ds.classes.empty(), "PNG root contains no .png files: " + root.string());
  ds.images = ImageBatch(Shape4{ds.classes.size(), 3, H, W}, std::move(pixels));
  ds.labels = SoftLabelBatch::one_hot(ds.classes, ds.class_names.size());
  return ds;
}

void write_png(const std::filesystem::path& path, const ImageBatch& images, std::size_t i) {
  require(images.c() == 3, "write_png needs 3 channels");
  require(i < images.n(), "write_png sample index out of range");
  const std::size_t hw = images.h() * images.w();
  std::vector<std::uint8_t> rgb(hw * 3);
  const auto s = images.sample(i).data;
  for (std::size_t p = 0; p < hw; ++p) {
    for (std::size_t ch = 0; ch < 3; ++ch) {
      const double v = std::clamp(static_cast<double>(s[ch * hw + p]), 0.0, 1.0);
      rgb[p * 3 + ch] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  PngImage p;
  p.img.width = static_cast<png_uint_32>(images.w());
  p.img.height = static_cast<png_uint_32>(images.h());
  p.img.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&p.img, path.string().c_str(), 0, rgb.data(), 0, nullptr)) {
    throw std::runtime_error(path.string() + ": PNG write failed (" + p.img.message + ")");
  }
}

// ---------------------------------------------------------------------------
// Normalization

Normalization compute_normalization(const ImageBatch& images) {
  require(images.n() > 0, "cannot compute normalization of an empty batch");
  const std::size_t C = images.c(), HW = images.h() * images.w();
  Normalization norm;
  for (std::size_t c = 0; c < C; ++c) {
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < images.n(); ++i) {
      const float* p = images.data().data() + (i * C + c) * HW;
      for (std::size_t q = 0; q < HW; ++q) sum += p[q];
    }
    const double count = static_cast<double>(images.n() * HW);
    const double mean = sum / count;
    for (std::size_t i = 0; i < images.n(); ++i) {
      const float* p = images.data().data() + (i * C + c) * HW;
      for (std::size_t q = 0; q < HW; ++q) sq += (p[q] - mean) * (p[q] - mean);
    }
    const double sd = std::sqrt(sq / count);
    norm.mean.push_back(static_cast<float>(mean));
    norm.std.push_back(sd < 1e-8 ? 1.0f : static_cast<float>(sd));
  }
  return norm;
}

ImageBatch normalize_images(const ImageBatch& raw, const Normalization& norm) {
  if (norm.empty()) return raw;
  require(norm.mean.size() == raw.c() && norm.std.size() == raw.c(), "normalization channel count differs");
  ImageBatch out = raw;
  const std::size_t C = raw.c(), HW = raw.h() * raw.w();
  for (std::size_t i = 0; i < raw.n(); ++i) {
    for (std::size_t c = 0; c < C; ++c) {
      float* p = out.vec().data() + (i * C + c) * HW;
      const double m = norm.mean[c], s = norm.std[c];
      for (std::size_t q = 0; q < HW; ++q) p[q] = static_cast<float>((p[q] - m) / s);
    }
  }
  return out;
}

void apply_normalization(Dataset& ds, const Normalization& norm) {
  require(ds.normalization.empty(), "dataset is already normalized");
  if (norm.empty()) return;
  ds.images = normalize_images(ds.images, norm);
  ds.normalization = norm;
  double lo = 0.0, hi = 0.0;
  for (std::size_t c = 0; c < norm.mean.size(); ++c) {
    const double a = (0.0 - norm.mean[c]) / norm.std[c];
    const double b = (1.0 - norm.mean[c]) / norm.std[c];
    lo = c == 0 ? a : std::min(lo, a);
    hi = c == 0 ? b : std::max(hi, b);
  }
  ds.input_lo = static_cast<float>(lo);
  ds.input_hi = static_cast<float>(hi);
}

// ---------------------------------------------------------------------------
// Synthetic shapes

std::string shape_name(ShapeKind k) {
  switch (k) {
    case ShapeKind::disk: return "disk";
    case ShapeKind::square: return "square";
    case ShapeKind::triangle: return "triangle";
    case ShapeKind::cross: return "cross";
  }
  throw ValidationError("unknown shape kind");
}

void SyntheticShapeSpec::validate() const {
  require(n_per_class >= 1, "n_per_class must be >= 1");
  require(channels >= 1, "channels must be >= 1");
  require(min_scale >= 1 && max_scale >= min_scale, "shape scale range must satisfy 1 <= min <= max");
  require(2 * max_scale + 1 <= size, "shape scale " + std::to_string(max_scale) + " exceeds image size " +
                                         std::to_string(size));
  require(noise_std >= 0.0 && std::isfinite(noise_std), "noise_std must be finite and >= 0");
}

std::vector<std::uint8_t> render_shape_mask(ShapeKind kind, int size, int cx, int cy, int r) {
  require(r >= 1 && cx - r >= 0 && cy - r >= 0 && cx + r < size && cy + r < size, "shape does not fit the image");
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(size) * static_cast<std::size_t>(size), 0);
  const int t = std::max(1, r / 3);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const int dx = x - cx, dy = y - cy;
      bool in = false;
      switch (kind) {
        case ShapeKind::disk: in = dx * dx + dy * dy <= r * r; break;
        case ShapeKind::square: in = std::abs(dx) <= r && std::abs(dy) <= r; break;
        case ShapeKind::triangle: in = dy >= -r && dy <= r && 2 * std::abs(dx) <= dy + r; break;
        case ShapeKind::cross:
          in = (std::abs(dx) <= r && std::abs(dy) <= t) || (std::abs(dy) <= r && std::abs(dx) <= t);
          break;
      }
      mask[static_cast<std::size_t>(y * size + x)] = in ? 1 : 0;
    }
  }
  return mask;
}

Dataset gen_synthetic(const SyntheticShapeSpec& spec, RngStream& rng) {
  spec.validate();
  const std::size_t n = static_cast<std::size_t>(spec.n_per_class) * kShapeKinds;
  const auto S = static_cast<std::size_t>(spec.size), C = static_cast<std::size_t>(spec.channels);
  Dataset ds;
  ds.images = ImageBatch(n, C, S, S);
  for (int k = 0; k < kShapeKinds; ++k) ds.class_names.push_back(shape_name(static_cast<ShapeKind>(k)));
  for (std::size_t i = 0; i < n; ++i) {
    const int cls = static_cast<int>(i % kShapeKinds);
    const int r = spec.min_scale + static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.max_scale - spec.min_scale + 1)));
    const auto span = static_cast<std::uint64_t>(spec.size - 2 * r);
    const int cx = r + static_cast<int>(rng.below(span));
    const int cy = r + static_cast<int>(rng.below(span));
    std::vector<float> color(C);
    for (auto& v : color) v = static_cast<float>(0.5 + 0.5 * rng.uniform());
    const auto mask = render_shape_mask(static_cast<ShapeKind>(cls), spec.size, cx, cy, r);
    auto img = ds.images.sample(i);
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t p = 0; p < S * S; ++p) {
        float v = 0.0f;
        if (spec.noise_std > 0.0) v = static_cast<float>(std::clamp(spec.noise_std * rng.normal(), 0.0, 1.0));
        if (mask[p]) v = color[c];
        img.data[c * S * S + p] = v;
      }
    }
    ds.classes.push_back(cls);
    ds.gt_boxes.push_back(BoxPx{cx - r, cy - r, cx + r + 1, cy + r + 1});
  }
  ds.labels = SoftLabelBatch::one_hot(ds.classes, kShapeKinds);
  return ds;
}

// ---------------------------------------------------------------------------
// Container

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  ds.validate();
  nlohmann::json boxes = nlohmann::json::array();
  for (const auto& b : ds.gt_boxes) boxes.push_back({b.x1, b.y1, b.x2, b.y2});
  const Shape4 s = ds.images.shape();
  const nlohmann::json header = {
      {"kind", "dataset"},
      {"shape", {s.n, s.c, s.h, s.w}},
      {"num_classes", ds.labels.k()},
      {"class_names", ds.class_names},
      {"classes", ds.classes},
      {"split", ds.split},
      {"normalization", {{"mean", ds.normalization.mean}, {"std", ds.normalization.std}}},
      {"input_range", {ds.input_lo, ds.input_hi}},
      {"gt_boxes", boxes},
      {"meta", ds.meta},
  };
  std::vector<float> payload;
  payload.reserve(ds.images.size() + ds.labels.vec().size());
  payload.insert(payload.end(), ds.images.vec().begin(), ds.images.vec().end());
  payload.insert(payload.end(), ds.labels.vec().begin(), ds.labels.vec().end());
  write_container(path, header, payload);
}

Dataset load_dataset(const std::filesystem::path& path) {
  auto c = read_container(path);
  const auto& h = c.header;
  try {
    if (h.at("kind") != "dataset") throw FormatError(path.string() + ": container is not a dataset");
    const auto shape = h.at("shape").get<std::vector<std::size_t>>();
    if (shape.size() != 4) throw FormatError(path.string() + ": dataset shape must have 4 entries");
    const Shape4 s{shape[0], shape[1], shape[2], shape[3]};
    const auto k = h.at("num_classes").get<std::size_t>();
    const std::size_t img = s.n * s.c * s.h * s.w;
    if (c.payload.size() != img + s.n * k) {
      throw FormatError(path.string() + ": payload has " + std::to_string(c.payload.size()) + " values, expected " +
                        std::to_string(img + s.n * k));
    }
    Dataset ds;
    ds.images = ImageBatch(s, std::vector<float>(c.payload.begin(), c.payload.begin() + static_cast<std::ptrdiff_t>(img)));
    ds.labels = SoftLabelBatch(s.n, k);
    std::copy(c.payload.begin() + static_cast<std::ptrdiff_t>(img), c.payload.end(), ds.labels.vec().begin());
    ds.class_names = h.at("class_names").get<std::vector<std::string>>();
    ds.classes = h.at("classes").get<std::vector<int>>();
    ds.split = h.at("split").get<std::string>();
    ds.normalization.mean = h.at("normalization").at("mean").get<std::vector<float>>();
    ds.normalization.std = h.at("normalization").at("std").get<std::vector<float>>();
    const auto range = h.at("input_range").get<std::vector<float>>();
    if (range.size() != 2) throw FormatError(path.string() + ": input_range must have 2 entries");
    ds.input_lo = range[0];
    ds.input_hi = range[1];
    for (const auto& b : h.at("gt_boxes")) {
      ds.gt_boxes.push_back(BoxPx{b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(), b.at(3).get<int>()});
    }
    ds.meta = h.value("meta", nlohmann::json::object());
    ds.validate();
    return ds;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": malformed dataset header: " + e.what());
  }
}

}  // namespace cutmixlab
