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

#include <array>
#include <cstdint>

namespace cutmixlab {

/// Philox4x32-10 keyed by seed, counter space partitioned by stream id.
///
/// Output depends only on (seed, stream_id) and the number of values drawn,
/// so streams can be created per worker or per minibatch and reproduce
/// bit-exactly regardless of scheduling. All derived distributions below are
/// computed from this integer stream with fixed formulas; no <random>
/// distributions are used since their output is implementation-defined.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on the open interval (0, 1).
  double uniform_open();
  /// Unbiased integer in [0, n); n must be > 0.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal (Box-Muller, second value cached).
  double normal();
  /// Gamma(shape, 1) by Marsaglia-Tsang, with the shape < 1 boost.
  double gamma(double shape);
  /// Beta(a, b) on the open interval (0, 1).
  double beta(double a, double b);

  /// Raw Philox4x32-10 block function.
  static std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> ctr,
                                             std::array<std::uint32_t, 2> key);

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

/// Stream ids are partitioned by purpose so independent consumers never share
/// a counter range.
enum class StreamPurpose : std::uint64_t {
  init = 1,
  epoch_order = 2,
  augment = 3,
  feature_layer = 4,
  data = 5,
  eval_pairs = 6,
  ood = 7,
  cli = 8,
};

constexpr std::uint64_t stream_id(StreamPurpose purpose, std::uint64_t index) {
  return (static_cast<std::uint64_t>(purpose) << 48) | (index & 0xFFFFFFFFFFFFull);
}

}  // namespace cutmixlab
