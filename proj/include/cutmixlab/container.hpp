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

#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

namespace cutmixlab {

/// Native file layout: the 4 bytes "cml1", a u32 little-endian header
/// length, the JSON header, then little-endian f32 values to end of file.
struct Container {
  nlohmann::json header;
  std::vector<float> payload;
};

inline constexpr char kContainerMagic[4] = {'c', 'm', 'l', '1'};

void write_container(const std::filesystem::path& path, const nlohmann::json& header,
                     std::span<const float> payload);
Container read_container(const std::filesystem::path& path);

/// Writes `text` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace cutmixlab
