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

#include "cutmixlab/container.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "cutmixlab/errors.hpp"

namespace cutmixlab {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void write_container(const std::filesystem::path& path, const nlohmann::json& header,
                     std::span<const float> payload) {
  const std::string text = header.dump();
  std::string out;
  out.reserve(8 + text.size() + 4 * payload.size());
  out.append(kContainerMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  for (float f : payload) put_u32(out, std::bit_cast<std::uint32_t>(f));
  write_text_file(path, out);
}

Container read_container(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kContainerMagic, 4) != 0) {
    throw FormatError(path.string() + ": missing cml1 magic");
  }
  const std::uint32_t header_len = get_u32(p + 4);
  if (8 + static_cast<std::size_t>(header_len) > bytes.size()) {
    throw FormatError(path.string() + ": header length " + std::to_string(header_len) +
                      " exceeds file size");
  }
  Container c;
  try {
    c.header = nlohmann::json::parse(bytes.substr(8, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": bad header JSON: " + e.what());
  }
  const std::size_t body = bytes.size() - 8 - header_len;
  if (body % 4 != 0) {
    throw FormatError(path.string() + ": payload of " + std::to_string(body) +
                      " bytes is not a whole number of f32 values");
  }
  c.payload.resize(body / 4);
  const unsigned char* q = p + 8 + header_len;
  for (std::size_t i = 0; i < c.payload.size(); ++i) {
    c.payload[i] = std::bit_cast<float>(get_u32(q + 4 * i));
  }
  return c;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw std::runtime_error("write to " + path.string() + " failed");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace cutmixlab
