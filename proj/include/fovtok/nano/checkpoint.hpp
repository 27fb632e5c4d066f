/* Copyright 2026 The fovtok Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Checkpoint layout, all integers little-endian:
//
//   "NSTT"            4 bytes
//   version           u32 (1)
//   header length     u32, bytes of UTF-8 JSON that follow
//   header            {"config": NanoConfig, "params": [[name, rows, cols], ...]}
//   count             u64, number of parameters
//   values            count IEEE-754 binary64, in header order

#ifndef FOVTOK_NANO_CHECKPOINT_HPP
#define FOVTOK_NANO_CHECKPOINT_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fovtok/error.hpp"
#include "fovtok/nano/model.hpp"

namespace fovtok::nano {

inline constexpr char kCheckpointMagic[4] = {'N', 'S', 'T', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

template <typename U>
void put_le(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

template <typename U>
U get_le(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(U) > in.size()) throw IoError("truncated checkpoint");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += sizeof(U);
  return v;
}

}  // namespace detail

inline std::string encode_checkpoint(const NanoModel& model) {
  nlohmann::json header;
  header["config"] = model.config();
  header["params"] = nlohmann::json::array();
  for (const auto& e : model.net().layout().entries()) header["params"].push_back({e.name, e.rows, e.cols});
  const std::string text = header.dump();

  std::string out(kCheckpointMagic, 4);
  detail::put_le<std::uint32_t>(out, kCheckpointVersion);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  detail::put_le<std::uint64_t>(out, model.params().size());
  for (double v : model.params()) detail::put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

inline NanoModel decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) throw IoError("not a checkpoint");
  std::size_t pos = 4;
  const auto version = detail::get_le<std::uint32_t>(bytes, pos);
  if (version != kCheckpointVersion) throw IoError("unsupported checkpoint version " + std::to_string(version));
  const auto len = detail::get_le<std::uint32_t>(bytes, pos);
  if (pos + len > bytes.size()) throw IoError("truncated checkpoint");
  NanoConfig cfg;
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(pos, len));
    cfg = header.at("config").get<NanoConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad checkpoint header: ") + e.what());
  }
  pos += len;
  NanoNet net(cfg);
  const auto& entries = net.layout().entries();
  const auto& listed = header.at("params");
  if (listed.size() != entries.size()) throw IoError("checkpoint parameter list does not match the configuration");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (listed[i][0] != entries[i].name || listed[i][1] != entries[i].rows || listed[i][2] != entries[i].cols) {
      throw IoError("checkpoint parameter " + entries[i].name + " does not match the configuration");
    }
  }
  const auto count = detail::get_le<std::uint64_t>(bytes, pos);
  if (count != net.layout().size()) throw IoError("checkpoint parameter count mismatch");
  if (bytes.size() - pos != count * 8) throw IoError("checkpoint payload size mismatch");
  std::vector<double> params(count);
  for (auto& v : params) v = std::bit_cast<double>(detail::get_le<std::uint64_t>(bytes, pos));
  return NanoModel(cfg, std::move(params));
}

inline void save_checkpoint(const std::string& path, const NanoModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  const auto bytes = encode_checkpoint(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

inline NanoModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace fovtok::nano

#endif  // FOVTOK_NANO_CHECKPOINT_HPP
