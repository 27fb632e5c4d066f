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

// FTOK token file, little-endian:
//
//   offset  size  field
//   0       4     magic "FTOK"
//   4       2     version (1)
//   6       2     patch_size
//   8       2     token_count
//   10      1     channels
//   11      1     reserved (0)
//   12      N     validity bytes, 0 or 1
//   12+N    N*T*T*C  u8 samples, token-major, row-major, channel-interleaved
//
// Samples are rounded to the nearest integer on write.

#ifndef FOVTOK_TOKEN_IO_HPP
#define FOVTOK_TOKEN_IO_HPP

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "fovtok/error.hpp"
#include "fovtok/tokenizer.hpp"

namespace fovtok {

inline constexpr std::array<char, 4> kTokenMagic = {'F', 'T', 'O', 'K'};
inline constexpr std::uint16_t kTokenVersion = 1;
inline constexpr std::size_t kTokenHeaderSize = 12;

inline std::size_t token_file_size(std::size_t token_count, int patch_size, int channels) {
  return kTokenHeaderSize + token_count +
         token_count * static_cast<std::size_t>(patch_size) * patch_size * channels;
}

namespace detail {

inline void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v & 0xff));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_tokens(const TokenTensor& tokens) {
  const std::size_t n = tokens.token_count();
  if (n > 0xffff) throw InputError("token count exceeds the FTOK limit of 65535");
  if (tokens.pattern.patch_size > 0xffff) throw InputError("patch size exceeds the FTOK limit");
  if (tokens.channels < 1 || tokens.channels > 255) throw InputError("channel count out of range");
  if (tokens.data.size() != n * tokens.token_stride()) throw InputError("token data size mismatch");

  std::vector<std::uint8_t> bytes;
  bytes.reserve(token_file_size(n, tokens.pattern.patch_size, tokens.channels));
  bytes.insert(bytes.end(), kTokenMagic.begin(), kTokenMagic.end());
  detail::put_u16(bytes, kTokenVersion);
  detail::put_u16(bytes, static_cast<std::uint16_t>(tokens.pattern.patch_size));
  detail::put_u16(bytes, static_cast<std::uint16_t>(n));
  bytes.push_back(static_cast<std::uint8_t>(tokens.channels));
  bytes.push_back(0);
  for (auto v : tokens.valid) bytes.push_back(v ? 1 : 0);
  for (double v : tokens.data) bytes.push_back(to_u8(v));
  return bytes;
}

/// Decodes a token file and checks it against the pattern it claims to use.
inline TokenTensor decode_tokens(const std::vector<std::uint8_t>& bytes, const FoveationPattern& pattern) {
  if (bytes.size() < kTokenHeaderSize) throw InputError("truncated payload: header incomplete");
  if (std::memcmp(bytes.data(), kTokenMagic.data(), 4) != 0) throw InputError("bad magic");
  const auto version = detail::get_u16(bytes.data() + 4);
  if (version != kTokenVersion) throw InputError("version mismatch: " + std::to_string(version));
  const int patch = detail::get_u16(bytes.data() + 6);
  const std::size_t n = detail::get_u16(bytes.data() + 8);
  const int channels = bytes[10];
  if (channels < 1) throw InputError("bad channel count");

  if (patch != pattern.patch_size) {
    throw InputError("count mismatch: patch size " + std::to_string(patch) + " vs pattern " +
                     std::to_string(pattern.patch_size));
  }
  const auto expected = static_cast<std::size_t>(token_count(pattern));
  if (n != expected) {
    throw InputError("count mismatch: " + std::to_string(n) + " tokens vs pattern " + std::to_string(expected));
  }
  const std::size_t need = token_file_size(n, patch, channels);
  if (bytes.size() < need) throw InputError("truncated payload");
  if (bytes.size() > need) throw InputError("count mismatch: trailing bytes after payload");

  TokenTensor t;
  t.pattern = pattern;
  t.channels = channels;
  t.valid.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto v = bytes[kTokenHeaderSize + k];
    if (v > 1) throw InputError("validity byte must be 0 or 1");
    t.valid[k] = v;
  }
  const std::uint8_t* samples = bytes.data() + kTokenHeaderSize + n;
  t.data.assign(samples, samples + n * t.token_stride());
  return t;
}

inline void write_tokens(std::ostream& sink, const TokenTensor& tokens) {
  const auto bytes = encode_tokens(tokens);
  sink.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!sink) throw IoError("token write failed");
}

inline TokenTensor read_tokens(std::istream& source, const FoveationPattern& pattern) {
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(source)), std::istreambuf_iterator<char>());
  return decode_tokens(bytes, pattern);
}

inline void write_tokens(const std::string& path, const TokenTensor& tokens) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write_tokens(out, tokens);
}

inline TokenTensor read_tokens(const std::string& path, const FoveationPattern& pattern) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_tokens(in, pattern);
}

}  // namespace fovtok

#endif  // FOVTOK_TOKEN_IO_HPP
