// Copyright 2026 The tpf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Binary container for a triplane plus its decoder (".tpln").
///
/// All integers are little-endian u32, all reals little-endian IEEE-754 binary64:
///
///   offset  size        field
///   0       4           magic "TPLN"
///   4       4           version (1)
///   8       4           R  resolution
///   12      4           C  channels
///   16      4           H  hidden width (0 = no hidden layer)
///   20      8           extent
///   28      3*R*R*C*8   planes XY, XZ, YZ; each row-major, channel fastest
///   ...     P*8         decoder parameters in FieldDecoder::params() order
///
/// P = H*C + H + D + 1 + 3*D + 3 with D = (H > 0 ? H : C). Nothing follows the
/// decoder block; trailing bytes are rejected.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tpf/error.hpp"
#include "tpf/triplane.hpp"

namespace tpf {

inline constexpr std::uint32_t kContainerVersion = 1;

struct FieldModel {
  Triplane triplane;
  FieldDecoder decoder;

  friend bool operator==(const FieldModel&, const FieldModel&) = default;
};

namespace detail {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

class ByteWriter {
 public:
  void u32(std::uint32_t v) { raw(to_little(v)); }
  void f64(double v) { raw(to_little(std::bit_cast<std::uint64_t>(v))); }
  void bytes(const char* s, std::size_t n) { buf_.insert(buf_.end(), s, s + n); }
  std::vector<unsigned char> take() { return std::move(buf_); }

 private:
  template <typename T>
  void raw(T v) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    buf_.insert(buf_.end(), b, b + sizeof(T));
  }
  std::vector<unsigned char> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const unsigned char> data) : data_(data) {}

  std::uint32_t u32() { return to_little(raw<std::uint32_t>()); }
  double f64() { return std::bit_cast<double>(to_little(raw<std::uint64_t>())); }
  void expect(const char* s, std::size_t n) {
    need(n);
    if (std::memcmp(data_.data() + pos_, s, n) != 0) throw ParseError("bad magic bytes at offset 0");
    pos_ += n;
  }
  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw ParseError("truncated container at offset " + std::to_string(pos_));
  }
  template <typename T>
  T raw() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::span<const unsigned char> data_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<unsigned char> encode_container(const Triplane& tp, const FieldDecoder& dec) {
  detail::require(dec.channels() == tp.channels(), "decoder channels do not match triplane");
  detail::ByteWriter w;
  w.bytes("TPLN", 4);
  w.u32(kContainerVersion);
  w.u32(static_cast<std::uint32_t>(tp.resolution()));
  w.u32(static_cast<std::uint32_t>(tp.channels()));
  w.u32(static_cast<std::uint32_t>(dec.hidden()));
  w.f64(tp.extent());
  for (const auto& p : tp.planes())
    for (double v : p.data) w.f64(v);
  for (double v : dec.params()) w.f64(v);
  return w.take();
}

inline FieldModel decode_container(std::span<const unsigned char> bytes) {
  detail::ByteReader r(bytes);
  r.expect("TPLN", 4);
  const std::uint32_t version = r.u32();
  if (version != kContainerVersion) throw ParseError("unsupported container version " + std::to_string(version));
  const std::uint32_t R = r.u32();
  const std::uint32_t C = r.u32();
  const std::uint32_t H = r.u32();
  const double extent = r.f64();
  if (R < 2 || R > 65536 || C < 1 || C > 4096 || H > 4096)
    throw ParseError("implausible container header (R=" + std::to_string(R) + ", C=" + std::to_string(C) +
                     ", H=" + std::to_string(H) + ")");
  const std::size_t plane_values = static_cast<std::size_t>(R) * R * C;
  const std::size_t param_count = FieldDecoder::parameter_count(static_cast<int>(C), static_cast<int>(H));
  if (r.remaining() != (3 * plane_values + param_count) * sizeof(double))
    throw ParseError("container payload size mismatch: expected " +
                     std::to_string((3 * plane_values + param_count) * sizeof(double)) + " bytes after header, found " +
                     std::to_string(r.remaining()));
  std::array<Plane, 3> planes;
  for (auto& p : planes) {
    p = Plane(static_cast<int>(R), static_cast<int>(C));
    for (double& v : p.data) v = r.f64();
  }
  FieldDecoder dec(static_cast<int>(C), static_cast<int>(H));
  for (double& v : dec.params()) v = r.f64();
  try {
    return {Triplane(std::move(planes), extent), std::move(dec)};
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid container contents: ") + e.what());
  }
}

inline void write_container(const std::filesystem::path& path, const Triplane& tp, const FieldDecoder& dec) {
  const auto bytes = encode_container(tp, dec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

inline FieldModel read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_container(bytes);
}

}  // namespace tpf
