// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "specedit/types.hpp"

namespace specedit::detail {

/// Little-endian writer that counts the bytes it emits.
class ByteWriter {
 public:
  explicit ByteWriter(std::ostream& out) : out_(out) {}

  void bytes(const void* data, std::size_t size);
  void u32(std::uint32_t value);
  void u64(std::uint64_t value);
  void f32(float value);
  void f64(double value);
  /// Column-major f32 elements; throws ValidationError on non-finite values.
  void matrix(const MatrixF& m);
  /// Narrowed to f32 first.
  void matrix(const Matrix& m);
  void vector(const Vector& v);

  std::uint64_t written() const { return written_; }

 private:
  std::ostream& out_;
  std::uint64_t written_ = 0;
};

/// Little-endian reader; any short read is a FormatError.
class ByteReader {
 public:
  explicit ByteReader(std::istream& in) : in_(in) {}

  void bytes(void* data, std::size_t size);
  std::uint32_t u32();
  std::uint64_t u64();
  float f32();
  double f64();
  /// Throws FormatError on NaN or infinity.
  MatrixF matrix(Index rows, Index cols);
  Matrix matrix_d(Index rows, Index cols);
  Vector vector(Index size);

 private:
  std::istream& in_;
};

/// magic | version | header length | header JSON
std::uint64_t write_preamble(ByteWriter& w, std::string_view magic, std::uint32_t version,
                             const nlohmann::json& header);

struct Preamble {
  std::uint32_t version = 0;
  nlohmann::json header;
};

/// Checks the magic and the version (must equal `version`) and parses the
/// JSON header.
Preamble read_preamble(ByteReader& r, std::string_view magic, std::uint32_t version);

/// Hard cap on header size, to reject garbage lengths before allocating.
inline constexpr std::uint64_t kMaxHeaderBytes = 64ull << 20;

/// Typed accessors that turn JSON shape errors into FormatError.
Index json_index(const nlohmann::json& j, const char* key, Index min_value);

}  // namespace specedit::detail
