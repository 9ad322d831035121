// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "binary_io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <vector>

#include "specedit/error.hpp"

namespace specedit::detail {
namespace {

template <typename U>
void store_le(U value, unsigned char* out) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out[i] = static_cast<unsigned char>(value >> (8 * i));
  }
}

template <typename U>
U load_le(const unsigned char* in) {
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    value |= static_cast<U>(in[i]) << (8 * i);
  }
  return value;
}

}  // namespace

void ByteWriter::bytes(const void* data, std::size_t size) {
  out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out_) throw Error("write failed: sink rejected data");
  written_ += size;
}

void ByteWriter::u32(std::uint32_t value) {
  std::array<unsigned char, 4> buf{};
  store_le(value, buf.data());
  bytes(buf.data(), buf.size());
}

void ByteWriter::u64(std::uint64_t value) {
  std::array<unsigned char, 8> buf{};
  store_le(value, buf.data());
  bytes(buf.data(), buf.size());
}

void ByteWriter::f32(float value) { u32(std::bit_cast<std::uint32_t>(value)); }
void ByteWriter::f64(double value) { u64(std::bit_cast<std::uint64_t>(value)); }

void ByteWriter::matrix(const MatrixF& m) {
  std::vector<unsigned char> buf(static_cast<std::size_t>(m.size()) * 4);
  for (Index i = 0; i < m.size(); ++i) {
    const float v = m.data()[i];
    if (!std::isfinite(v)) throw ValidationError("non-finite element in payload");
    store_le(std::bit_cast<std::uint32_t>(v), buf.data() + 4 * i);
  }
  bytes(buf.data(), buf.size());
}

void ByteWriter::matrix(const Matrix& m) { matrix(MatrixF(m.cast<float>())); }

void ByteWriter::vector(const Vector& v) { matrix(Matrix(v)); }

void ByteReader::bytes(void* data, std::size_t size) {
  in_.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
  if (static_cast<std::size_t>(in_.gcount()) != size) {
    throw FormatError("payload length mismatch: unexpected end of input");
  }
}

std::uint32_t ByteReader::u32() {
  std::array<unsigned char, 4> buf{};
  bytes(buf.data(), buf.size());
  return load_le<std::uint32_t>(buf.data());
}

std::uint64_t ByteReader::u64() {
  std::array<unsigned char, 8> buf{};
  bytes(buf.data(), buf.size());
  return load_le<std::uint64_t>(buf.data());
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }
double ByteReader::f64() { return std::bit_cast<double>(u64()); }

MatrixF ByteReader::matrix(Index rows, Index cols) {
  MatrixF m(rows, cols);
  std::vector<unsigned char> buf(static_cast<std::size_t>(m.size()) * 4);
  bytes(buf.data(), buf.size());
  for (Index i = 0; i < m.size(); ++i) {
    const float v = std::bit_cast<float>(load_le<std::uint32_t>(buf.data() + 4 * i));
    if (!std::isfinite(v)) throw FormatError("non-finite element in payload");
    m.data()[i] = v;
  }
  return m;
}

Matrix ByteReader::matrix_d(Index rows, Index cols) { return matrix(rows, cols).cast<double>(); }

Vector ByteReader::vector(Index size) { return matrix_d(size, 1); }

std::uint64_t write_preamble(ByteWriter& w, std::string_view magic, std::uint32_t version,
                             const nlohmann::json& header) {
  const std::string text = header.dump();
  w.bytes(magic.data(), magic.size());
  w.u32(version);
  w.u64(text.size());
  w.bytes(text.data(), text.size());
  return w.written();
}

Preamble read_preamble(ByteReader& r, std::string_view magic, std::uint32_t version) {
  std::array<char, 4> found{};
  r.bytes(found.data(), found.size());
  if (std::string_view(found.data(), found.size()) != magic) {
    throw FormatError("bad magic: expected \"" + std::string(magic) + "\", found \"" +
                      std::string(found.data(), found.size()) + "\"");
  }
  Preamble p;
  p.version = r.u32();
  if (p.version != version) {
    throw FormatError("unsupported " + std::string(magic) + " version " +
                      std::to_string(p.version));
  }
  const std::uint64_t length = r.u64();
  if (length == 0 || length > kMaxHeaderBytes) {
    throw FormatError("implausible header length " + std::to_string(length));
  }
  std::string text(length, '\0');
  r.bytes(text.data(), text.size());
  p.header = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (p.header.is_discarded() || !p.header.is_object()) {
    throw FormatError("header is not a JSON object");
  }
  return p;
}

Index json_index(const nlohmann::json& j, const char* key, Index min_value) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number_integer()) {
    throw FormatError(std::string("header field '") + key + "' missing or not an integer");
  }
  const auto value = it->get<std::int64_t>();
  if (value < min_value) {
    throw FormatError(std::string("header field '") + key + "' out of range");
  }
  return static_cast<Index>(value);
}

}  // namespace specedit::detail
