// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string_view>

#include "specedit/activation_set.hpp"
#include "specedit/projection_bundle.hpp"

namespace specedit {

// Binary containers. Every file is
//
//   magic (4 ASCII bytes) | version (u32 LE) | header length (u64 LE)
//   | header (UTF-8 JSON) | payload
//
// and the header fully determines the payload length. See docs/formats.md.

inline constexpr std::string_view kActivationMagic = "SEAD";
inline constexpr std::string_view kBundleMagic = "SEAP";
inline constexpr std::string_view kModelMagic = "SEAM";
inline constexpr std::uint32_t kActivationVersion = 1;

/// Tolerance applied to projection columns when a bundle is read back.
inline constexpr double kReadOrthonormalityTolerance = 1e-4;

std::uint64_t write_activation_set(const ActivationSet& set, std::ostream& sink);
ActivationSet read_activation_set(std::istream& source);

std::uint64_t write_projection_bundle(const ProjectionBundle& bundle, std::ostream& sink);
ProjectionBundle read_projection_bundle(std::istream& source);

/// Reads only the 4-byte magic; the stream position is restored.
std::string peek_magic(std::istream& source);

ActivationSet load_activation_set(const std::filesystem::path& path);
ProjectionBundle load_projection_bundle(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path` on
/// success, so a failed write never leaves a partial file behind.
void save_activation_set(const ActivationSet& set, const std::filesystem::path& path);
void save_projection_bundle(const ProjectionBundle& bundle, const std::filesystem::path& path);

/// Runs `write` against a temporary sibling of `path`, then renames it into
/// place. On any exception the temporary is removed and the error rethrown.
void write_file_atomically(const std::filesystem::path& path,
                           const std::function<void(std::ostream&)>& write);

}  // namespace specedit
