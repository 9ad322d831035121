// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "specedit/edit_config.hpp"

namespace specedit::cli {

inline constexpr int kExitOk = 0;
/// Bad arguments, unreadable or malformed inputs, failed demo check.
inline constexpr int kExitInvalid = 1;
/// Degenerate spectra and other numerical failures.
inline constexpr int kExitNumerical = 2;

/// Consulted for the default --seed of `demo`.
inline constexpr const char* kSeedEnv = "SPECEDIT_SEED";

/// Layer selection syntax: "N" or "top:N", "bottom:N", "ids:a,b,c".
LayerSelection parse_layer_selection(const std::string& text);

/// Runs one invocation; `args` excludes the program name. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace specedit::cli
