// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace specedit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: bad shapes, out-of-range configuration, malformed files.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A container file that cannot be decoded (bad magic, truncated payload, ...).
class FormatError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// The numbers themselves make the request impossible (degenerate spectra,
/// non-finite intermediate results).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace specedit
