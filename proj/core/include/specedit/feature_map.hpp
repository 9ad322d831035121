// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

#include "specedit/types.hpp"

namespace specedit {

enum class FeatureKind { identity, squared_exponential, tanh, elu };

/// Elementwise feature map used to lift activations before fitting and
/// editing. `alpha` is ignored by identity and tanh; `epsilon` is the clamp
/// margin of the pseudo-inverse.
struct FeatureSpec {
  FeatureKind kind = FeatureKind::identity;
  double alpha = 1.0;
  double epsilon = 1e-6;

  /// Throws ValidationError unless alpha > 0 and 0 < epsilon <= 1e-2.
  void validate() const;

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

/// ASCII tag used on the command line and in bundle files.
std::string_view feature_tag(FeatureKind kind);
FeatureKind parse_feature_kind(std::string_view tag);

double apply_feature(double z, const FeatureSpec& spec);
double apply_pseudo_inverse(double z, const FeatureSpec& spec);

/// Elementwise phi. Throws ValidationError on non-finite input.
Vector apply_feature(const Vector& z, const FeatureSpec& spec);
Matrix apply_feature(const Matrix& z, const FeatureSpec& spec);

/// Elementwise clamped inverse of phi. The output is finite for every finite
/// input. For squared-exponential this recovers z^2, not z.
Vector apply_pseudo_inverse(const Vector& z, const FeatureSpec& spec);
Matrix apply_pseudo_inverse(const Matrix& z, const FeatureSpec& spec);

}  // namespace specedit
