// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "specedit/edit_config.hpp"
#include "specedit/types.hpp"

namespace specedit {

/// Fitted editing projections of one layer.
///
/// `keep_plus` holds the leading k+ left singular vectors of the positive
/// cross-covariance; `keep_minus` holds the d - k- trailing left singular
/// vectors of the negative cross-covariance. Either may have zero columns.
struct LayerProjection {
  int layer = 0;
  Matrix keep_plus;
  Matrix keep_minus;
  Index k_plus = 0;
  Index k_minus = 0;
  Vector sigma_plus;
  Vector sigma_minus;

  Index width() const { return keep_plus.rows(); }

  /// Throws ValidationError if shapes disagree, singular values are negative
  /// or increasing, or a column set deviates from orthonormal by more than
  /// `tolerance` (max-abs entry of U^T U - I).
  void validate(double tolerance) const;
};

struct ProjectionBundle {
  static constexpr std::uint32_t kFormatVersion = 1;

  Index width = 0;
  EditConfig fit_config;
  std::vector<LayerProjection> layers;
  std::uint32_t format_version = kFormatVersion;

  /// Projection of `layer_id`, or nullptr when the bundle does not cover it.
  const LayerProjection* find(int layer_id) const;
  std::vector<int> layer_ids() const;

  void validate(double tolerance = 1e-5) const;
};

/// Largest |(U^T U - I)_{ij}|; zero for an empty column set.
double orthonormality_error(const Matrix& columns);

}  // namespace specedit
