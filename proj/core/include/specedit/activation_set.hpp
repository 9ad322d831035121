// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

#include "specedit/types.hpp"

namespace specedit {

enum class Role { neutral = 0, positive = 1, negative = 2 };

inline constexpr Role kAllRoles[] = {Role::neutral, Role::positive, Role::negative};

const char* role_name(Role role);

/// Demonstration activations of one layer. Each matrix is d x n with one
/// demonstration per column.
struct LayerSamples {
  MatrixF neutral;
  MatrixF positive;
  MatrixF negative;

  const MatrixF& get(Role role) const;
  MatrixF& get(Role role);
};

/// Bit-for-bit equality of shapes and elements.
bool operator==(const LayerSamples& a, const LayerSamples& b);

/// Paired neutral / positive / negative last-token activations for a set of
/// layers, as captured from a model.
struct ActivationSet {
  std::vector<int> layer_ids;
  std::vector<LayerSamples> layers;
  std::map<std::string, std::string> meta;

  Index width() const;
  Index count() const;

  /// Samples of layer `layer_id`; throws ValidationError if absent.
  const LayerSamples& layer(int layer_id) const;
  bool has_layer(int layer_id) const;

  /// Throws ValidationError unless shapes agree, layer ids are strictly
  /// increasing and non-empty, and every element is finite.
  void validate() const;
};

bool operator==(const ActivationSet& a, const ActivationSet& b);

}  // namespace specedit
