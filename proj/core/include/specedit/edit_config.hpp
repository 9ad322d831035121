// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "specedit/feature_map.hpp"

namespace specedit {

/// Which branches take part in an edit.
///
/// `reverse` is a fit-time mode: the projections are built to keep the
/// negative covariance and drop the positive one. At edit time a reverse
/// bundle is applied exactly like a `both` bundle.
enum class EditMode { both, positive_only, negative_only, reverse };

enum class MergeMode { norm_rescale, average };

std::string_view mode_tag(EditMode mode);
EditMode parse_mode(std::string_view tag);
std::string_view merge_tag(MergeMode merge);
MergeMode parse_merge(std::string_view tag);

struct LayerSelection {
  enum class Kind { top, bottom, explicit_list };

  Kind kind = Kind::top;
  int count = 21;
  std::vector<int> layers;

  static LayerSelection top(int count);
  static LayerSelection bottom(int count);
  static LayerSelection explicit_layers(std::vector<int> layers);

  /// Resolves the selection against the layer ids a model (or file) exposes.
  /// `available` must be strictly increasing. Throws ValidationError when the
  /// count exceeds the layer count or an explicit id is unknown.
  std::vector<int> resolve(std::span<const int> available) const;

  friend bool operator==(const LayerSelection&, const LayerSelection&) = default;
};

/// Everything that controls fitting and applying the editing projections.
/// Defaults are the best truthfulness setting reported for the method
/// (K = 99.8%, top 21 layers).
struct EditConfig {
  double explained_variance = 0.998;
  LayerSelection layers = LayerSelection::top(21);
  EditMode mode = EditMode::both;
  MergeMode merge = MergeMode::norm_rescale;
  FeatureSpec feature;
  bool center = false;

  /// Fairness preset: K = 99.9%, top 3 layers.
  static EditConfig fairness();

  /// Checks K in (0, 1], count >= 1 for top/bottom selections and the
  /// feature spec. Layer-count bounds are checked by LayerSelection::resolve.
  void validate() const;

  friend bool operator==(const EditConfig&, const EditConfig&) = default;
};

}  // namespace specedit
