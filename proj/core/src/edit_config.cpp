// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "specedit/edit_config.hpp"

#include <algorithm>
#include <string>

#include "specedit/error.hpp"

namespace specedit {

std::string_view mode_tag(EditMode mode) {
  switch (mode) {
    case EditMode::both: return "both";
    case EditMode::positive_only: return "positive-only";
    case EditMode::negative_only: return "negative-only";
    case EditMode::reverse: return "reverse";
  }
  return "both";
}

EditMode parse_mode(std::string_view tag) {
  if (tag == "both") return EditMode::both;
  if (tag == "positive-only") return EditMode::positive_only;
  if (tag == "negative-only") return EditMode::negative_only;
  if (tag == "reverse") return EditMode::reverse;
  throw ValidationError("unknown edit mode '" + std::string(tag) + "'");
}

std::string_view merge_tag(MergeMode merge) {
  return merge == MergeMode::average ? "average" : "norm-rescale";
}

MergeMode parse_merge(std::string_view tag) {
  if (tag == "norm-rescale") return MergeMode::norm_rescale;
  if (tag == "average") return MergeMode::average;
  throw ValidationError("unknown merge mode '" + std::string(tag) + "'");
}

LayerSelection LayerSelection::top(int count) { return {Kind::top, count, {}}; }

LayerSelection LayerSelection::bottom(int count) { return {Kind::bottom, count, {}}; }

LayerSelection LayerSelection::explicit_layers(std::vector<int> layers) {
  std::sort(layers.begin(), layers.end());
  layers.erase(std::unique(layers.begin(), layers.end()), layers.end());
  return {Kind::explicit_list, static_cast<int>(layers.size()), std::move(layers)};
}

std::vector<int> LayerSelection::resolve(std::span<const int> available) const {
  const auto total = static_cast<int>(available.size());
  switch (kind) {
    case Kind::top:
    case Kind::bottom:
      if (count < 1 || count > total) {
        throw ValidationError("layer count L=" + std::to_string(count) + " outside [1, " +
                              std::to_string(total) + "]");
      }
      if (kind == Kind::top) return {available.end() - count, available.end()};
      return {available.begin(), available.begin() + count};
    case Kind::explicit_list:
      for (int id : layers) {
        if (std::find(available.begin(), available.end(), id) == available.end()) {
          throw ValidationError("unknown layer id " + std::to_string(id));
        }
      }
      return layers;
  }
  return {};
}

EditConfig EditConfig::fairness() {
  EditConfig c;
  c.explained_variance = 0.999;
  c.layers = LayerSelection::top(3);
  return c;
}

void EditConfig::validate() const {
  if (!(explained_variance > 0.0 && explained_variance <= 1.0)) {
    throw ValidationError("explained-variance threshold K must lie in (0, 1]");
  }
  if (layers.kind != LayerSelection::Kind::explicit_list && layers.count < 1) {
    throw ValidationError("layer count L must be at least 1");
  }
  feature.validate();
}

}  // namespace specedit
