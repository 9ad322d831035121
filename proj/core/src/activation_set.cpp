// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "specedit/activation_set.hpp"

#include <algorithm>
#include <cstring>
#include <string>

#include "specedit/error.hpp"

namespace specedit {
namespace {

bool bitwise_equal(const MatrixF& a, const MatrixF& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(float) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

const char* role_name(Role role) {
  switch (role) {
    case Role::neutral: return "neutral";
    case Role::positive: return "positive";
    case Role::negative: return "negative";
  }
  return "unknown";
}

const MatrixF& LayerSamples::get(Role role) const {
  switch (role) {
    case Role::positive: return positive;
    case Role::negative: return negative;
    case Role::neutral: break;
  }
  return neutral;
}

MatrixF& LayerSamples::get(Role role) {
  return const_cast<MatrixF&>(static_cast<const LayerSamples&>(*this).get(role));
}

bool operator==(const LayerSamples& a, const LayerSamples& b) {
  return bitwise_equal(a.neutral, b.neutral) && bitwise_equal(a.positive, b.positive) &&
         bitwise_equal(a.negative, b.negative);
}

bool operator==(const ActivationSet& a, const ActivationSet& b) {
  return a.layer_ids == b.layer_ids && a.layers == b.layers && a.meta == b.meta;
}

Index ActivationSet::width() const { return layers.empty() ? 0 : layers.front().neutral.rows(); }

Index ActivationSet::count() const { return layers.empty() ? 0 : layers.front().neutral.cols(); }

bool ActivationSet::has_layer(int layer_id) const {
  return std::binary_search(layer_ids.begin(), layer_ids.end(), layer_id);
}

const LayerSamples& ActivationSet::layer(int layer_id) const {
  const auto it = std::lower_bound(layer_ids.begin(), layer_ids.end(), layer_id);
  if (it == layer_ids.end() || *it != layer_id) {
    throw ValidationError("unknown layer id " + std::to_string(layer_id));
  }
  return layers[static_cast<std::size_t>(it - layer_ids.begin())];
}

void ActivationSet::validate() const {
  if (layer_ids.empty()) throw ValidationError("activation set has no layers");
  if (layer_ids.size() != layers.size()) {
    throw ValidationError("layer id count does not match layer sample count");
  }
  if (!std::is_sorted(layer_ids.begin(), layer_ids.end()) ||
      std::adjacent_find(layer_ids.begin(), layer_ids.end()) != layer_ids.end()) {
    throw ValidationError("layer ids must be strictly increasing");
  }
  const Index d = width();
  const Index n = count();
  if (d < 1 || n < 1) throw ValidationError("activation set needs d >= 1 and n >= 1");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (Role role : kAllRoles) {
      const MatrixF& m = layers[l].get(role);
      if (m.rows() != d || m.cols() != n) {
        throw ValidationError("layer " + std::to_string(layer_ids[l]) + " " + role_name(role) +
                              " matrix is not " + std::to_string(d) + "x" + std::to_string(n));
      }
      if (!m.allFinite()) {
        throw ValidationError("layer " + std::to_string(layer_ids[l]) + " " + role_name(role) +
                              " contains NaN or Inf");
      }
    }
  }
}

}  // namespace specedit
