// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "specedit/projection_bundle.hpp"

#include <algorithm>
#include <string>

#include "specedit/error.hpp"

namespace specedit {
namespace {

void check_spectrum(const Vector& sigma, Index width, const std::string& what) {
  if (sigma.size() != width) {
    throw ValidationError(what + " has " + std::to_string(sigma.size()) + " values, expected " +
                          std::to_string(width));
  }
  for (Index i = 0; i < sigma.size(); ++i) {
    if (!(sigma[i] >= 0.0)) throw ValidationError(what + " contains a negative value");
    if (i > 0 && sigma[i] > sigma[i - 1]) throw ValidationError(what + " is not non-increasing");
  }
}

}  // namespace

double orthonormality_error(const Matrix& columns) {
  if (columns.cols() == 0) return 0.0;
  const Matrix gram = columns.transpose() * columns;
  return (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

void LayerProjection::validate(double tolerance) const {
  const std::string where = "layer " + std::to_string(layer);
  const Index d = keep_plus.rows();
  if (d < 1) throw ValidationError(where + ": empty width");
  if (keep_minus.rows() != d) throw ValidationError(where + ": projection widths differ");
  if (k_plus < 1 || k_plus > d || keep_plus.cols() != k_plus) {
    throw ValidationError(where + ": k+ must satisfy 1 <= k+ <= d and match the column count");
  }
  if (k_minus < 0 || k_minus > d || keep_minus.cols() != d - k_minus) {
    throw ValidationError(where + ": k- must satisfy 0 <= d - k- <= d and match the column count");
  }
  check_spectrum(sigma_plus, d, where + " sigma+");
  check_spectrum(sigma_minus, d, where + " sigma-");
  if (!keep_plus.allFinite() || !keep_minus.allFinite()) {
    throw ValidationError(where + ": non-finite projection entries");
  }
  if (orthonormality_error(keep_plus) > tolerance || orthonormality_error(keep_minus) > tolerance) {
    throw ValidationError(where + ": projection columns are not orthonormal");
  }
}

const LayerProjection* ProjectionBundle::find(int layer_id) const {
  const auto it = std::find_if(layers.begin(), layers.end(),
                               [&](const LayerProjection& p) { return p.layer == layer_id; });
  return it == layers.end() ? nullptr : &*it;
}

std::vector<int> ProjectionBundle::layer_ids() const {
  std::vector<int> ids;
  ids.reserve(layers.size());
  for (const auto& p : layers) ids.push_back(p.layer);
  return ids;
}

void ProjectionBundle::validate(double tolerance) const {
  if (width < 1) throw ValidationError("bundle width must be positive");
  if (layers.empty()) throw ValidationError("bundle has no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (i > 0 && layers[i].layer <= layers[i - 1].layer) {
      throw ValidationError("bundle layer ids must be strictly increasing");
    }
    if (layers[i].width() != width) throw ValidationError("bundle layer width mismatch");
    layers[i].validate(tolerance);
  }
  fit_config.validate();
}

}  // namespace specedit
