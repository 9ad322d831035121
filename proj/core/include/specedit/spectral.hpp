// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "specedit/activation_set.hpp"
#include "specedit/projection_bundle.hpp"
#include "specedit/types.hpp"

namespace specedit {

/// A = U diag(sigma) V^T with full orthogonal U (rows x rows) and V
/// (cols x cols). sigma is non-increasing and has min(rows, cols) entries.
///
/// Sign convention: the first entry of each U column with magnitude above
/// 1e-12 is non-negative (the paired V column is flipped with it). Columns
/// with equal singular values keep the order produced by the backend.
struct SpectralDecomposition {
  Matrix U;
  Vector sigma;
  Matrix V;
};

/// Singular values below this fraction of sigma_1 count as zero in
/// explained-variance sums.
inline constexpr double kSingularFloor = 1e-12;

/// (1/n) * sum_i a_i b_i^T over the n paired columns of `a` (p x n) and `b`
/// (q x n). With `center`, each set's empirical mean is subtracted first.
Matrix cross_covariance(const Matrix& a, const Matrix& b, bool center = false);

SpectralDecomposition svd(const Matrix& a);

/// Explained-variance ratios sigma_j^2 / sum sigma^2 with the singular floor
/// applied. Throws NumericalError when every value is zero.
Vector explained_variance_ratios(std::span<const double> sigma);

/// Smallest k with cumulative explained variance >= K.
///
/// Throws ValidationError if K is outside (0, 1] or sigma is negative or
/// increasing, and NumericalError if every singular value is zero.
std::size_t select_rank(std::span<const double> sigma, double explained_variance);

/// Keep-top projection of omega_plus and keep-complement projection of
/// omega_minus, each ranked with the same explained-variance threshold.
/// The returned record has layer id 0; callers fill it in.
LayerProjection build_projections(const Matrix& omega_plus, const Matrix& omega_minus,
                                  double explained_variance);

/// One-hot label matrix (2 x (n_positive + n_negative)): positives first.
Matrix one_hot_labels(Index n_positive, Index n_negative);

/// Sum of singular values of cross_covariance(mixed, labels), uncentered.
/// Each label column must be one-hot over two classes.
double signature(const Matrix& mixed, const Matrix& labels);

struct SignatureResult {
  std::vector<int> layers;
  std::vector<double> raw;
  /// Raw values divided by their maximum; absent when every raw value is 0.
  std::optional<std::vector<double>> normalized;
  Index label_rows = 2;
  Index label_cols = 0;
};

/// Per-layer signatures of positive vs negative activations.
SignatureResult layer_signatures(const ActivationSet& set);

}  // namespace specedit
