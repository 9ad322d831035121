// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "specedit/spectral.hpp"

#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "specedit/error.hpp"

namespace specedit {
namespace {

constexpr double kSignThreshold = 1e-12;

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw ValidationError(std::string(what) + " contains NaN or Inf");
}

void check_spectrum(std::span<const double> sigma) {
  if (sigma.empty()) throw ValidationError("empty singular-value list");
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (!(sigma[i] >= 0.0) || !std::isfinite(sigma[i])) {
      throw ValidationError("singular values must be finite and non-negative");
    }
    if (i > 0 && sigma[i] > sigma[i - 1]) {
      throw ValidationError("singular values must be non-increasing");
    }
  }
  if (sigma[0] == 0.0) {
    throw NumericalError("degenerate covariance: all singular values zero");
  }
}

}  // namespace

Matrix cross_covariance(const Matrix& a, const Matrix& b, bool center) {
  if (a.cols() != b.cols()) {
    throw ValidationError("cross_covariance: sample counts differ (" + std::to_string(a.cols()) +
                          " vs " + std::to_string(b.cols()) + ")");
  }
  if (a.cols() == 0) throw ValidationError("cross_covariance: no samples");
  require_finite(a, "cross_covariance input");
  require_finite(b, "cross_covariance input");
  const double inv_n = 1.0 / static_cast<double>(a.cols());
  if (!center) return (a * b.transpose()) * inv_n;
  const Matrix ac = a.colwise() - a.rowwise().mean();
  const Matrix bc = b.colwise() - b.rowwise().mean();
  return (ac * bc.transpose()) * inv_n;
}

SpectralDecomposition svd(const Matrix& a) {
  if (a.size() == 0) throw ValidationError("svd: empty matrix");
  require_finite(a, "svd input");
  Eigen::JacobiSVD<Matrix> solver(a, Eigen::ComputeFullU | Eigen::ComputeFullV);

  SpectralDecomposition out{solver.matrixU(), solver.singularValues(), solver.matrixV()};
  const Index pairs = out.sigma.size();
  for (Index j = 0; j < out.U.cols(); ++j) {
    for (Index i = 0; i < out.U.rows(); ++i) {
      const double u = out.U(i, j);
      if (std::abs(u) > kSignThreshold) {
        if (u < 0.0) {
          out.U.col(j) *= -1.0;
          if (j < pairs) out.V.col(j) *= -1.0;
        }
        break;
      }
    }
  }
  return out;
}

Vector explained_variance_ratios(std::span<const double> sigma) {
  check_spectrum(sigma);
  const double floor = kSingularFloor * sigma[0];
  double total = 0.0;
  for (double s : sigma) {
    if (s >= floor) total += s * s;
  }
  Vector ratios(static_cast<Index>(sigma.size()));
  for (std::size_t j = 0; j < sigma.size(); ++j) {
    ratios[static_cast<Index>(j)] = sigma[j] >= floor ? sigma[j] * sigma[j] / total : 0.0;
  }
  return ratios;
}

std::size_t select_rank(std::span<const double> sigma, double explained_variance) {
  if (!(explained_variance > 0.0 && explained_variance <= 1.0)) {
    throw ValidationError("explained-variance threshold K must lie in (0, 1]");
  }
  check_spectrum(sigma);
  const double floor = kSingularFloor * sigma[0];
  double total = 0.0;
  for (double s : sigma) {
    if (s >= floor) total += s * s;
  }
  // The running sum repeats the additions of `total` in the same order, so it
  // reaches exactly `total` at the last retained value and K = 1 terminates
  // there.
  double cumulative = 0.0;
  for (std::size_t j = 0; j < sigma.size(); ++j) {
    if (sigma[j] >= floor) cumulative += sigma[j] * sigma[j];
    if (cumulative / total >= explained_variance) return j + 1;
  }
  return sigma.size();
}

LayerProjection build_projections(const Matrix& omega_plus, const Matrix& omega_minus,
                                  double explained_variance) {
  const Index d = omega_plus.rows();
  if (d == 0 || omega_plus.cols() != d || omega_minus.rows() != d || omega_minus.cols() != d) {
    throw ValidationError("build_projections: covariances must be square with equal width");
  }
  const SpectralDecomposition plus = svd(omega_plus);
  const SpectralDecomposition minus = svd(omega_minus);
  const auto k_plus = static_cast<Index>(
      select_rank(std::span<const double>(plus.sigma.data(), plus.sigma.size()), explained_variance));
  const auto k_minus = static_cast<Index>(select_rank(
      std::span<const double>(minus.sigma.data(), minus.sigma.size()), explained_variance));

  LayerProjection out;
  out.keep_plus = plus.U.leftCols(k_plus);
  out.keep_minus = minus.U.rightCols(d - k_minus);
  out.k_plus = k_plus;
  out.k_minus = k_minus;
  out.sigma_plus = plus.sigma;
  out.sigma_minus = minus.sigma;
  return out;
}

Matrix one_hot_labels(Index n_positive, Index n_negative) {
  Matrix labels = Matrix::Zero(2, n_positive + n_negative);
  labels.row(0).head(n_positive).setOnes();
  labels.row(1).tail(n_negative).setOnes();
  return labels;
}

double signature(const Matrix& mixed, const Matrix& labels) {
  if (labels.rows() != 2) throw ValidationError("signature: label matrix must have 2 rows");
  if (mixed.cols() != labels.cols()) {
    throw ValidationError("signature: activation and label column counts differ");
  }
  for (Index j = 0; j < labels.cols(); ++j) {
    const double a = labels(0, j);
    const double b = labels(1, j);
    const bool one_hot = (a == 1.0 && b == 0.0) || (a == 0.0 && b == 1.0);
    if (!one_hot) {
      throw ValidationError("signature: label column " + std::to_string(j) + " is not one-hot");
    }
  }
  return svd(cross_covariance(mixed, labels)).sigma.sum();
}

SignatureResult layer_signatures(const ActivationSet& set) {
  set.validate();
  const Index n = set.count();
  const Matrix labels = one_hot_labels(n, n);
  SignatureResult out;
  out.label_cols = labels.cols();
  out.layers = set.layer_ids;
  double max_raw = 0.0;
  for (const LayerSamples& layer : set.layers) {
    Matrix mixed(set.width(), 2 * n);
    mixed << layer.positive.cast<double>(), layer.negative.cast<double>();
    const double value = signature(mixed, labels);
    out.raw.push_back(value);
    max_raw = std::max(max_raw, value);
  }
  if (max_raw > 0.0) {
    std::vector<double> normalized;
    normalized.reserve(out.raw.size());
    for (double v : out.raw) normalized.push_back(v / max_raw);
    out.normalized = std::move(normalized);
  }
  return out;
}

}  // namespace specedit
