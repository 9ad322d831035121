// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "specedit/feature_map.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "specedit/error.hpp"

namespace specedit {
namespace {

double checked(double z) {
  if (!std::isfinite(z)) throw ValidationError("feature map input is not finite");
  return z;
}

}  // namespace

void FeatureSpec::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ValidationError("feature alpha must be positive");
  }
  if (!(epsilon > 0.0 && epsilon <= 1e-2)) {
    throw ValidationError("feature epsilon must lie in (0, 1e-2]");
  }
}

std::string_view feature_tag(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::identity: return "identity";
    case FeatureKind::squared_exponential: return "squared-exponential";
    case FeatureKind::tanh: return "tanh";
    case FeatureKind::elu: return "elu";
  }
  return "identity";
}

FeatureKind parse_feature_kind(std::string_view tag) {
  if (tag == "identity") return FeatureKind::identity;
  if (tag == "squared-exponential" || tag == "sqexp") return FeatureKind::squared_exponential;
  if (tag == "tanh") return FeatureKind::tanh;
  if (tag == "elu") return FeatureKind::elu;
  throw ValidationError("unknown feature kind '" + std::string(tag) + "'");
}

double apply_feature(double z, const FeatureSpec& spec) {
  checked(z);
  switch (spec.kind) {
    case FeatureKind::identity: return z;
    case FeatureKind::squared_exponential: return std::exp(-z * z / (2.0 * spec.alpha * spec.alpha));
    case FeatureKind::tanh: return std::tanh(z);
    case FeatureKind::elu: return z >= 0.0 ? z : spec.alpha * std::expm1(z);
  }
  return z;
}

double apply_pseudo_inverse(double z, const FeatureSpec& spec) {
  checked(z);
  const double eps = spec.epsilon;
  switch (spec.kind) {
    case FeatureKind::identity: return z;
    case FeatureKind::squared_exponential:
      return -2.0 * spec.alpha * spec.alpha * std::log(std::max(z, eps));
    case FeatureKind::tanh: {
      const double c = std::clamp(z, -1.0 + eps, 1.0 - eps);
      return 0.5 * std::log((1.0 + c) / (1.0 - c));
    }
    case FeatureKind::elu: {
      if (z >= 0.0) return z;
      // The -1 + eps clamp alone leaves log of a non-positive number when
      // alpha < 1; the second bound keeps the argument >= eps.
      const double lower = std::max(-1.0 + eps, -spec.alpha * (1.0 - eps));
      return std::log1p(std::max(z, lower) / spec.alpha);
    }
  }
  return z;
}

Vector apply_feature(const Vector& z, const FeatureSpec& spec) {
  return z.unaryExpr([&](double v) { return apply_feature(v, spec); });
}

Matrix apply_feature(const Matrix& z, const FeatureSpec& spec) {
  return z.unaryExpr([&](double v) { return apply_feature(v, spec); });
}

Vector apply_pseudo_inverse(const Vector& z, const FeatureSpec& spec) {
  return z.unaryExpr([&](double v) { return apply_pseudo_inverse(v, spec); });
}

Matrix apply_pseudo_inverse(const Matrix& z, const FeatureSpec& spec) {
  return z.unaryExpr([&](double v) { return apply_pseudo_inverse(v, spec); });
}

}  // namespace specedit
