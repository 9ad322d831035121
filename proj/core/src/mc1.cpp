// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "specedit/mc1.hpp"

#include <cmath>

#include "specedit/error.hpp"

namespace specedit {

Mc1Outcome score_mc1(std::span<const double> log_likelihoods, std::size_t best_index) {
  if (log_likelihoods.size() < 2) throw ValidationError("MC1 needs at least two candidates");
  if (best_index >= log_likelihoods.size()) throw ValidationError("best-answer index out of range");
  for (double v : log_likelihoods) {
    if (!std::isfinite(v)) throw ValidationError("MC1 log-likelihoods must be finite");
  }
  Mc1Outcome out;
  for (std::size_t i = 1; i < log_likelihoods.size(); ++i) {
    if (log_likelihoods[i] > log_likelihoods[out.predicted]) out.predicted = i;
  }
  for (std::size_t i = 0; i < log_likelihoods.size(); ++i) {
    if (i != out.predicted && log_likelihoods[i] == log_likelihoods[out.predicted]) out.tie = true;
  }
  out.hit = out.predicted == best_index;
  return out;
}

}  // namespace specedit
