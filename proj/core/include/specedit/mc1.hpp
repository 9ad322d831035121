// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>

namespace specedit {

struct Mc1Outcome {
  bool hit = false;
  std::size_t predicted = 0;
  /// Another candidate shares the maximal likelihood; the first one wins.
  bool tie = false;
};

/// Multiple-choice scoring: a hit iff the highest log-likelihood belongs to
/// the best answer. Needs at least two finite candidates.
Mc1Outcome score_mc1(std::span<const double> log_likelihoods, std::size_t best_index);

}  // namespace specedit
