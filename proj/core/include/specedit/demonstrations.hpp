// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "specedit/activation_set.hpp"
#include "specedit/toy_model.hpp"

namespace specedit {

/// Ground-truth behaviour injected into toy-model activations.
///
/// Neutral activations at the injection layer carry per-prompt latent
/// scores along both directions. Positive demonstrations express the
/// positive direction at `magnitude` and drop the negative latent; negative
/// demonstrations add `magnitude` along the negative direction on top of the
/// neutral activation. Every demonstration gets isotropic Gaussian noise.
struct BehaviorSpec {
  Vector positive_direction;
  Vector negative_direction;
  int injection_layer = 2;
  double magnitude = 5.0;
  double noise = 0.1;
  /// Standard deviation of the neutral latent scores (in units of magnitude).
  double latent_scale = 1.0;

  double overlap() const { return positive_direction.dot(negative_direction); }

  /// Random unit directions; the negative one is orthogonalised against the
  /// positive one.
  static BehaviorSpec random(Index width, int injection_layer, std::uint64_t seed);

  void validate(Index width, int layers) const;
};

/// Random token ids of the given length, uniform over the vocabulary.
std::vector<int> random_prompt(const ToyModelConfig& config, int length, std::mt19937_64& rng);

inline constexpr int kDefaultPromptLength = 16;

/// n demonstration triplets recorded at the last token of random prompts.
/// Layers other than the injection layer get noise only. Latent scores are
/// centred over the n samples.
ActivationSet synthesize_demonstrations(const ToyModel& model, const BehaviorSpec& behavior,
                                        Index n, std::uint64_t seed,
                                        int prompt_length = kDefaultPromptLength);

}  // namespace specedit
