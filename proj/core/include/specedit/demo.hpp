// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "specedit/activation_set.hpp"
#include "specedit/demonstrations.hpp"
#include "specedit/edit_config.hpp"
#include "specedit/projection_bundle.hpp"
#include "specedit/toy_model.hpp"

namespace specedit {

/// Pass thresholds of the synthetic end-to-end check.
inline constexpr double kDemoMinNegativeReduction = 0.80;
inline constexpr double kDemoMinPositiveRetention = 0.60;

struct DemoOptions {
  std::uint64_t seed = 0;
  ToyModelConfig model{.layers = 4, .width = 16, .vocab = 256, .context = 64, .seed = 0};
  Index demonstrations = 200;
  int injection_layer = 2;
  double magnitude = 5.0;
  double noise = 0.1;
  double latent_scale = 2.0;
  int prompt_length = 64;
  /// Held-out prompts used for measurement.
  int eval_prompts = 200;
  EditConfig edit = default_edit();

  static EditConfig default_edit();
};

/// Mean absolute behaviour components of the held-out neutral activations at
/// the injection layer, before and after editing.
struct ComponentStats {
  double negative_before = 0.0;
  double negative_after = 0.0;
  double positive_before = 0.0;
  double positive_after = 0.0;
  /// Mean ||z - z_edited||_2 over the held-out last tokens.
  double mean_edit_norm = 0.0;

  /// 1 - after/before on the negative direction.
  double negative_reduction() const;
  /// after/before on the positive direction.
  double positive_retention() const;
};

struct DemoReport {
  std::vector<int> edited_layers;
  std::vector<Index> k_plus;
  std::vector<Index> k_minus;
  ComponentStats stats;
  bool pass = false;
  std::string summary;
};

/// Everything the demo builds, exposed for tests and the CLI.
struct DemoArtifacts {
  ToyModel model;
  BehaviorSpec behavior;
  ActivationSet demonstrations;
  ProjectionBundle bundle;
};

DemoArtifacts build_demo(const DemoOptions& options);

/// Runs held-out prompts through the model with the behaviour injected at the
/// last token and the bundle applied through the hook interface.
ComponentStats measure_edit(const DemoArtifacts& artifacts, const DemoOptions& options);

/// measure_edit plus the threshold verdict.
DemoReport evaluate_demo(const DemoArtifacts& artifacts, const DemoOptions& options);

/// generate -> fit -> edit -> measure, compared against the thresholds.
DemoReport run_demo(const DemoOptions& options);

}  // namespace specedit
