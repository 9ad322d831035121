// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "specedit/demo.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <random>
#include <sstream>

#include "specedit/editing.hpp"
#include "specedit/fit.hpp"

namespace specedit {
namespace {

// Independent streams for model, behaviour, demonstrations and evaluation.
struct DemoSeeds {
  std::uint64_t model, behavior, demonstrations, evaluation;

  explicit DemoSeeds(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    model = rng();
    behavior = rng();
    demonstrations = rng();
    evaluation = rng();
  }
};

}  // namespace

EditConfig DemoOptions::default_edit() {
  EditConfig c;
  c.explained_variance = 0.99;
  c.layers = LayerSelection::top(2);
  return c;
}

double ComponentStats::negative_reduction() const {
  return negative_before > 0.0 ? 1.0 - negative_after / negative_before : 0.0;
}

double ComponentStats::positive_retention() const {
  return positive_before > 0.0 ? positive_after / positive_before : 0.0;
}

DemoArtifacts build_demo(const DemoOptions& options) {
  const DemoSeeds seeds(options.seed);
  ToyModelConfig model_config = options.model;
  model_config.seed = seeds.model;
  ToyModel model(model_config);

  BehaviorSpec behavior =
      BehaviorSpec::random(model.width(), options.injection_layer, seeds.behavior);
  behavior.magnitude = options.magnitude;
  behavior.noise = options.noise;
  behavior.latent_scale = options.latent_scale;

  ActivationSet set = synthesize_demonstrations(model, behavior, options.demonstrations,
                                                seeds.demonstrations, options.prompt_length);
  ProjectionBundle bundle = fit_bundle(set, options.edit);
  return DemoArtifacts{std::move(model), std::move(behavior), std::move(set), std::move(bundle)};
}

ComponentStats measure_edit(const DemoArtifacts& artifacts, const DemoOptions& options) {
  const DemoSeeds seeds(options.seed);
  const BehaviorSpec& behavior = artifacts.behavior;
  auto editor = std::make_shared<const Editor>(
      std::make_shared<const ProjectionBundle>(artifacts.bundle), options.edit);

  std::mt19937_64 rng(seeds.evaluation);
  std::normal_distribution<double> latent(0.0, behavior.latent_scale);
  ComponentStats stats;
  const int last = options.prompt_length - 1;
  for (int p = 0; p < options.eval_prompts; ++p) {
    const std::vector<int> prompt = random_prompt(artifacts.model.config(), options.prompt_length, rng);
    const double a = latent(rng);
    const double c = latent(rng);
    const Vector injected = behavior.magnitude * (a * behavior.positive_direction +
                                                  c * behavior.negative_direction);
    StreamEditor stream(editor);
    Vector before;
    Vector after;
    artifacts.model.forward(prompt, [&](int layer, int token, const Vector& z) {
      Vector v = z;
      const bool probe = layer == behavior.injection_layer && token == last;
      if (probe) {
        v += injected;
        before = v;
      }
      Vector edited = stream.edit(layer, token, v);
      if (probe) after = edited;
      return edited;
    });
    stats.negative_before += std::abs(behavior.negative_direction.dot(before));
    stats.negative_after += std::abs(behavior.negative_direction.dot(after));
    stats.positive_before += std::abs(behavior.positive_direction.dot(before));
    stats.positive_after += std::abs(behavior.positive_direction.dot(after));
    stats.mean_edit_norm += (before - after).norm();
  }
  const double count = std::max(1, options.eval_prompts);
  stats.negative_before /= count;
  stats.negative_after /= count;
  stats.positive_before /= count;
  stats.positive_after /= count;
  stats.mean_edit_norm /= count;
  return stats;
}

DemoReport evaluate_demo(const DemoArtifacts& artifacts, const DemoOptions& options) {
  DemoReport report;
  for (const auto& p : artifacts.bundle.layers) {
    report.edited_layers.push_back(p.layer);
    report.k_plus.push_back(p.k_plus);
    report.k_minus.push_back(p.k_minus);
  }
  report.stats = measure_edit(artifacts, options);
  const double reduction = report.stats.negative_reduction();
  const double retention = report.stats.positive_retention();
  report.pass = reduction >= kDemoMinNegativeReduction && retention >= kDemoMinPositiveRetention;

  std::ostringstream s;
  s << "negative component: " << report.stats.negative_before << " -> "
    << report.stats.negative_after << " (reduction " << reduction << ", need >= "
    << kDemoMinNegativeReduction << ")\n"
    << "positive component: " << report.stats.positive_before << " -> "
    << report.stats.positive_after << " (retention " << retention << ", need >= "
    << kDemoMinPositiveRetention << ")\n";
  if (reduction < 0.0) s << "negative component increased after editing\n";
  s << (report.pass ? "PASS" : "FAIL");
  report.summary = s.str();
  return report;
}

DemoReport run_demo(const DemoOptions& options) { return evaluate_demo(build_demo(options), options); }

}  // namespace specedit
