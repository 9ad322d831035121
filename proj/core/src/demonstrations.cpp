// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "specedit/demonstrations.hpp"

#include <cmath>
#include <string>

#include "specedit/error.hpp"

namespace specedit {
namespace {

Vector gaussian_vector(Index size, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Vector v(size);
  for (Index i = 0; i < size; ++i) v[i] = dist(rng);
  return v;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

BehaviorSpec BehaviorSpec::random(Index width, int injection_layer, std::uint64_t seed) {
  if (width < 2) throw ValidationError("behaviour directions need width >= 2");
  std::mt19937_64 rng(seed);
  BehaviorSpec spec;
  spec.injection_layer = injection_layer;
  spec.positive_direction = gaussian_vector(width, 1.0, rng).normalized();
  Vector negative = gaussian_vector(width, 1.0, rng);
  negative -= negative.dot(spec.positive_direction) * spec.positive_direction;
  spec.negative_direction = negative.normalized();
  return spec;
}

void BehaviorSpec::validate(Index width, int layers) const {
  if (positive_direction.size() != width || negative_direction.size() != width) {
    throw ValidationError("behaviour directions do not match the model width");
  }
  if (std::abs(positive_direction.norm() - 1.0) > 1e-8 ||
      std::abs(negative_direction.norm() - 1.0) > 1e-8) {
    throw ValidationError("behaviour directions must be unit vectors");
  }
  if (injection_layer < 0 || injection_layer >= layers) {
    throw ValidationError("injection layer outside the model");
  }
  if (!(magnitude >= 0.0) || !(noise >= 0.0) || !(latent_scale >= 0.0)) {
    throw ValidationError("behaviour magnitude, noise and latent scale must be non-negative");
  }
}

std::vector<int> random_prompt(const ToyModelConfig& config, int length, std::mt19937_64& rng) {
  if (length < 1 || length > config.context) {
    throw ValidationError("prompt length outside [1, context]");
  }
  std::uniform_int_distribution<int> dist(0, config.vocab - 1);
  std::vector<int> tokens(static_cast<std::size_t>(length));
  for (int& t : tokens) t = dist(rng);
  return tokens;
}

ActivationSet synthesize_demonstrations(const ToyModel& model, const BehaviorSpec& behavior,
                                        Index n, std::uint64_t seed, int prompt_length) {
  if (n < 1) throw ValidationError("need at least one demonstration");
  const Index d = model.width();
  behavior.validate(d, model.layers());
  std::mt19937_64 rng(seed);

  std::vector<std::vector<int>> prompts;
  prompts.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) prompts.push_back(random_prompt(model.config(), prompt_length, rng));

  // Latent scores, centred so they add nothing to the sample means.
  Vector latent_plus = gaussian_vector(n, behavior.latent_scale, rng);
  Vector latent_minus = gaussian_vector(n, behavior.latent_scale, rng);
  latent_plus.array() -= latent_plus.mean();
  latent_minus.array() -= latent_minus.mean();

  ActivationSet set;
  for (int l = 0; l < model.layers(); ++l) {
    set.layer_ids.push_back(l);
    set.layers.push_back({MatrixF(d, n), MatrixF(d, n), MatrixF(d, n)});
  }

  const Vector& b_plus = behavior.positive_direction;
  const Vector& b_minus = behavior.negative_direction;
  const double m = behavior.magnitude;
  for (Index i = 0; i < n; ++i) {
    const std::vector<Vector> acts = model.last_token_activations(prompts[static_cast<std::size_t>(i)]);
    for (int l = 0; l < model.layers(); ++l) {
      const Vector& h = acts[static_cast<std::size_t>(l)];
      Vector neutral = h;
      Vector positive = h + gaussian_vector(d, behavior.noise, rng);
      Vector negative = h + gaussian_vector(d, behavior.noise, rng);
      if (l == behavior.injection_layer) {
        neutral += m * (latent_plus[i] * b_plus + latent_minus[i] * b_minus);
        positive += m * (latent_plus[i] + 1.0) * b_plus;
        negative = neutral + m * b_minus + (negative - h);
      }
      LayerSamples& s = set.layers[static_cast<std::size_t>(l)];
      s.neutral.col(i) = neutral.cast<float>();
      s.positive.col(i) = positive.cast<float>();
      s.negative.col(i) = negative.cast<float>();
    }
  }

  set.meta = {{"source", "toy-model"},
              {"hook", "mlp_output"},
              {"position", "last_token"},
              {"model_seed", std::to_string(model.config().seed)},
              {"demonstration_seed", std::to_string(seed)},
              {"injection_layer", std::to_string(behavior.injection_layer)},
              {"magnitude", format_double(behavior.magnitude)},
              {"noise", format_double(behavior.noise)},
              {"latent_scale", format_double(behavior.latent_scale)},
              {"direction_overlap", format_double(behavior.overlap())}};
  return set;
}

}  // namespace specedit
