// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "specedit/types.hpp"

namespace specedit {

struct ToyModelConfig {
  int layers = 4;
  int width = 16;
  int vocab = 256;
  int context = 32;
  std::uint64_t seed = 0;

  void validate() const;

  friend bool operator==(const ToyModelConfig&, const ToyModelConfig&) = default;
};

/// Receives (layer, token position, MLP output) and returns the vector that
/// replaces it in the residual stream.
using ActivationHook = std::function<Vector(int layer, int token, const Vector& mlp_out)>;

struct ForwardResult {
  /// vocab x T
  Matrix logits;
  /// One d x T matrix per layer: the MLP outputs as handed to the hook
  /// (before any replacement).
  std::vector<Matrix> mlp_outputs;
};

/// Weights of one pre-norm transformer block (single-head attention, GELU MLP).
struct ToyBlockWeights {
  MatrixF wq, wk, wv, wo;  // d x d
  MatrixF w_in;            // 4d x d
  MatrixF b_in;            // 4d x 1
  MatrixF w_out;           // d x 4d
  MatrixF b_out;           // d x 1
};

struct ToyModelWeights {
  MatrixF token_embedding;     // d x vocab
  MatrixF position_embedding;  // d x context
  std::vector<ToyBlockWeights> blocks;
  MatrixF unembedding;  // vocab x d
};

bool operator==(const ToyModelWeights& a, const ToyModelWeights& b);

/// A small decoder-only transformer with seeded random weights. The MLP
/// output of every block is exposed through ActivationHook. Weights are
/// immutable after construction; forward passes are const and may run
/// concurrently.
class ToyModel {
 public:
  explicit ToyModel(const ToyModelConfig& config);
  ToyModel(const ToyModelConfig& config, ToyModelWeights weights);

  const ToyModelConfig& config() const { return config_; }
  const ToyModelWeights& weights() const { return weights_; }
  int layers() const { return config_.layers; }
  int width() const { return config_.width; }

  /// Throws ValidationError for an empty or overlong input or an
  /// out-of-vocabulary id.
  ForwardResult forward(std::span<const int> tokens, const ActivationHook& hook = {}) const;

  /// MLP outputs at the last position, one d-vector per layer.
  std::vector<Vector> last_token_activations(std::span<const int> tokens) const;

 private:
  void prepare();

  struct BlockD {
    Matrix wq, wk, wv, wo, w_in, w_out;
    Vector b_in, b_out;
  };

  ToyModelConfig config_;
  ToyModelWeights weights_;
  Matrix token_embedding_;
  Matrix position_embedding_;
  Matrix unembedding_;
  std::vector<BlockD> blocks_;
};

/// "SEAM" checkpoint: config as JSON, weights as f32 LE.
std::uint64_t write_toy_model(const ToyModel& model, std::ostream& sink);
ToyModel read_toy_model(std::istream& source);
void save_toy_model(const ToyModel& model, const std::filesystem::path& path);
ToyModel load_toy_model(const std::filesystem::path& path);

}  // namespace specedit
