// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <vector>

#include "specedit/edit_config.hpp"
#include "specedit/projection_bundle.hpp"
#include "specedit/types.hpp"

namespace specedit {

/// Output of the paired projections for one activation vector.
struct BranchPair {
  Vector plus;
  Vector minus;
};

/// Applies keep_plus keep_plus^T and keep_minus keep_minus^T to `z`.
/// positive_only / negative_only zero the unused branch.
BranchPair edit_token(const Vector& z, const LayerProjection& projection, EditMode mode);

/// Per-coordinate running sums over the tokens of one sequence at one layer.
class MergeState {
 public:
  MergeState() = default;
  explicit MergeState(Index width);

  /// Adds z^2 and (plus + minus)^2 of one token.
  void accumulate(const Vector& z, const Vector& plus, const Vector& minus);

  const Vector& raw_sum_sq() const { return raw_; }
  const Vector& edited_sum_sq() const { return edited_; }
  Index tokens() const { return tokens_; }

  /// Builds a state from explicit sums (e.g. restored from a checkpoint).
  static MergeState from_sums(Vector raw_sum_sq, Vector edited_sum_sq, Index tokens);

 private:
  Vector raw_;
  Vector edited_;
  Index tokens_ = 0;
};

/// Combines the two branches.
///
/// norm_rescale: (plus_i + minus_i) * sqrt(raw_i) / sqrt(edited_i), with 0
/// wherever edited_i is 0. average: (plus_i + minus_i) / 2. The state must
/// already include the current token. Throws NumericalError on negative sums.
Vector merge(const Vector& plus, const Vector& minus, const MergeState& state, MergeMode mode);

/// Feature-space edit of one token: phi, paired projections, pseudo-inverse
/// of each branch, then accumulation into `state` and merge in the original
/// space. With the identity feature this is the linear edit.
Vector nonlinear_edit(const Vector& z, const LayerProjection& projection, const EditConfig& config,
                      MergeState& state);

/// How far back the norm-rescale sums reach.
enum class NormWindow {
  /// Tokens seen so far (online decoding, no lookahead).
  incremental,
  /// The whole sequence; used for offline dumps.
  full_sequence,
};

/// A bundle bound to an edit configuration. Checks compatibility up front and
/// is immutable afterwards, so one instance can serve many streams.
class Editor {
 public:
  /// Throws ValidationError when the feature kind differs from the one the
  /// bundle was fitted with, when reverse mode is requested for a forward
  /// bundle (or vice versa), or when a selected layer is missing from the
  /// bundle.
  Editor(std::shared_ptr<const ProjectionBundle> bundle, EditConfig config);

  const ProjectionBundle& bundle() const { return *bundle_; }
  const EditConfig& config() const { return config_; }
  const std::vector<int>& layers() const { return layers_; }
  bool edits(int layer) const;

  /// Edits a whole d x T sequence at one layer. Unselected layers are
  /// returned unchanged.
  Matrix edit_sequence(int layer, const Matrix& tokens, NormWindow window) const;

 private:
  friend class StreamEditor;
  std::shared_ptr<const ProjectionBundle> bundle_;
  EditConfig config_;
  std::vector<int> layers_;
};

/// Hook-style editor for one sequence: the host model calls
/// edit(layer, token, z) for each token in order and receives the
/// replacement vector. Running sums are kept per layer.
class StreamEditor {
 public:
  explicit StreamEditor(std::shared_ptr<const Editor> editor);

  /// Throws ValidationError on width mismatch or when `token` is not the next
  /// index for `layer`.
  Vector edit(int layer, int token, const Vector& z);

  void reset();

 private:
  std::shared_ptr<const Editor> editor_;
  std::map<int, MergeState> states_;
};

/// One token's activations at one layer.
struct TokenActivations {
  int layer = 0;
  int token = 0;
  Vector z;
};

/// Edits a stream of token activations (any interleaving of layers, tokens in
/// order within a layer). Tokens of unselected layers pass through
/// bit-identical.
std::vector<TokenActivations> edit_sequence(const std::vector<TokenActivations>& stream,
                                            std::shared_ptr<const ProjectionBundle> bundle,
                                            const EditConfig& config,
                                            NormWindow window = NormWindow::incremental);

}  // namespace specedit
