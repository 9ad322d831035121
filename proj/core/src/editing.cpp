// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "specedit/editing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "specedit/error.hpp"
#include "specedit/feature_map.hpp"

namespace specedit {
namespace {

// Fit-time reverse is already baked into the projections.
EditMode runtime_mode(EditMode mode) { return mode == EditMode::reverse ? EditMode::both : mode; }

bool uses_alpha(FeatureKind kind) {
  return kind == FeatureKind::squared_exponential || kind == FeatureKind::elu;
}

void check_width(const Vector& z, const LayerProjection& projection) {
  if (z.size() != projection.width()) {
    throw ValidationError("activation width " + std::to_string(z.size()) +
                          " does not match bundle width " + std::to_string(projection.width()) +
                          " at layer " + std::to_string(projection.layer));
  }
}

// Both branches mapped back to the original space. An inactive branch is zero
// there, not the pseudo-inverse of zero.
BranchPair original_space_branches(const Vector& z, const LayerProjection& projection,
                                   const EditConfig& config) {
  const EditMode mode = runtime_mode(config.mode);
  const Vector lifted = apply_feature(z, config.feature);
  BranchPair pair = edit_token(lifted, projection, mode);
  if (mode == EditMode::negative_only) {
    pair.plus.setZero();
  } else {
    pair.plus = apply_pseudo_inverse(pair.plus, config.feature);
  }
  if (mode == EditMode::positive_only) {
    pair.minus.setZero();
  } else {
    pair.minus = apply_pseudo_inverse(pair.minus, config.feature);
  }
  return pair;
}

}  // namespace

BranchPair edit_token(const Vector& z, const LayerProjection& projection, EditMode mode) {
  check_width(z, projection);
  BranchPair out;
  if (mode == EditMode::negative_only) {
    out.plus = Vector::Zero(z.size());
  } else {
    out.plus = projection.keep_plus * (projection.keep_plus.transpose() * z);
  }
  if (mode == EditMode::positive_only) {
    out.minus = Vector::Zero(z.size());
  } else {
    out.minus = projection.keep_minus * (projection.keep_minus.transpose() * z);
  }
  return out;
}

MergeState::MergeState(Index width) : raw_(Vector::Zero(width)), edited_(Vector::Zero(width)) {}

MergeState MergeState::from_sums(Vector raw_sum_sq, Vector edited_sum_sq, Index tokens) {
  if (raw_sum_sq.size() != edited_sum_sq.size()) {
    throw ValidationError("merge state sums have different widths");
  }
  MergeState s;
  s.raw_ = std::move(raw_sum_sq);
  s.edited_ = std::move(edited_sum_sq);
  s.tokens_ = tokens;
  return s;
}

void MergeState::accumulate(const Vector& z, const Vector& plus, const Vector& minus) {
  if (raw_.size() == 0 && tokens_ == 0) {
    raw_ = Vector::Zero(z.size());
    edited_ = Vector::Zero(z.size());
  }
  if (z.size() != raw_.size() || plus.size() != raw_.size() || minus.size() != raw_.size()) {
    throw ValidationError("merge state width mismatch");
  }
  raw_ += z.cwiseAbs2();
  edited_ += (plus + minus).cwiseAbs2();
  ++tokens_;
}

Vector merge(const Vector& plus, const Vector& minus, const MergeState& state, MergeMode mode) {
  if (plus.size() != minus.size()) throw ValidationError("merge: branch widths differ");
  if (mode == MergeMode::average) return (plus + minus) * 0.5;

  const Vector& raw = state.raw_sum_sq();
  const Vector& edited = state.edited_sum_sq();
  if (raw.size() != plus.size() || edited.size() != plus.size()) {
    throw ValidationError("merge: state width does not match the activation width");
  }
  Vector out(plus.size());
  for (Index i = 0; i < plus.size(); ++i) {
    if (raw[i] < 0.0 || edited[i] < 0.0 || !std::isfinite(raw[i]) || !std::isfinite(edited[i])) {
      throw NumericalError("merge: corrupted running sums");
    }
    out[i] = edited[i] > 0.0 ? (plus[i] + minus[i]) * std::sqrt(raw[i]) / std::sqrt(edited[i]) : 0.0;
  }
  return out;
}

Vector nonlinear_edit(const Vector& z, const LayerProjection& projection, const EditConfig& config,
                      MergeState& state) {
  const BranchPair pair = original_space_branches(z, projection, config);
  state.accumulate(z, pair.plus, pair.minus);
  return merge(pair.plus, pair.minus, state, config.merge);
}

Editor::Editor(std::shared_ptr<const ProjectionBundle> bundle, EditConfig config)
    : bundle_(std::move(bundle)), config_(std::move(config)) {
  if (!bundle_) throw ValidationError("editor needs a projection bundle");
  config_.validate();
  const FeatureSpec& fitted = bundle_->fit_config.feature;
  if (fitted.kind != config_.feature.kind ||
      (uses_alpha(fitted.kind) && fitted.alpha != config_.feature.alpha)) {
    throw ValidationError("feature mismatch: bundle was fitted with '" +
                          std::string(feature_tag(fitted.kind)) + "', config requests '" +
                          std::string(feature_tag(config_.feature.kind)) + "'");
  }
  const bool bundle_reverse = bundle_->fit_config.mode == EditMode::reverse;
  const bool config_reverse = config_.mode == EditMode::reverse;
  if (bundle_reverse != config_reverse) {
    throw ValidationError(bundle_reverse ? "bundle was fitted in reverse mode; edit with --mode reverse"
                                         : "reverse mode needs a bundle fitted with --mode reverse");
  }
  layers_ = config_.layers.resolve(bundle_->layer_ids());
}

bool Editor::edits(int layer) const {
  return std::find(layers_.begin(), layers_.end(), layer) != layers_.end();
}

Matrix Editor::edit_sequence(int layer, const Matrix& tokens, NormWindow window) const {
  if (!edits(layer)) return tokens;
  const LayerProjection& projection = *bundle_->find(layer);
  if (tokens.rows() != projection.width()) {
    throw ValidationError("sequence width " + std::to_string(tokens.rows()) +
                          " does not match bundle width " + std::to_string(projection.width()));
  }
  Matrix out(tokens.rows(), tokens.cols());
  MergeState state(tokens.rows());
  if (window == NormWindow::incremental) {
    for (Index t = 0; t < tokens.cols(); ++t) {
      out.col(t) = nonlinear_edit(tokens.col(t), projection, config_, state);
    }
    return out;
  }
  std::vector<BranchPair> branches;
  branches.reserve(static_cast<std::size_t>(tokens.cols()));
  for (Index t = 0; t < tokens.cols(); ++t) {
    const Vector z = tokens.col(t);
    branches.push_back(original_space_branches(z, projection, config_));
    state.accumulate(z, branches.back().plus, branches.back().minus);
  }
  for (Index t = 0; t < tokens.cols(); ++t) {
    const auto& pair = branches[static_cast<std::size_t>(t)];
    out.col(t) = merge(pair.plus, pair.minus, state, config_.merge);
  }
  return out;
}

StreamEditor::StreamEditor(std::shared_ptr<const Editor> editor) : editor_(std::move(editor)) {
  if (!editor_) throw ValidationError("stream editor needs an editor");
}

Vector StreamEditor::edit(int layer, int token, const Vector& z) {
  if (!editor_->edits(layer)) return z;
  const LayerProjection& projection = *editor_->bundle().find(layer);
  auto [it, inserted] = states_.try_emplace(layer, projection.width());
  MergeState& state = it->second;
  if (token != state.tokens()) {
    throw ValidationError("layer " + std::to_string(layer) + ": expected token " +
                          std::to_string(state.tokens()) + ", got " + std::to_string(token));
  }
  return nonlinear_edit(z, projection, editor_->config(), state);
}

void StreamEditor::reset() { states_.clear(); }

std::vector<TokenActivations> edit_sequence(const std::vector<TokenActivations>& stream,
                                            std::shared_ptr<const ProjectionBundle> bundle,
                                            const EditConfig& config, NormWindow window) {
  auto editor = std::make_shared<const Editor>(std::move(bundle), config);
  std::vector<TokenActivations> out = stream;
  if (window == NormWindow::incremental) {
    StreamEditor streamer(editor);
    for (TokenActivations& item : out) {
      if (editor->edits(item.layer)) item.z = streamer.edit(item.layer, item.token, item.z);
    }
    return out;
  }
  // Gather each selected layer's tokens, edit them as one sequence, scatter.
  for (int layer : editor->layers()) {
    std::vector<std::size_t> positions;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out[i].layer == layer) positions.push_back(i);
    }
    if (positions.empty()) continue;
    const Index width = out[positions.front()].z.size();
    Matrix tokens(width, static_cast<Index>(positions.size()));
    for (std::size_t j = 0; j < positions.size(); ++j) {
      const TokenActivations& item = out[positions[j]];
      if (item.token != static_cast<int>(j)) {
        throw ValidationError("layer " + std::to_string(layer) + ": tokens out of order");
      }
      if (item.z.size() != width) throw ValidationError("inconsistent widths within a layer");
      tokens.col(static_cast<Index>(j)) = item.z;
    }
    const Matrix edited = editor->edit_sequence(layer, tokens, window);
    for (std::size_t j = 0; j < positions.size(); ++j) {
      out[positions[j]].z = edited.col(static_cast<Index>(j));
    }
  }
  return out;
}

}  // namespace specedit
