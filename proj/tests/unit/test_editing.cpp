// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>
#include <utility>
#include <vector>

#include "specedit/editing.hpp"
#include "specedit/error.hpp"
#include "specedit/fit.hpp"
#include "test_support.hpp"

namespace specedit {
namespace {

LayerProjection axis_projection(Index d, Index k_plus, Index keep_minus_from) {
  LayerProjection p;
  p.keep_plus = Matrix::Identity(d, d).leftCols(k_plus);
  p.k_plus = k_plus;
  p.keep_minus = Matrix::Identity(d, d).rightCols(d - keep_minus_from);
  p.k_minus = keep_minus_from;
  p.sigma_plus = Vector::Ones(d);
  p.sigma_minus = Vector::Ones(d);
  return p;
}

std::shared_ptr<const ProjectionBundle> share(ProjectionBundle b) {
  return std::make_shared<const ProjectionBundle>(std::move(b));
}

EditConfig explicit_config(std::vector<int> layers) {
  EditConfig c;
  c.layers = LayerSelection::explicit_layers(std::move(layers));
  return c;
}

// --- edit_token --------------------------------------------------------------

TEST(EditToken, AxisAlignedProjection) {
  const LayerProjection p = axis_projection(2, 1, 2);
  const BranchPair out = edit_token(Vector{{3.0, 4.0}}, p, EditMode::both);
  EXPECT_EQ(out.plus, (Vector{{3.0, 0.0}}));
  EXPECT_EQ(out.minus, Vector::Zero(2));
}

TEST(EditToken, IsIdempotent) {
  const ProjectionBundle b = testing::random_bundle(7, {0}, 1);
  const LayerProjection& p = b.layers[0];
  std::mt19937_64 rng(2);
  // Stored bases are f32, so projectors are idempotent to single precision.
  for (int i = 0; i < 20; ++i) {
    const Vector z = testing::gaussian_matrix(7, 1, rng);
    const BranchPair once = edit_token(z, p, EditMode::both);
    EXPECT_LE((edit_token(once.plus, p, EditMode::both).plus - once.plus).norm(), 1e-6 * z.norm());
    EXPECT_LE((edit_token(once.minus, p, EditMode::both).minus - once.minus).norm(), 1e-6 * z.norm());
  }
}

TEST(EditToken, ModeAlgebra) {
  const ProjectionBundle b = testing::random_bundle(6, {0}, 3);
  const LayerProjection& p = b.layers[0];
  std::mt19937_64 rng(4);
  const Vector z = testing::gaussian_matrix(6, 1, rng);
  const Vector plus = p.keep_plus * (p.keep_plus.transpose() * z);
  const Vector minus = p.keep_minus * (p.keep_minus.transpose() * z);

  const BranchPair both = edit_token(z, p, EditMode::both);
  EXPECT_EQ(both.plus, plus);
  EXPECT_EQ(both.minus, minus);
  const BranchPair pos = edit_token(z, p, EditMode::positive_only);
  EXPECT_EQ(pos.plus, plus);
  EXPECT_EQ(pos.minus, Vector::Zero(6));
  const BranchPair neg = edit_token(z, p, EditMode::negative_only);
  EXPECT_EQ(neg.plus, Vector::Zero(6));
  EXPECT_EQ(neg.minus, minus);
}

TEST(EditToken, WidthMismatch) {
  const LayerProjection p = axis_projection(3, 1, 1);
  EXPECT_THROW(edit_token(Vector::Zero(2), p, EditMode::both), ValidationError);
}

// --- merge -------------------------------------------------------------------

TEST(Merge, ScalarHandExample) {
  MergeState state(1);
  const Vector z{{2.0}}, plus{{1.0}}, minus{{0.5}};
  state.accumulate(z, plus, minus);
  EXPECT_DOUBLE_EQ(merge(plus, minus, state, MergeMode::norm_rescale)[0], 2.0);
}

TEST(Merge, ZeroDenominatorGivesZero) {
  MergeState state(2);
  const Vector z{{1.0, 5.0}}, plus{{1.0, 0.0}}, minus{{0.0, 0.0}};
  state.accumulate(z, plus, minus);
  const Vector out = merge(plus, minus, state, MergeMode::norm_rescale);
  EXPECT_EQ(out[1], 0.0);
  EXPECT_EQ(out[0], 1.0);
}

TEST(Merge, Average) {
  const Vector out = merge(Vector{{1.0}}, Vector{{3.0}}, MergeState(1), MergeMode::average);
  EXPECT_EQ(out[0], 2.0);
}

TEST(Merge, CorruptedStateIsNumericalError) {
  const MergeState bad = MergeState::from_sums(Vector{{-1.0}}, Vector{{1.0}}, 1);
  EXPECT_THROW(merge(Vector{{1.0}}, Vector{{0.0}}, bad, MergeMode::norm_rescale), NumericalError);
}

TEST(Merge, StateSumsAreMonotone) {
  MergeState state(3);
  std::mt19937_64 rng(5);
  Vector prev_raw = Vector::Zero(3), prev_edited = Vector::Zero(3);
  for (int t = 0; t < 10; ++t) {
    const Matrix m = testing::gaussian_matrix(3, 3, rng);
    state.accumulate(m.col(0), m.col(1), m.col(2));
    EXPECT_TRUE((state.raw_sum_sq().array() >= prev_raw.array()).all());
    EXPECT_TRUE((state.edited_sum_sq().array() >= prev_edited.array()).all());
    prev_raw = state.raw_sum_sq();
    prev_edited = state.edited_sum_sq();
  }
  EXPECT_EQ(state.tokens(), 10);
}

// --- nonlinear_edit ------------------------------------------------------------

TEST(NonlinearEdit, IdentityFeatureIsTheLinearPath) {
  const ProjectionBundle b = testing::random_bundle(5, {0}, 6);
  const LayerProjection& p = b.layers[0];
  std::mt19937_64 rng(7);
  EditConfig c;
  MergeState a(5), linear(5);
  for (int t = 0; t < 8; ++t) {
    const Vector z = testing::gaussian_matrix(5, 1, rng);
    const Vector got = nonlinear_edit(z, p, c, a);
    const BranchPair pair = edit_token(z, p, EditMode::both);
    linear.accumulate(z, pair.plus, pair.minus);
    EXPECT_EQ(got, merge(pair.plus, pair.minus, linear, MergeMode::norm_rescale));
  }
}

TEST(NonlinearEdit, TanhThroughFullSpanIsNearIdentity) {
  LayerProjection p = axis_projection(4, 4, 0);
  EditConfig c;
  c.feature = {FeatureKind::tanh, 1.0, 1e-6};
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  MergeState state(4);
  for (int t = 0; t < 30; ++t) {
    Vector z(4);
    for (Index i = 0; i < 4; ++i) z[i] = u(rng);
    EXPECT_LE((nonlinear_edit(z, p, c, state) - z).cwiseAbs().maxCoeff(), 1e-4);
  }
}

TEST(NonlinearEdit, InactiveBranchStaysZero) {
  // With squared-exponential, psi(0) is large; an inactive branch must not
  // leak it into the merge.
  const LayerProjection p = axis_projection(3, 3, 0);
  EditConfig c;
  c.feature = {FeatureKind::squared_exponential, 1.0, 1e-6};
  c.mode = EditMode::positive_only;
  c.merge = MergeMode::average;
  MergeState state(3);
  const Vector z{{0.5, -1.0, 2.0}};
  const Vector out = nonlinear_edit(z, p, c, state);
  EXPECT_LE((out - z.cwiseAbs2() / 2.0).norm(), 1e-9);
}

// --- Editor --------------------------------------------------------------------

TEST(Editor, FeatureKindMismatchIsRejected) {
  ProjectionBundle b = testing::random_bundle(3, {0}, 9);
  b.fit_config.feature.kind = FeatureKind::tanh;
  EditConfig c = explicit_config({0});
  c.feature.kind = FeatureKind::elu;
  EXPECT_THROW(Editor(share(b), c), ValidationError);
  c.feature.kind = FeatureKind::tanh;
  c.feature.alpha = 3.0;
  EXPECT_NO_THROW(Editor(share(b), c));
}

TEST(Editor, AlphaMismatchIsRejectedWhereAlphaMatters) {
  ProjectionBundle b = testing::random_bundle(3, {0}, 10);
  b.fit_config.feature = {FeatureKind::elu, 0.5, 1e-6};
  EditConfig c = explicit_config({0});
  c.feature = {FeatureKind::elu, 1.0, 1e-6};
  EXPECT_THROW(Editor(share(b), c), ValidationError);
}

TEST(Editor, ReverseNeedsAReverseBundle) {
  ProjectionBundle b = testing::random_bundle(3, {0}, 11);
  EditConfig c = explicit_config({0});
  c.mode = EditMode::reverse;
  EXPECT_THROW(Editor(share(b), c), ValidationError);
  b.fit_config.mode = EditMode::reverse;
  EXPECT_NO_THROW(Editor(share(b), c));
  c.mode = EditMode::both;
  EXPECT_THROW(Editor(share(b), c), ValidationError);
}

TEST(Editor, UnknownLayerIsRejected) {
  EXPECT_THROW(Editor(share(testing::random_bundle(3, {0, 1}, 12)), explicit_config({4})),
               ValidationError);
  EditConfig top;
  top.layers = LayerSelection::top(3);
  EXPECT_THROW(Editor(share(testing::random_bundle(3, {0, 1}, 12)), top), ValidationError);
}

TEST(Editor, FullSpanBundleIsIdentity) {
  const Editor editor(share(testing::identity_bundle(6, {0})), explicit_config({0}));
  std::mt19937_64 rng(13);
  const Matrix tokens = testing::gaussian_matrix(6, 12, rng);
  for (NormWindow w : {NormWindow::incremental, NormWindow::full_sequence}) {
    EXPECT_LE(testing::max_abs(editor.edit_sequence(0, tokens, w) - tokens), 1e-6);
  }
}

TEST(Editor, FullSequenceWindowPreservesTokenAxisNorms) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    const Editor editor(share(testing::random_bundle(8, {0}, 100 + trial)), explicit_config({0}));
    const Matrix tokens = testing::gaussian_matrix(8, 20, rng);
    const Matrix out = editor.edit_sequence(0, tokens, NormWindow::full_sequence);
    const Vector expected = tokens.rowwise().squaredNorm();
    const Vector got = out.rowwise().squaredNorm();
    EXPECT_LE((got - expected).cwiseAbs().maxCoeff(), 1e-6);
  }
}

// Incremental output at token t equals the full-window edit of the prefix.
TEST(Editor, IncrementalMatchesPrefixRecomputation) {
  const Editor editor(share(testing::random_bundle(5, {0}, 15)), explicit_config({0}));
  std::mt19937_64 rng(16);
  const Matrix tokens = testing::gaussian_matrix(5, 9, rng);
  const Matrix streamed = editor.edit_sequence(0, tokens, NormWindow::incremental);
  for (Index t = 0; t < tokens.cols(); ++t) {
    const Matrix prefix = editor.edit_sequence(0, tokens.leftCols(t + 1), NormWindow::full_sequence);
    EXPECT_LE((prefix.col(t) - streamed.col(t)).norm(), 1e-12);
  }
}

TEST(Editor, LinearPathCommutesWithScaling) {
  const Editor editor(share(testing::random_bundle(6, {0}, 17)), explicit_config({0}));
  std::mt19937_64 rng(18);
  const Matrix tokens = testing::gaussian_matrix(6, 7, rng);
  const Matrix base = editor.edit_sequence(0, tokens, NormWindow::incremental);
  for (double c : {-3.0, 0.25, 7.5}) {
    const Matrix scaled = editor.edit_sequence(0, c * tokens, NormWindow::incremental);
    EXPECT_LE(testing::max_abs(scaled - c * base), 1e-12 * std::abs(c) * (1.0 + testing::max_abs(base)));
  }
}

TEST(Editor, UnselectedLayersPassThrough) {
  const Editor editor(share(testing::random_bundle(4, {0, 1}, 19)), explicit_config({1}));
  std::mt19937_64 rng(20);
  const Matrix tokens = testing::gaussian_matrix(4, 5, rng);
  EXPECT_FALSE(editor.edits(0));
  EXPECT_EQ(editor.edit_sequence(0, tokens, NormWindow::incremental), tokens);
  EXPECT_EQ(editor.edit_sequence(7, tokens, NormWindow::incremental), tokens);
  EXPECT_NE(editor.edit_sequence(1, tokens, NormWindow::incremental), tokens);
}

TEST(Editor, ReverseEditEqualsForwardEditOnSwappedRoles) {
  const ActivationSet set = testing::random_activation_set(5, 40, {0}, 21);
  ActivationSet swapped = set;
  std::swap(swapped.layers[0].positive, swapped.layers[0].negative);
  EditConfig forward = explicit_config({0});
  forward.explained_variance = 0.8;
  EditConfig reverse = forward;
  reverse.mode = EditMode::reverse;
  const Editor a(share(fit_bundle(set, reverse)), reverse);
  const Editor b(share(fit_bundle(swapped, forward)), forward);
  std::mt19937_64 rng(22);
  const Matrix tokens = testing::gaussian_matrix(5, 6, rng);
  EXPECT_EQ(a.edit_sequence(0, tokens, NormWindow::incremental),
            b.edit_sequence(0, tokens, NormWindow::incremental));
}

// --- streams -------------------------------------------------------------------

std::vector<TokenActivations> random_stream(Index d, std::vector<int> layers, int tokens,
                                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<TokenActivations> out;
  for (int t = 0; t < tokens; ++t) {
    for (int layer : layers) out.push_back({layer, t, testing::gaussian_matrix(d, 1, rng)});
  }
  return out;
}

TEST(EditStream, EmptySelectionIsBytePassthrough) {
  const auto stream = random_stream(4, {0, 1}, 5, 23);
  const auto out = edit_sequence(stream, share(testing::random_bundle(4, {0, 1}, 24)),
                                 explicit_config({}));
  ASSERT_EQ(out.size(), stream.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out[i].layer, stream[i].layer);
    EXPECT_EQ(out[i].token, stream[i].token);
    EXPECT_EQ(out[i].z, stream[i].z);
  }
}

TEST(EditStream, InterleavedLayersMatchPerLayerEdits) {
  const auto bundle = share(testing::random_bundle(4, {0, 1, 2}, 25));
  const EditConfig config = explicit_config({0, 2});
  const auto stream = random_stream(4, {0, 1, 2}, 6, 26);
  const Editor editor(bundle, config);
  for (NormWindow w : {NormWindow::incremental, NormWindow::full_sequence}) {
    const auto out = edit_sequence(stream, bundle, config, w);
    for (int layer : {0, 1, 2}) {
      Matrix tokens(4, 6);
      for (const auto& item : stream) {
        if (item.layer == layer) tokens.col(item.token) = item.z;
      }
      const Matrix expected = editor.edit_sequence(layer, tokens, w);
      for (const auto& item : out) {
        if (item.layer == layer) EXPECT_EQ(item.z, Vector(expected.col(item.token)));
      }
    }
  }
}

TEST(EditStream, FullWindowPreservesNormsForEveryLayer) {
  std::mt19937_64 rng(27);
  const auto bundle = share(testing::random_bundle(32, {0, 1}, 28));
  const auto stream = random_stream(32, {0, 1}, 50, 29);
  const auto out = edit_sequence(stream, bundle, explicit_config({0, 1}), NormWindow::full_sequence);
  for (int layer : {0, 1}) {
    Vector raw = Vector::Zero(32), edited = Vector::Zero(32);
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out[i].layer != layer) continue;
      raw += stream[i].z.cwiseAbs2();
      edited += out[i].z.cwiseAbs2();
    }
    EXPECT_LE((raw - edited).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(EditStream, IsDeterministic) {
  const auto bundle = share(testing::random_bundle(5, {0}, 30));
  const auto stream = random_stream(5, {0}, 10, 31);
  const auto a = edit_sequence(stream, bundle, explicit_config({0}));
  const auto b = edit_sequence(stream, bundle, explicit_config({0}));
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].z, b[i].z);
}

TEST(EditStream, OutOfOrderTokensAreRejected) {
  auto stream = random_stream(3, {0}, 3, 32);
  std::swap(stream[0].token, stream[1].token);
  const auto bundle = share(testing::random_bundle(3, {0}, 33));
  for (NormWindow w : {NormWindow::incremental, NormWindow::full_sequence}) {
    EXPECT_THROW(edit_sequence(stream, bundle, explicit_config({0}), w), ValidationError);
  }
}

TEST(EditStream, WidthMismatchIsRejected) {
  const auto stream = random_stream(4, {0}, 2, 34);
  EXPECT_THROW(edit_sequence(stream, share(testing::random_bundle(3, {0}, 35)), explicit_config({0})),
               ValidationError);
}

TEST(StreamEditor, HookProtocol) {
  const auto editor = std::make_shared<const Editor>(share(testing::random_bundle(3, {0, 1}, 36)),
                                                     explicit_config({0, 1}));
  StreamEditor stream(editor);
  std::mt19937_64 rng(37);
  const Vector z = testing::gaussian_matrix(3, 1, rng);
  const Vector first = stream.edit(0, 0, z);
  EXPECT_NO_THROW(stream.edit(1, 0, z));
  EXPECT_THROW(stream.edit(0, 2, z), ValidationError);
  EXPECT_NO_THROW(stream.edit(0, 1, z));
  stream.reset();
  EXPECT_EQ(stream.edit(0, 0, z), first);
  EXPECT_THROW(stream.edit(1, 0, Vector::Zero(4)), ValidationError);
}

}  // namespace
}  // namespace specedit
