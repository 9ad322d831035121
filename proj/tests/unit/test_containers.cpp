// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <sstream>

#include "specedit/containers.hpp"
#include "specedit/error.hpp"
#include "specedit/fit.hpp"
#include "test_support.hpp"

namespace specedit {
namespace {

std::string to_bytes(const ActivationSet& set) {
  std::ostringstream out;
  write_activation_set(set, out);
  return out.str();
}

std::string to_bytes(const ProjectionBundle& bundle) {
  std::ostringstream out;
  write_projection_bundle(bundle, out);
  return out.str();
}

ActivationSet set_from(const std::string& bytes) {
  std::istringstream in(bytes);
  return read_activation_set(in);
}

ProjectionBundle bundle_from(const std::string& bytes) {
  std::istringstream in(bytes);
  return read_projection_bundle(in);
}

std::uint64_t u64_at(const std::string& bytes, std::size_t offset) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(bytes[offset + i]);
  return v;
}

std::uint32_t u32_at(const std::string& bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(bytes[offset + i]);
  return v;
}

float f32_at(const std::string& bytes, std::size_t offset) {
  return std::bit_cast<float>(u32_at(bytes, offset));
}

void put_f32(std::string& bytes, std::size_t offset, float value) {
  auto bits = std::bit_cast<std::uint32_t>(value);
  for (int i = 0; i < 4; ++i) {
    bytes[offset + i] = static_cast<char>(bits & 0xffu);
    bits >>= 8;
  }
}

// magic + version + JSON length
constexpr std::size_t kPreamble = 16;

TEST(ActivationContainer, TinySetByteCount) {
  ActivationSet set;
  set.layer_ids = {0};
  set.layers.push_back({MatrixF::Zero(2, 1), MatrixF::Zero(2, 1), MatrixF::Zero(2, 1)});
  const std::string bytes = to_bytes(set);
  ASSERT_GE(bytes.size(), kPreamble);
  EXPECT_EQ(bytes.substr(0, 4), "SEAD");
  EXPECT_EQ(u32_at(bytes, 4), kActivationVersion);
  const std::uint64_t json = u64_at(bytes, 8);
  // 3 roles x 2 floats x 4 bytes
  EXPECT_EQ(bytes.size(), kPreamble + json + 24);

  std::ostringstream out;
  EXPECT_EQ(write_activation_set(set, out), bytes.size());
}

TEST(ActivationContainer, PayloadOrderIsLayerRoleColumnMajor) {
  ActivationSet set;
  set.layer_ids = {4, 9};
  for (int l = 0; l < 2; ++l) {
    LayerSamples s{MatrixF(2, 2), MatrixF(2, 2), MatrixF(2, 2)};
    for (int r = 0; r < 3; ++r) {
      MatrixF& m = s.get(kAllRoles[r]);
      for (int j = 0; j < 2; ++j) {
        for (int i = 0; i < 2; ++i) m(i, j) = static_cast<float>(100 * l + 10 * r + 2 * j + i);
      }
    }
    set.layers.push_back(std::move(s));
  }
  const std::string bytes = to_bytes(set);
  const std::size_t payload = kPreamble + u64_at(bytes, 8);
  ASSERT_EQ(bytes.size(), payload + 2 * 3 * 4 * 4);
  std::size_t offset = payload;
  for (int l = 0; l < 2; ++l) {
    for (int r = 0; r < 3; ++r) {
      for (int k = 0; k < 4; ++k) {
        EXPECT_EQ(f32_at(bytes, offset), static_cast<float>(100 * l + 10 * r + k));
        offset += 4;
      }
    }
  }
}

TEST(ActivationContainer, HeaderDescribesShapes) {
  const ActivationSet set = testing::random_activation_set(3, 4, {1, 5}, 11);
  const std::string bytes = to_bytes(set);
  const std::string json = bytes.substr(kPreamble, u64_at(bytes, 8));
  EXPECT_NE(json.find("\"d\":3"), std::string::npos) << json;
  EXPECT_NE(json.find("\"n\":4"), std::string::npos) << json;
  EXPECT_NE(json.find("\"layers\":[1,5]"), std::string::npos) << json;
  EXPECT_NE(json.find("f32le"), std::string::npos) << json;
}

TEST(ActivationContainer, RoundTripIsBitExact) {
  const ActivationSet set = testing::random_activation_set(5, 7, {0, 3, 4}, 12);
  const std::string bytes = to_bytes(set);
  const ActivationSet back = set_from(bytes);
  EXPECT_TRUE(back == set);
  EXPECT_EQ(to_bytes(back), bytes);
}

TEST(ActivationContainer, RejectsBundleMagic) {
  const std::string bytes = to_bytes(testing::random_bundle(3, {0}, 13));
  EXPECT_THROW(set_from(bytes), FormatError);
}

TEST(ActivationContainer, RejectsUnknownVersion) {
  std::string bytes = to_bytes(testing::random_activation_set(2, 2, {0}, 14));
  bytes[4] = 7;
  EXPECT_THROW(set_from(bytes), FormatError);
}

TEST(ActivationContainer, RejectsTruncation) {
  const std::string bytes = to_bytes(testing::random_activation_set(2, 3, {0, 1}, 15));
  for (std::size_t cut : {std::size_t{2}, std::size_t{10}, kPreamble + 3, bytes.size() - 1,
                          bytes.size() - 5}) {
    EXPECT_THROW(set_from(bytes.substr(0, cut)), FormatError) << "cut at " << cut;
  }
}

TEST(ActivationContainer, RejectsTrailingBytes) {
  const std::string bytes = to_bytes(testing::random_activation_set(2, 3, {0}, 16));
  EXPECT_THROW(set_from(bytes + "x"), FormatError);
}

TEST(ActivationContainer, RejectsNanPayload) {
  std::string bytes = to_bytes(testing::random_activation_set(2, 3, {0}, 17));
  put_f32(bytes, bytes.size() - 4, std::numeric_limits<float>::quiet_NaN());
  EXPECT_THROW(set_from(bytes), ValidationError);
}

TEST(ActivationContainer, WriteRejectsInvalidSet) {
  std::ostringstream out;
  EXPECT_THROW(write_activation_set(ActivationSet{}, out), ValidationError);
  ActivationSet set = testing::random_activation_set(2, 3, {0}, 18);
  set.layers[0].neutral(0, 0) = std::numeric_limits<float>::infinity();
  EXPECT_THROW(write_activation_set(set, out), ValidationError);
}

TEST(ActivationContainer, MetaRoundTrips) {
  ActivationSet set = testing::random_activation_set(2, 1, {0}, 19);
  set.meta["model"] = "toy \"quoted\" \xc3\xa9";
  EXPECT_EQ(set_from(to_bytes(set)).meta, set.meta);
}

TEST(ActivationContainer, SaveIsAtomicAndLoadable) {
  testing::TempDir dir;
  const ActivationSet set = testing::random_activation_set(3, 2, {0}, 20);
  save_activation_set(set, dir / "a.sead");
  EXPECT_TRUE(load_activation_set(dir / "a.sead") == set);
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& entry : std::filesystem::directory_iterator(dir.path())) ++files;
  EXPECT_EQ(files, 1u);
}

TEST(ActivationContainer, FailedWriteLeavesNoFile) {
  testing::TempDir dir;
  EXPECT_THROW(save_activation_set(ActivationSet{}, dir / "bad.sead"), ValidationError);
  EXPECT_TRUE(std::filesystem::is_empty(dir.path()));
}

TEST(ActivationContainer, MissingFileIsAnError) {
  testing::TempDir dir;
  EXPECT_THROW(load_activation_set(dir / "absent.sead"), ValidationError);
}

TEST(ActivationContainer, PeekMagicDoesNotConsume) {
  std::istringstream in(to_bytes(testing::random_activation_set(2, 2, {0}, 21)));
  EXPECT_EQ(peek_magic(in), "SEAD");
  EXPECT_NO_THROW(read_activation_set(in));
}

// --- bundles ---------------------------------------------------------------

TEST(BundleContainer, AxisAlignedBundle) {
  ProjectionBundle bundle;
  bundle.width = 3;
  bundle.fit_config.layers = LayerSelection::explicit_layers({0});
  LayerProjection p;
  p.layer = 0;
  p.k_plus = 1;
  p.keep_plus = Matrix::Identity(3, 1);
  p.k_minus = 3;
  p.keep_minus = Matrix(3, 0);
  p.sigma_plus = Vector::Zero(3);
  p.sigma_plus[0] = 1.0;
  p.sigma_minus = Vector::Zero(3);
  bundle.layers.push_back(p);

  const ProjectionBundle back = bundle_from(to_bytes(bundle));
  ASSERT_EQ(back.layers.size(), 1u);
  EXPECT_EQ(back.layers[0].k_plus, 1);
  EXPECT_EQ(back.layers[0].keep_plus, Matrix::Identity(3, 1));
  EXPECT_EQ(back.layers[0].keep_minus.cols(), 0);
}

TEST(BundleContainer, RoundTripOfFloatValuedBundle) {
  const ProjectionBundle bundle = testing::random_bundle(6, {1, 4}, 30);
  const std::string bytes = to_bytes(bundle);
  EXPECT_EQ(bytes.substr(0, 4), "SEAP");
  const ProjectionBundle back = bundle_from(bytes);
  EXPECT_EQ(back.width, bundle.width);
  EXPECT_EQ(back.fit_config, bundle.fit_config);
  ASSERT_EQ(back.layers.size(), bundle.layers.size());
  for (std::size_t i = 0; i < back.layers.size(); ++i) {
    EXPECT_EQ(back.layers[i].keep_plus, bundle.layers[i].keep_plus);
    EXPECT_EQ(back.layers[i].keep_minus, bundle.layers[i].keep_minus);
    EXPECT_EQ(back.layers[i].sigma_plus, bundle.layers[i].sigma_plus);
    EXPECT_EQ(back.layers[i].sigma_minus, bundle.layers[i].sigma_minus);
  }
  EXPECT_EQ(to_bytes(back), bytes);
}

TEST(BundleContainer, FittedBundleBytesAreStable) {
  const ActivationSet set = testing::random_activation_set(8, 40, {0, 1, 2}, 31);
  EditConfig config;
  config.explained_variance = 0.9;
  config.layers = LayerSelection::top(2);
  const std::string bytes = to_bytes(fit_bundle(set, config));
  const std::string again = to_bytes(bundle_from(bytes));
  EXPECT_EQ(again, bytes);
  EXPECT_EQ(to_bytes(bundle_from(again)), bytes);
}

TEST(BundleContainer, FeatureSpecRoundTrips) {
  ProjectionBundle bundle = testing::random_bundle(4, {0}, 32);
  bundle.fit_config.feature = {FeatureKind::elu, 0.25, 1e-4};
  bundle.fit_config.mode = EditMode::reverse;
  bundle.fit_config.merge = MergeMode::average;
  bundle.fit_config.center = true;
  EXPECT_EQ(bundle_from(to_bytes(bundle)).fit_config, bundle.fit_config);
}

TEST(BundleContainer, EveryFeatureKindRoundTrips) {
  for (FeatureKind kind : {FeatureKind::identity, FeatureKind::squared_exponential, FeatureKind::tanh,
                           FeatureKind::elu}) {
    ProjectionBundle bundle = testing::random_bundle(3, {0}, 34);
    bundle.fit_config.feature = {kind, 1.5, 1e-6};
    EXPECT_EQ(bundle_from(to_bytes(bundle)).fit_config.feature, bundle.fit_config.feature)
        << feature_tag(kind);
  }
}

TEST(BundleContainer, ScaledColumnFailsOrthonormality) {
  const ProjectionBundle bundle = testing::random_bundle(4, {0}, 33);
  std::string bytes = to_bytes(bundle);
  // Payload: 32-byte feature block, then the first layer's keep_plus.
  const std::size_t first_column = kPreamble + u64_at(bytes, 8) + 32;
  for (int i = 0; i < 4; ++i) {
    const std::size_t at = first_column + 4 * i;
    put_f32(bytes, at, 2.0f * f32_at(bytes, at));
  }
  try {
    bundle_from(bytes);
    FAIL() << "tampered bundle was accepted";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("orthonormal"), std::string::npos) << e.what();
  }
}

TEST(BundleContainer, SmallDriftWithinReadTolerance) {
  const ProjectionBundle bundle = testing::random_bundle(4, {0}, 34);
  std::string bytes = to_bytes(bundle);
  const std::size_t first = kPreamble + u64_at(bytes, 8) + 32;
  put_f32(bytes, first, f32_at(bytes, first) * (1.0f + 2e-5f));
  EXPECT_NO_THROW(bundle_from(bytes));
}

TEST(BundleContainer, RejectsActivationMagic) {
  const std::string bytes = to_bytes(testing::random_activation_set(3, 2, {0}, 35));
  EXPECT_THROW(bundle_from(bytes), FormatError);
}

TEST(BundleContainer, RejectsTruncation) {
  const std::string bytes = to_bytes(testing::random_bundle(4, {0, 1}, 36));
  for (std::size_t cut = 0; cut < bytes.size(); cut += 13) {
    EXPECT_THROW(bundle_from(bytes.substr(0, cut)), FormatError) << "cut at " << cut;
  }
}

TEST(BundleContainer, WriteRejectsNonOrthonormal) {
  ProjectionBundle bundle = testing::random_bundle(4, {0}, 37);
  bundle.layers[0].keep_plus *= 1.5;
  std::ostringstream out;
  EXPECT_THROW(write_projection_bundle(bundle, out), ValidationError);
}

TEST(BundleContainer, SaveLoadFile) {
  testing::TempDir dir;
  const ProjectionBundle bundle = testing::random_bundle(5, {2}, 38);
  save_projection_bundle(bundle, dir / "b.seap");
  EXPECT_EQ(to_bytes(load_projection_bundle(dir / "b.seap")), to_bytes(bundle));
  EXPECT_EQ(testing::read_bytes(dir / "b.seap"), to_bytes(bundle));
}

}  // namespace
}  // namespace specedit
