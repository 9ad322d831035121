// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "specedit/fit.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "specedit/feature_map.hpp"
#include "specedit/spectral.hpp"

namespace specedit {
namespace {

LayerProjection fit_layer(const LayerSamples& samples, const EditConfig& config) {
  const Matrix neutral = apply_feature(Matrix(samples.neutral.cast<double>()), config.feature);
  const Matrix positive = apply_feature(Matrix(samples.positive.cast<double>()), config.feature);
  const Matrix negative = apply_feature(Matrix(samples.negative.cast<double>()), config.feature);
  Matrix omega_plus = cross_covariance(neutral, positive, config.center);
  Matrix omega_minus = cross_covariance(neutral, negative, config.center);
  if (config.mode == EditMode::reverse) std::swap(omega_plus, omega_minus);
  return build_projections(omega_plus, omega_minus, config.explained_variance);
}

// Runs job(i) for i in [0, count) on up to hardware_concurrency threads and
// rethrows the first failure.
template <typename Job>
void parallel_for(std::size_t count, Job job) {
  const std::size_t workers =
      std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  threads.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

ProjectionBundle fit_bundle(const ActivationSet& set, const EditConfig& config) {
  config.validate();
  set.validate();
  const std::vector<int> layers = config.layers.resolve(set.layer_ids);

  ProjectionBundle bundle;
  bundle.width = set.width();
  bundle.fit_config = config;
  bundle.layers.resize(layers.size());
  parallel_for(layers.size(), [&](std::size_t i) {
    LayerProjection p = fit_layer(set.layer(layers[i]), config);
    p.layer = layers[i];
    bundle.layers[i] = std::move(p);
  });
  return bundle;
}

}  // namespace specedit
