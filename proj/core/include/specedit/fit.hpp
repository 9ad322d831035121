// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "specedit/activation_set.hpp"
#include "specedit/edit_config.hpp"
#include "specedit/projection_bundle.hpp"

namespace specedit {

/// Fits editing projections for the layers selected by `config`.
///
/// Activations are widened to 64-bit and passed through the configured
/// feature map before the cross-covariances are formed. In reverse mode the
/// negative cross-covariance feeds the keep-top rule and the positive one the
/// keep-complement rule. Layers are fitted concurrently.
ProjectionBundle fit_bundle(const ActivationSet& set, const EditConfig& config);

}  // namespace specedit
