// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

namespace specedit {

// All fitting and editing math runs in 64-bit. Activations are persisted as
// 32-bit floats and widened on use.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixF = Eigen::MatrixXf;
using Index = Eigen::Index;

}  // namespace specedit
