// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "retsimd/tensor.hpp"

namespace retsimd {

/// -sum p ln p in nats. Entries p <= 1e-12 contribute 0.
/// Throws ContractError if p has negative entries or does not sum to 1 within 1e-6.
double predictive_entropy(const RowVector& p);

/// Entropy drop from adding a modality: h_ablated - h_full. May be negative.
inline double info_gain(double h_ablated, double h_full) { return h_ablated - h_full; }

}  // namespace retsimd
