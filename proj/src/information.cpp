// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#include "retsimd/information.hpp"

#include <cmath>

#include "retsimd/error.hpp"

namespace retsimd {

double predictive_entropy(const RowVector& p) {
    if (p.size() == 0 || (p.array() < 0.0).any() || std::abs(p.sum() - 1.0) > 1e-6) {
        throw ContractError("predictive_entropy: not a probability vector");
    }
    double h = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p[i] > 1e-12) h -= p[i] * std::log(p[i]);
    }
    return h;
}

}  // namespace retsimd
