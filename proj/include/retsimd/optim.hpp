// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "retsimd/autodiff.hpp"

namespace retsimd {

struct AdamOptions {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    /// Decoupled (AdamW) weight decay; 0 gives plain Adam.
    double weight_decay = 0.0;
};

/// Adam / AdamW over a ParameterSet. Per-parameter learning rates can be set
/// by name prefix; the longest matching prefix wins.
class Adam {
public:
    explicit Adam(AdamOptions options = {}) : options_(options) {}

    void set_lr_for_prefix(const std::string& prefix, double lr) { prefix_lr_[prefix] = lr; }
    double lr_for(const std::string& name) const;

    /// Applies one update from the gradients currently stored in params.
    void step(ParameterSet& params);

    std::int64_t steps() const { return t_; }
    const AdamOptions& options() const { return options_; }

    /// Moments are exposed for checkpointing.
    std::map<std::string, Matrix>& first_moments() { return m_; }
    std::map<std::string, Matrix>& second_moments() { return v_; }
    void set_steps(std::int64_t t) { t_ = t; }

private:
    AdamOptions options_;
    std::map<std::string, double> prefix_lr_;
    std::map<std::string, Matrix> m_;
    std::map<std::string, Matrix> v_;
    std::int64_t t_ = 0;
};

}  // namespace retsimd
