// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#include "retsimd/optim.hpp"

#include <cmath>

namespace retsimd {

double Adam::lr_for(const std::string& name) const {
    double lr = options_.lr;
    std::size_t best = 0;
    for (const auto& [prefix, value] : prefix_lr_) {
        if (name.rfind(prefix, 0) == 0 && prefix.size() >= best) {
            best = prefix.size();
            lr = value;
        }
    }
    return lr;
}

void Adam::step(ParameterSet& params) {
    ++t_;
    const double bc1 = 1.0 - std::pow(options_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(options_.beta2, static_cast<double>(t_));
    for (auto& p : params.items()) {
        auto [mit, m_new] = m_.try_emplace(p.name, Matrix::Zero(p.value.rows(), p.value.cols()));
        auto [vit, v_new] = v_.try_emplace(p.name, Matrix::Zero(p.value.rows(), p.value.cols()));
        Matrix& m = mit->second;
        Matrix& v = vit->second;
        m = options_.beta1 * m + (1.0 - options_.beta1) * p.grad;
        v = options_.beta2 * v + (1.0 - options_.beta2) * p.grad.cwiseAbs2();
        const double lr = lr_for(p.name);
        if (options_.weight_decay != 0.0) p.value *= (1.0 - lr * options_.weight_decay);
        p.value.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + options_.eps);
    }
}

}  // namespace retsimd
