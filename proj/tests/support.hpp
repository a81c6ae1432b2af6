// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <unistd.h>

#include "retsimd/autodiff.hpp"
#include "retsimd/util.hpp"

namespace retsimd::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("retsimd-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream(p) << text;
}

inline Matrix random_matrix(Eigen::Index r, Eigen::Index c, SplitMix64& rng, double scale = 1.0) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal() * scale;
    return m;
}

/// ||a - b|| / max(||a||, ||b||, floor).
inline double relative_error(const Matrix& a, const Matrix& b, double floor = 1e-10) {
    return (a - b).norm() / std::max({a.norm(), b.norm(), floor});
}

/// Central finite differences of `loss` against the analytic gradients that
/// `backprop` leaves in params; returns the worst per-tensor relative error.
inline double gradient_check(ParameterSet& params, const std::function<double()>& loss,
                             const std::function<void()>& backprop, double step = 1e-4) {
    params.zero_grad();
    backprop();
    double worst = 0.0;
    for (auto& p : params.items()) {
        const Matrix analytic = p.grad;
        Matrix numeric(p.value.rows(), p.value.cols());
        for (Eigen::Index i = 0; i < p.value.size(); ++i) {
            const double keep = p.value.data()[i];
            p.value.data()[i] = keep + step;
            const double up = loss();
            p.value.data()[i] = keep - step;
            const double down = loss();
            p.value.data()[i] = keep;
            numeric.data()[i] = (up - down) / (2.0 * step);
        }
        worst = std::max(worst, relative_error(analytic, numeric));
    }
    return worst;
}

/// Independent re-derivation of the seeded hash token embedding: FNV-1a,
/// SplitMix64 and Box-Muller written out from their published definitions.
inline RowVector oracle_token_embedding(const std::string& token, Eigen::Index dim, std::uint64_t seed) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : token) h = (h ^ c) * 1099511628211ULL;
    std::uint64_t state = h ^ (seed * 0x9E3779B97F4A7C15ULL);
    auto next = [&state] {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    };
    auto uniform = [&] { return static_cast<double>(next() >> 11) / 9007199254740992.0; };
    RowVector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        v[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }
    return v / v.norm();
}

}  // namespace retsimd::testing
