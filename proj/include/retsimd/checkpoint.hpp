// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "retsimd/autodiff.hpp"

namespace retsimd {

struct Checkpoint {
    ParameterSet detector_params;
    ParameterSet generator_params;
    std::uint64_t iteration = 0;
    std::map<std::string, double> metrics;
    /// Optimizer moments and other resume state, keyed by name.
    std::map<std::string, Matrix> extra_tensors;
    /// Opaque resume state (rng, counters) as text.
    std::string state;
};

std::vector<std::uint8_t> serialize(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

}  // namespace retsimd
