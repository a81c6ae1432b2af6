// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "retsimd/data.hpp"

namespace retsimd {

struct CacheEntry {
    int round = 0;
    std::vector<FeatureVector> features;
};

/// Per-sample store of generated image features, last writer wins.
///
/// Values are kept at float32 precision (the on-disk encoding), so a read
/// returns exactly what a disk round-trip would. With a root directory the
/// layout is `<root>/<dataset>/<sample_id>/round_<n>.bin`; each file is a
/// little-endian u32 vector count followed by (u32 length, float32 values)
/// records. Safe for concurrent readers and writers.
class FeatureCache {
public:
    explicit FeatureCache(std::size_t k, std::string dataset = "default",
                          std::optional<std::filesystem::path> root = std::nullopt);

    /// Stores the features for a sample. The expected count is `effective_k`
    /// when given (short texts shrink K), otherwise the configured K.
    void put(const std::string& sample_id, const std::vector<FeatureVector>& features, int round,
             std::optional<std::size_t> effective_k = std::nullopt);
    /// Explicit miss signal: nullopt when the sample was never written.
    std::optional<CacheEntry> get(const std::string& sample_id) const;

    std::size_t k() const { return k_; }
    std::size_t size() const;
    void clear();

    static std::vector<std::uint8_t> encode(const std::vector<FeatureVector>& features);
    static std::vector<FeatureVector> decode(const std::vector<std::uint8_t>& bytes);

private:
    std::optional<CacheEntry> load_from_disk(const std::string& sample_id) const;

    std::size_t k_;
    std::string dataset_;
    std::optional<std::filesystem::path> root_;
    mutable std::shared_mutex mutex_;
    mutable std::unordered_map<std::string, CacheEntry> entries_;
};

}  // namespace retsimd
