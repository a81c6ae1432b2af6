// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#include "retsimd/cache.hpp"

#include <fstream>
#include <mutex>

#include "binary_io.hpp"
#include "retsimd/checkpoint.hpp"
#include "retsimd/error.hpp"

namespace retsimd {

namespace fs = std::filesystem;

namespace {

FeatureVector to_float32(const FeatureVector& f) {
    RowVector v = f.values().cast<float>().cast<double>();
    return FeatureVector(std::move(v));
}

std::optional<int> parse_round(const fs::path& p) {
    const std::string name = p.filename().string();
    if (name.rfind("round_", 0) != 0 || p.extension() != ".bin") return std::nullopt;
    try {
        return std::stoi(name.substr(6, name.size() - 6 - 4));
    } catch (...) {
        return std::nullopt;
    }
}

}  // namespace

FeatureCache::FeatureCache(std::size_t k, std::string dataset, std::optional<fs::path> root)
    : k_(k), dataset_(std::move(dataset)), root_(std::move(root)) {
    if (k_ == 0) throw ContractError("cache K must be positive");
}

std::vector<std::uint8_t> FeatureCache::encode(const std::vector<FeatureVector>& features) {
    detail::ByteWriter w;
    w.u32(static_cast<std::uint32_t>(features.size()));
    for (const auto& f : features) {
        w.u32(static_cast<std::uint32_t>(f.dim()));
        for (Eigen::Index i = 0; i < f.dim(); ++i) w.f32(static_cast<float>(f[i]));
    }
    return w.take();
}

std::vector<FeatureVector> FeatureCache::decode(const std::vector<std::uint8_t>& bytes) {
    detail::ByteReader r(bytes);
    const std::uint32_t n = r.u32();
    std::vector<FeatureVector> out;
    out.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        const std::uint32_t d = r.u32();
        RowVector v(d);
        for (std::uint32_t j = 0; j < d; ++j) v[j] = r.f32();
        out.emplace_back(std::move(v));
    }
    if (!r.done()) throw IngestionError("trailing bytes in cache record");
    return out;
}

void FeatureCache::put(const std::string& sample_id, const std::vector<FeatureVector>& features, int round,
                       std::optional<std::size_t> effective_k) {
    const std::size_t expected = effective_k.value_or(k_);
    if (expected == 0 || expected > k_ || features.size() != expected) {
        throw ContractError("cache write for '" + sample_id + "' has " + std::to_string(features.size()) +
                            " features, expected " + std::to_string(expected));
    }
    CacheEntry entry;
    entry.round = round;
    entry.features.reserve(features.size());
    for (const auto& f : features) entry.features.push_back(to_float32(f));

    if (root_) {
        const fs::path dir = *root_ / dataset_ / sample_id;
        fs::create_directories(dir);
        const fs::path target = dir / ("round_" + std::to_string(round) + ".bin");
        const fs::path tmp = dir / ("round_" + std::to_string(round) + ".bin.tmp");
        write_file_bytes(tmp, encode(entry.features));
        fs::rename(tmp, target);
        for (const auto& e : fs::directory_iterator(dir)) {
            const auto r = parse_round(e.path());
            if (r && *r != round) fs::remove(e.path());
        }
    }
    std::unique_lock lock(mutex_);
    entries_[sample_id] = std::move(entry);
}

std::optional<CacheEntry> FeatureCache::load_from_disk(const std::string& sample_id) const {
    if (!root_) return std::nullopt;
    const fs::path dir = *root_ / dataset_ / sample_id;
    if (!fs::is_directory(dir)) return std::nullopt;
    std::optional<CacheEntry> best;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto r = parse_round(e.path());
        if (!r || (best && best->round >= *r)) continue;
        best = CacheEntry{*r, decode(read_file_bytes(e.path()))};
    }
    return best;
}

std::optional<CacheEntry> FeatureCache::get(const std::string& sample_id) const {
    {
        std::shared_lock lock(mutex_);
        const auto it = entries_.find(sample_id);
        if (it != entries_.end()) return it->second;
    }
    auto loaded = load_from_disk(sample_id);
    if (loaded) {
        std::unique_lock lock(mutex_);
        entries_.try_emplace(sample_id, *loaded);
    }
    return loaded;
}

std::size_t FeatureCache::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

void FeatureCache::clear() {
    std::unique_lock lock(mutex_);
    entries_.clear();
}

}  // namespace retsimd
