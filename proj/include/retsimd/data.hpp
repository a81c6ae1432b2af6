// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "retsimd/image.hpp"
#include "retsimd/tensor.hpp"

namespace retsimd {

using Tokens = std::vector<std::string>;

enum class Split { Train, Validation, Test };

std::string_view to_string(Split s);
Split parse_split(std::string_view s);

/// One post.
struct Sample {
    std::string id;
    Tokens text;
    ImagePtr image;
    /// True when the source had no resolvable image and `image` is the white placeholder.
    bool image_absent = false;
    int label = 0;
};

struct Dataset {
    std::string name;
    Split split = Split::Train;
    std::vector<Sample> samples;
    /// Number of image paths that could not be resolved at load time.
    std::size_t missing_images = 0;

    std::size_t size() const { return samples.size(); }
    std::map<int, std::size_t> class_histogram() const;
    const Sample* find(const std::string& id) const;
};

struct CaptionImagePair {
    Tokens caption;
    ImagePtr image;
};

struct PairedImageTextDataset {
    std::string name;
    std::vector<CaptionImagePair> pairs;
};

/// A finite real vector in the shared feature space.
class FeatureVector {
public:
    FeatureVector() = default;
    explicit FeatureVector(RowVector values);
    FeatureVector(std::initializer_list<double> values);

    const RowVector& values() const { return values_; }
    Eigen::Index dim() const { return values_.size(); }
    double operator[](Eigen::Index i) const { return values_[i]; }

    friend bool operator==(const FeatureVector& a, const FeatureVector& b) {
        return a.values_.size() == b.values_.size() && a.values_ == b.values_;
    }

private:
    RowVector values_;
};

/// Splits raw text into tokens: whitespace-separated words, with punctuation
/// marks and CJK ideographs emitted as their own tokens.
Tokens tokenize(std::string_view text);

struct LoadOptions {
    std::size_t max_text_tokens = 128;
    CropMode crop = CropMode::Center;
    /// Seeds per-sample random crops in training mode.
    std::uint64_t seed = 0;
    std::string name;
};

/// Reads a JSON-lines dataset with keys id, text, image_path (nullable), label.
Dataset load_dataset(const std::filesystem::path& path, Split split, const LoadOptions& options = {});

/// Reads a JSON-lines caption/image dataset with keys caption, image_path.
PairedImageTextDataset load_paired_dataset(const std::filesystem::path& path, std::size_t caption_limit = 77);

}  // namespace retsimd
