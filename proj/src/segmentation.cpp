// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#include "retsimd/segmentation.hpp"

#include <algorithm>
#include <array>

#include "retsimd/error.hpp"

namespace retsimd {

std::string_view to_string(SegmentationStrategy s) {
    switch (s) {
        case SegmentationStrategy::FixedNumber: return "fixed_number";
        case SegmentationStrategy::FixedLength: return "fixed_length";
        case SegmentationStrategy::Punctuation: return "punctuation";
    }
    return "fixed_number";
}

SegmentationStrategy parse_segmentation_strategy(std::string_view s) {
    if (s == "fixed_number") return SegmentationStrategy::FixedNumber;
    if (s == "fixed_length") return SegmentationStrategy::FixedLength;
    if (s == "punctuation") return SegmentationStrategy::Punctuation;
    throw ConfigError("unknown segmentation strategy: " + std::string(s));
}

std::size_t SegmentSet::segment_of(std::size_t token_index) const {
    if (token_index >= source_token_count) throw ContractError("token index out of range");
    const auto it = std::upper_bound(offsets.begin(), offsets.end(), token_index);
    return static_cast<std::size_t>(it - offsets.begin()) - 1;
}

Tokens SegmentSet::concatenated() const {
    Tokens out;
    for (const auto& s : segments) out.insert(out.end(), s.begin(), s.end());
    return out;
}

bool is_punctuation(std::string_view token) {
    static constexpr std::array<std::string_view, 10> marks = {".", ",", ";", ":", "!", "?", "。", "，", "！", "？"};
    return std::find(marks.begin(), marks.end(), token) != marks.end();
}

namespace {

// Builds a SegmentSet from segment lengths that sum to text.size().
SegmentSet from_lengths(const Tokens& text, const std::vector<std::size_t>& lengths, SegmentationStrategy strategy) {
    SegmentSet out;
    out.strategy = strategy;
    out.source_token_count = text.size();
    std::size_t pos = 0;
    for (std::size_t len : lengths) {
        out.offsets.push_back(pos);
        out.segments.emplace_back(text.begin() + static_cast<std::ptrdiff_t>(pos),
                                  text.begin() + static_cast<std::ptrdiff_t>(pos + len));
        pos += len;
    }
    return out;
}

void require_text(const Tokens& text) {
    if (text.empty()) throw ContractError("segmentation of empty text");
}

}  // namespace

SegmentSet segment_fixed_number(const Tokens& text, std::size_t k) {
    require_text(text);
    if (k == 0) throw ContractError("segment_fixed_number: k must be >= 1");
    const std::size_t n = text.size();
    const std::size_t keff = std::min(k, n);
    const std::size_t base = n / keff;
    const std::size_t rem = n % keff;
    std::vector<std::size_t> lengths(keff, base);
    for (std::size_t i = 0; i < rem; ++i) ++lengths[i];
    return from_lengths(text, lengths, SegmentationStrategy::FixedNumber);
}

SegmentSet segment_fixed_length(const Tokens& text, std::size_t l) {
    require_text(text);
    if (l == 0) throw ContractError("segment_fixed_length: l must be >= 1");
    std::vector<std::size_t> lengths;
    for (std::size_t pos = 0; pos < text.size(); pos += l) lengths.push_back(std::min(l, text.size() - pos));
    return from_lengths(text, lengths, SegmentationStrategy::FixedLength);
}

SegmentSet segment_punctuation(const Tokens& text, std::size_t min_tokens) {
    require_text(text);
    if (min_tokens == 0) throw ContractError("segment_punctuation: min_tokens must be >= 1");
    std::vector<std::size_t> lengths;
    std::size_t start = 0;
    std::size_t words = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (!is_punctuation(text[i])) {
            ++words;
            continue;
        }
        if (words > min_tokens) {
            lengths.push_back(i + 1 - start);
            start = i + 1;
            words = 0;
        }
    }
    if (start < text.size()) {
        if (lengths.empty()) {
            lengths.push_back(text.size());
        } else {
            lengths.back() += text.size() - start;
        }
    }
    return from_lengths(text, lengths, SegmentationStrategy::Punctuation);
}

SegmentSet segment(const Tokens& text, const SegmentationConfig& config) {
    switch (config.strategy) {
        case SegmentationStrategy::FixedNumber: return segment_fixed_number(text, config.k);
        case SegmentationStrategy::FixedLength: return segment_fixed_length(text, config.l);
        case SegmentationStrategy::Punctuation: return segment_punctuation(text, config.min_tokens);
    }
    throw ContractError("unknown segmentation strategy");
}

}  // namespace retsimd
