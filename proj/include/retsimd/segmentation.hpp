// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "retsimd/data.hpp"

namespace retsimd {

enum class SegmentationStrategy { FixedNumber, FixedLength, Punctuation };

std::string_view to_string(SegmentationStrategy s);
SegmentationStrategy parse_segmentation_strategy(std::string_view s);

/// Contiguous, non-overlapping, order-preserving partition of a token sequence.
struct SegmentSet {
    std::vector<Tokens> segments;
    /// Index of each segment's first token in the source sequence.
    std::vector<std::size_t> offsets;
    SegmentationStrategy strategy = SegmentationStrategy::FixedNumber;
    std::size_t source_token_count = 0;

    /// Effective number of segments. Can be smaller than the requested K.
    std::size_t k() const { return segments.size(); }
    /// Segment index (0-based) owning a source token.
    std::size_t segment_of(std::size_t token_index) const;
    Tokens concatenated() const;
};

/// True for . , ; : ! ? and the full-width 。 ， ！ ？.
bool is_punctuation(std::string_view token);

SegmentSet segment_fixed_number(const Tokens& text, std::size_t k);
SegmentSet segment_fixed_length(const Tokens& text, std::size_t l);
SegmentSet segment_punctuation(const Tokens& text, std::size_t min_tokens = 5);

struct SegmentationConfig {
    SegmentationStrategy strategy = SegmentationStrategy::FixedNumber;
    std::size_t k = 5;
    std::size_t l = 10;
    std::size_t min_tokens = 5;
};

SegmentSet segment(const Tokens& text, const SegmentationConfig& config);

}  // namespace retsimd
