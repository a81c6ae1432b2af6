// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <functional>

#include "doctest.h"
#include "retsimd/error.hpp"
#include "retsimd/segmentation.hpp"
#include "retsimd/util.hpp"

using namespace retsimd;

namespace {

Tokens words(std::size_t n) {
    Tokens t;
    for (std::size_t i = 0; i < n; ++i) t.push_back("t" + std::to_string(i));
    return t;
}

std::vector<std::size_t> lengths(const SegmentSet& s) {
    std::vector<std::size_t> out;
    for (const auto& seg : s.segments) out.push_back(seg.size());
    return out;
}

Tokens split_spaces(const std::string& s) {
    Tokens out;
    std::string cur;
    for (char c : s) {
        if (c == ' ') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace

TEST_CASE("fixed-number segmentation") {
    CHECK(lengths(segment_fixed_number(words(6), 2)) == std::vector<std::size_t>{3, 3});
    CHECK(lengths(segment_fixed_number(words(7), 3)) == std::vector<std::size_t>{3, 2, 2});
    const Tokens t = words(9);
    const SegmentSet one = segment_fixed_number(t, 1);
    REQUIRE(one.k() == 1);
    CHECK(one.segments[0] == t);
    const SegmentSet shrunk = segment_fixed_number(words(3), 5);
    CHECK(shrunk.k() == 3);
    CHECK(lengths(shrunk) == std::vector<std::size_t>{1, 1, 1});
    CHECK_THROWS_AS(segment_fixed_number({}, 2), ContractError);
    CHECK_THROWS_AS(segment_fixed_number(words(3), 0), ContractError);
}

TEST_CASE("fixed-number lengths minimise the spread with remainders first") {
    // Brute force: among all contiguous partitions into k parts, the minimal
    // max-min spread is at most 1, and the earliest-first one is lexicographically largest.
    for (std::size_t n = 1; n <= 12; ++n) {
        for (std::size_t k = 1; k <= n; ++k) {
            std::vector<std::size_t> best;
            std::vector<std::size_t> cur;
            std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t left, std::size_t parts) {
                if (parts == 0) {
                    if (left != 0) return;
                    const auto [mn, mx] = std::minmax_element(cur.begin(), cur.end());
                    if (*mx - *mn > 1) return;
                    if (best.empty() || cur > best) best = cur;
                    return;
                }
                for (std::size_t len = 1; len + parts - 1 <= left; ++len) {
                    cur.push_back(len);
                    rec(left - len, parts - 1);
                    cur.pop_back();
                }
            };
            rec(n, k);
            CHECK(lengths(segment_fixed_number(words(n), k)) == best);
        }
    }
}

TEST_CASE("fixed-length segmentation") {
    CHECK(lengths(segment_fixed_length(words(25), 10)) == std::vector<std::size_t>{10, 10, 5});
    CHECK(lengths(segment_fixed_length(words(10), 10)) == std::vector<std::size_t>{10});
    CHECK(lengths(segment_fixed_length(words(10), 3)) == std::vector<std::size_t>{3, 3, 3, 1});
    CHECK_THROWS_AS(segment_fixed_length({}, 3), ContractError);
    CHECK_THROWS_AS(segment_fixed_length(words(3), 0), ContractError);
}

TEST_CASE("punctuation segmentation") {
    const auto a = segment_punctuation(split_spaces("w w w w w w , w w w w w w ."), 5);
    REQUIRE(a.k() == 2);
    CHECK(a.segments[0].back() == ",");
    CHECK(a.segments[1].back() == ".");
    CHECK(segment_punctuation(split_spaces("w w , w w ."), 5).k() == 1);
    CHECK(segment_punctuation(words(20), 5).k() == 1);
    // A trailing short remainder merges into the last committed segment.
    const auto b = segment_punctuation(split_spaces("w w w w w w . w w"), 5);
    REQUIRE(b.k() == 1);
    CHECK(b.segments[0].size() == 9);
    // Full-width punctuation is recognised.
    CHECK(segment_punctuation(split_spaces("a b c d e f 。 g h i j k l ！"), 5).k() == 2);
    CHECK(is_punctuation("？"));
    CHECK_FALSE(is_punctuation("w"));
    CHECK_THROWS_AS(segment_punctuation({}, 5), ContractError);
}

TEST_CASE("segmentation invariants on random texts") {
    SplitMix64 rng(17);
    const char* vocab[] = {"a", "b", "c", ",", ".", "!", "d", "e", "；", "。"};
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.next() % 40;
        Tokens t;
        for (std::size_t i = 0; i < n; ++i) t.push_back(vocab[rng.next() % 10]);
        for (const auto strategy :
             {SegmentationStrategy::FixedNumber, SegmentationStrategy::FixedLength, SegmentationStrategy::Punctuation}) {
            SegmentationConfig cfg;
            cfg.strategy = strategy;
            cfg.k = 1 + rng.next() % 6;
            cfg.l = 1 + rng.next() % 8;
            const SegmentSet s = segment(t, cfg);
            CHECK(s.k() >= 1);
            CHECK(s.concatenated() == t);
            CHECK(s.source_token_count == n);
            std::size_t offset = 0;
            for (std::size_t j = 0; j < s.k(); ++j) {
                CHECK_FALSE(s.segments[j].empty());
                CHECK(s.offsets[j] == offset);
                for (std::size_t q = 0; q < s.segments[j].size(); ++q) CHECK(s.segment_of(offset + q) == j);
                offset += s.segments[j].size();
            }
            const SegmentSet again = segment(t, cfg);
            CHECK(again.segments == s.segments);
        }
    }
}

TEST_CASE("strategy names round-trip") {
    for (const auto s :
         {SegmentationStrategy::FixedNumber, SegmentationStrategy::FixedLength, SegmentationStrategy::Punctuation}) {
        CHECK(parse_segmentation_strategy(to_string(s)) == s);
    }
    CHECK_THROWS(parse_segmentation_strategy("sentences"));
}
