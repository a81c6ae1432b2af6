// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "retsimd/data.hpp"

namespace retsimd {

enum class Placement { Text, Image, Both };

std::string_view to_string(Placement p);
Placement parse_placement(std::string_view s);

/// Desk-scale dataset recipe.
///
/// Text: `text_length` noise words `w<i>` drawn from `vocab_size`. When the
/// label lives in the text, each post also carries cue words `cue+<r>` and
/// `cue-<r>` (r < cue_vocab): the minority polarity appears m times, m uniform
/// in [0, minority_max], and the label's polarity m + gap times, where
/// gap = max(1, ceil(margin)).
///
/// Image: `image_side` square of uniform noise. When the label lives in the
/// image, the top-left quadrant's red channel is set to 128 +/- 20 * gap.
struct SyntheticSpec {
    std::size_t n_samples = 200;
    std::size_t vocab_size = 200;
    Placement placement = Placement::Text;
    double margin = 1.0;
    double leak_strength = 0.0;
    std::size_t text_length = 16;
    std::size_t cue_vocab = 4;
    std::size_t minority_max = 1;
    int image_side = 32;

    void validate() const;
    int gap() const;
    bool operator==(const SyntheticSpec&) const = default;
};

nlohmann::json to_json(const SyntheticSpec& s);
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);

/// Balanced (class counts differ by at most one), deterministic under seed.
Dataset synth_dataset(const SyntheticSpec& spec, std::uint64_t seed, Split split = Split::Train,
                      const std::string& name = "synthetic");

/// Caption-image pairs for generator post-training: the caption's cue
/// polarity is mirrored in the image's top-left red level.
PairedImageTextDataset synth_paired(std::size_t n, const SyntheticSpec& spec, std::uint64_t seed);

/// Reference decoders built from the generation rules.
int decode_text_label(const Tokens& text);
int decode_image_label(const Image& image);

/// Writes `<dir>/<name>.jsonl` and one PPM per sample under `<dir>/images/`.
std::filesystem::path write_dataset(const std::filesystem::path& dir, const Dataset& dataset);
std::filesystem::path write_paired(const std::filesystem::path& dir, const PairedImageTextDataset& paired);

}  // namespace retsimd
