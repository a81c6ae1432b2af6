// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#include "retsimd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "retsimd/error.hpp"
#include "retsimd/util.hpp"

namespace retsimd {

using nlohmann::json;

std::string_view to_string(Placement p) {
    switch (p) {
        case Placement::Text: return "text";
        case Placement::Image: return "image";
        case Placement::Both: return "both";
    }
    return "text";
}

Placement parse_placement(std::string_view s) {
    if (s == "text") return Placement::Text;
    if (s == "image") return Placement::Image;
    if (s == "both") return Placement::Both;
    throw ConfigError("unknown placement '" + std::string(s) + "' (expected text, image or both)");
}

void SyntheticSpec::validate() const {
    if (!(margin > 0.0) || !std::isfinite(margin)) throw ConfigError("synthetic margin must be > 0");
    if (n_samples < 4) throw ConfigError("synthetic n_samples must be >= 4");
    if (vocab_size == 0 || cue_vocab == 0) throw ConfigError("synthetic vocabularies must be non-empty");
    if (leak_strength < 0.0 || leak_strength > 1.0) throw ConfigError("leak_strength must lie in [0, 1]");
    if (image_side < 2) throw ConfigError("image_side must be >= 2");
}

int SyntheticSpec::gap() const { return std::max(1, static_cast<int>(std::ceil(margin))); }

json to_json(const SyntheticSpec& s) {
    return json{{"n_samples", s.n_samples},       {"vocab_size", s.vocab_size},
                {"placement", to_string(s.placement)}, {"margin", s.margin},
                {"leak_strength", s.leak_strength}, {"text_length", s.text_length},
                {"cue_vocab", s.cue_vocab},         {"minority_max", s.minority_max},
                {"image_side", s.image_side}};
}

SyntheticSpec synthetic_spec_from_json(const json& j) {
    SyntheticSpec s;
    for (const auto& [key, value] : j.items()) {
        if (key == "n_samples") s.n_samples = value.get<std::size_t>();
        else if (key == "vocab_size") s.vocab_size = value.get<std::size_t>();
        else if (key == "placement") s.placement = parse_placement(value.get<std::string>());
        else if (key == "margin") s.margin = value.get<double>();
        else if (key == "leak_strength") s.leak_strength = value.get<double>();
        else if (key == "text_length") s.text_length = value.get<std::size_t>();
        else if (key == "cue_vocab") s.cue_vocab = value.get<std::size_t>();
        else if (key == "minority_max") s.minority_max = value.get<std::size_t>();
        else if (key == "image_side") s.image_side = value.get<int>();
        else throw ConfigError("unknown synthetic spec key '" + key + "'");
    }
    s.validate();
    return s;
}

namespace {

std::size_t below(SplitMix64& rng, std::size_t n) { return static_cast<std::size_t>(rng.next() % n); }

Tokens make_text(const SyntheticSpec& spec, int polarity, bool cues, SplitMix64& rng) {
    Tokens text;
    for (std::size_t i = 0; i < spec.text_length; ++i) text.push_back("w" + std::to_string(below(rng, spec.vocab_size)));
    if (!cues) return text;
    const std::size_t minority = below(rng, spec.minority_max + 1);
    const std::size_t majority = minority + static_cast<std::size_t>(spec.gap());
    const std::string major = polarity == 1 ? "cue+" : "cue-";
    const std::string minor = polarity == 1 ? "cue-" : "cue+";
    auto insert = [&](const std::string& prefix) {
        const auto pos = static_cast<std::ptrdiff_t>(below(rng, text.size() + 1));
        text.insert(text.begin() + pos, prefix + std::to_string(below(rng, spec.cue_vocab)));
    };
    for (std::size_t i = 0; i < majority; ++i) insert(major);
    for (std::size_t i = 0; i < minority; ++i) insert(minor);
    return text;
}

Image make_image(const SyntheticSpec& spec, int polarity, bool signal, SplitMix64& rng) {
    Image img(spec.image_side, spec.image_side);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(below(rng, 256));
    if (signal) {
        const int level = std::clamp(128 + (polarity == 1 ? 20 : -20) * spec.gap(), 0, 255);
        const int half = spec.image_side / 2;
        for (int y = 0; y < half; ++y) {
            for (int x = 0; x < half; ++x) img.at(y, x, 0) = static_cast<std::uint8_t>(level);
        }
    }
    return img;
}

}  // namespace

Dataset synth_dataset(const SyntheticSpec& spec, std::uint64_t seed, Split split, const std::string& name) {
    spec.validate();
    SplitMix64 rng(seed ^ 0x5DEECE66DULL);
    std::vector<int> labels(spec.n_samples);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 2);
    for (std::size_t i = labels.size(); i > 1; --i) std::swap(labels[i - 1], labels[below(rng, i)]);

    const bool text_signal = spec.placement != Placement::Image;
    const bool image_signal = spec.placement != Placement::Text;
    Dataset ds;
    ds.name = name;
    ds.split = split;
    for (std::size_t i = 0; i < spec.n_samples; ++i) {
        Sample s;
        s.id = name + "-" + std::string(to_string(split)) + "-" + std::to_string(i);
        s.label = labels[i];
        s.text = make_text(spec, s.label, text_signal, rng);
        s.image = std::make_shared<const Image>(make_image(spec, s.label, image_signal, rng));
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

PairedImageTextDataset synth_paired(std::size_t n, const SyntheticSpec& spec, std::uint64_t seed) {
    spec.validate();
    SplitMix64 rng(seed ^ 0xA5A5A5A5ULL);
    PairedImageTextDataset out;
    out.name = "synthetic-paired";
    for (std::size_t i = 0; i < n; ++i) {
        const int polarity = static_cast<int>(below(rng, 2));
        CaptionImagePair p;
        p.caption = make_text(spec, polarity, true, rng);
        p.image = std::make_shared<const Image>(make_image(spec, polarity, true, rng));
        out.pairs.push_back(std::move(p));
    }
    return out;
}

int decode_text_label(const Tokens& text) {
    long balance = 0;
    for (const auto& t : text) {
        if (t.rfind("cue+", 0) == 0) ++balance;
        if (t.rfind("cue-", 0) == 0) --balance;
    }
    return balance > 0 ? 1 : 0;
}

int decode_image_label(const Image& image) {
    const int half_y = image.height / 2, half_x = image.width / 2;
    double sum = 0.0;
    for (int y = 0; y < half_y; ++y) {
        for (int x = 0; x < half_x; ++x) sum += image.at(y, x, 0);
    }
    return sum / (half_y * half_x) > 128.0 ? 1 : 0;
}

namespace {

std::string join(const Tokens& t) {
    std::string out;
    for (const auto& s : t) out += (out.empty() ? "" : " ") + s;
    return out;
}

}  // namespace

std::filesystem::path write_dataset(const std::filesystem::path& dir, const Dataset& dataset) {
    std::filesystem::create_directories(dir / "images");
    const auto path = dir / (dataset.name + "_" + std::string(to_string(dataset.split)) + ".jsonl");
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& s : dataset.samples) {
        json j{{"id", s.id}, {"text", join(s.text)}, {"label", s.label}};
        if (s.image && !s.image_absent) {
            const std::string rel = "images/" + s.id + ".ppm";
            write_ppm(dir / rel, *s.image);
            j["image_path"] = rel;
        } else {
            j["image_path"] = nullptr;
        }
        out << j.dump() << '\n';
    }
    return path;
}

std::filesystem::path write_paired(const std::filesystem::path& dir, const PairedImageTextDataset& paired) {
    std::filesystem::create_directories(dir / "images");
    const auto path = dir / (paired.name + ".jsonl");
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    for (std::size_t i = 0; i < paired.pairs.size(); ++i) {
        const std::string rel = "images/pair-" + std::to_string(i) + ".ppm";
        write_ppm(dir / rel, *paired.pairs[i].image);
        out << json{{"caption", join(paired.pairs[i].caption)}, {"image_path", rel}}.dump() << '\n';
    }
    return path;
}

}  // namespace retsimd
