// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#include "retsimd/data.hpp"

#include <fstream>
#include <unordered_set>

#include "json.hpp"
#include "retsimd/error.hpp"

namespace retsimd {

using nlohmann::json;

std::string_view to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Validation: return "validation";
        case Split::Test: return "test";
    }
    return "train";
}

Split parse_split(std::string_view s) {
    if (s == "train") return Split::Train;
    if (s == "validation" || s == "val") return Split::Validation;
    if (s == "test") return Split::Test;
    throw ContractError("unknown split: " + std::string(s));
}

std::map<int, std::size_t> Dataset::class_histogram() const {
    std::map<int, std::size_t> h;
    for (const auto& s : samples) ++h[s.label];
    return h;
}

const Sample* Dataset::find(const std::string& id) const {
    for (const auto& s : samples) {
        if (s.id == id) return &s;
    }
    return nullptr;
}

FeatureVector::FeatureVector(RowVector values) : values_(std::move(values)) {
    if (!values_.allFinite()) throw NumericError("feature vector has non-finite entries");
}

FeatureVector::FeatureVector(std::initializer_list<double> values) {
    values_.resize(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double v : values) values_[i++] = v;
    if (!values_.allFinite()) throw NumericError("feature vector has non-finite entries");
}

namespace {

// Decodes one UTF-8 code point starting at text[i]; advances i.
char32_t next_code_point(std::string_view text, std::size_t& i) {
    const auto c = static_cast<unsigned char>(text[i]);
    int len = 1;
    char32_t cp = c;
    if (c >= 0xF0) {
        len = 4;
        cp = c & 0x07;
    } else if (c >= 0xE0) {
        len = 3;
        cp = c & 0x0F;
    } else if (c >= 0xC0) {
        len = 2;
        cp = c & 0x1F;
    }
    if (i + len > text.size()) {
        ++i;
        return c;
    }
    for (int k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(text[i + k]) & 0x3F);
    i += len;
    return cp;
}

bool is_punct_cp(char32_t cp) {
    switch (cp) {
        case U'.': case U',': case U';': case U':': case U'!': case U'?':
        case U'。': case U'，': case U'！': case U'？':
            return true;
        default:
            return false;
    }
}

bool is_cjk(char32_t cp) { return cp >= 0x4E00 && cp <= 0x9FFF; }

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

Tokens tokenize(std::string_view text) {
    Tokens out;
    std::string word;
    auto flush = [&] {
        if (!word.empty()) out.push_back(std::move(word));
        word.clear();
    };
    std::size_t i = 0;
    while (i < text.size()) {
        const std::size_t start = i;
        const char32_t cp = next_code_point(text, i);
        const std::string_view bytes = text.substr(start, i - start);
        if (cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r') {
            flush();
        } else if (is_punct_cp(cp) || is_cjk(cp)) {
            flush();
            out.emplace_back(bytes);
        } else {
            word.append(bytes);
        }
    }
    flush();
    return out;
}

Dataset load_dataset(const std::filesystem::path& path, Split split, const LoadOptions& options) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open dataset " + path.string());
    Dataset ds;
    ds.split = split;
    ds.name = options.name.empty() ? path.stem().string() : options.name;
    const auto base = path.parent_path();
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw IngestionError("malformed line " + std::to_string(lineno) + " (" + where + "): " + e.what());
        }
        if (!j.is_object() || !j.contains("id") || !j.contains("text") || !j.contains("label") ||
            !j["id"].is_string() || !j["text"].is_string() || !j["label"].is_number_integer() ||
            (j.contains("image_path") && !j["image_path"].is_null() && !j["image_path"].is_string())) {
            throw IngestionError("malformed line " + std::to_string(lineno) + " (" + where +
                                 "): expected keys id, text, image_path, label");
        }
        Sample s;
        s.id = j["id"].get<std::string>();
        const auto label = j["label"].get<long long>();
        if (label != 0 && label != 1) {
            throw ValidationError("label outside {0,1} at line " + std::to_string(lineno) + " (" + where + ")");
        }
        s.label = static_cast<int>(label);
        if (!ids.insert(s.id).second) {
            throw ValidationError("duplicate id '" + s.id + "' at line " + std::to_string(lineno));
        }
        s.text = tokenize(j["text"].get<std::string>());
        if (s.text.empty()) {
            throw ValidationError("empty text at line " + std::to_string(lineno) + " (" + where + ")");
        }
        if (s.text.size() > options.max_text_tokens) s.text.resize(options.max_text_tokens);

        s.image = white_image();
        s.image_absent = true;
        if (j.contains("image_path") && j["image_path"].is_string()) {
            std::filesystem::path ip = j["image_path"].get<std::string>();
            if (ip.is_relative()) ip = base / ip;
            try {
                const Image raw = read_image_file(ip);
                std::mt19937_64 rng(options.seed ^ fnv1a(s.id));
                s.image = std::make_shared<const Image>(prepare_image(raw, options.crop, &rng));
                s.image_absent = false;
            } catch (const IngestionError&) {
                ++ds.missing_images;
            }
        }
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

PairedImageTextDataset load_paired_dataset(const std::filesystem::path& path, std::size_t caption_limit) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open dataset " + path.string());
    PairedImageTextDataset ds;
    ds.name = path.stem().string();
    const auto base = path.parent_path();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw IngestionError("malformed line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("caption") || !j["caption"].is_string() || !j.contains("image_path") ||
            !j["image_path"].is_string()) {
            throw IngestionError("malformed line " + std::to_string(lineno) + ": expected keys caption, image_path");
        }
        CaptionImagePair p;
        p.caption = tokenize(j["caption"].get<std::string>());
        if (p.caption.empty()) throw ValidationError("empty caption at line " + std::to_string(lineno));
        if (p.caption.size() > caption_limit) p.caption.resize(caption_limit);
        std::filesystem::path ip = j["image_path"].get<std::string>();
        if (ip.is_relative()) ip = base / ip;
        try {
            p.image = std::make_shared<const Image>(prepare_image(read_image_file(ip), CropMode::Center));
        } catch (const IngestionError& e) {
            throw ValidationError("unresolvable image at line " + std::to_string(lineno) + ": " + e.what());
        }
        ds.pairs.push_back(std::move(p));
    }
    return ds;
}

}  // namespace retsimd
