// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "retsimd/detector.hpp"
#include "retsimd/segmentation.hpp"
#include "retsimd/trainer.hpp"

namespace retsimd {

struct DataConfig {
    std::string train;
    std::string validation;
    std::string test;
    std::string paired;
    std::size_t max_text_tokens = 128;
    std::size_t caption_limit = 77;
    bool operator==(const DataConfig&) const = default;
};

struct EncoderConfig {
    /// "toy" or "remote:<url>".
    std::string backend = "toy";
    std::int64_t d_t = 32;
    std::int64_t d_v = 32;
    std::int64_t d = 16;
    std::uint64_t seed = 7;
    bool operator==(const EncoderConfig&) const = default;
};

struct GeneratorConfig {
    /// "mock", "remote" (uses RETSIMD_GEN_URL) or "remote:<url>".
    std::string backend = "mock";
    double leak_strength = 0.0;
    std::uint64_t seed = 11;
    bool operator==(const GeneratorConfig&) const = default;
};

struct GraphConfig {
    /// "adjacent", "none" or "subprocess:<command>".
    std::string parser = "adjacent";
    bool operator==(const GraphConfig&) const = default;
};

struct EvaluationConfig {
    std::vector<std::uint64_t> replacement_seeds{1, 2, 3};
    std::string split = "test";
    bool operator==(const EvaluationConfig&) const = default;
};

struct ExperimentConfig {
    DataConfig data;
    SegmentationConfig segmentation;
    EncoderConfig encoder;
    GeneratorConfig generator;
    GraphConfig graph;
    TrainConfig train;
    std::int64_t hidden = 16;
    DetectorVariant variant = DetectorVariant::Full;
    AttentionRegularizer r_ca = AttentionRegularizer::None;
    EvaluationConfig evaluation;
    std::string run_id = "run";
    std::vector<std::uint64_t> seeds{1};

    DetectorConfig detector_config() const;
    bool operator==(const ExperimentConfig& other) const;
};

/// Validates every key against the schema (unknown keys and wrong types are
/// ConfigErrors) and fills defaults for absent keys.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& c);

/// The JSON schema document describing the config format.
const nlohmann::json& config_schema();

}  // namespace retsimd
