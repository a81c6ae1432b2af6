// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <optional>

#include "retsimd/config.hpp"
#include "retsimd/evaluation.hpp"
#include "retsimd/trainer.hpp"

namespace retsimd {

/// Backends built from a config, plus the pipeline that borrows them.
struct Components {
    std::unique_ptr<EncoderBackend> encoder;
    std::unique_ptr<DependencyParser> parser;
    std::unique_ptr<GeneratorBackend> generator;
    FeaturePipeline pipeline;

    Components() = default;
    Components(const Components&) = delete;
    Components& operator=(const Components&) = delete;
};

std::unique_ptr<Components> make_components(const ExperimentConfig& config);

struct ExperimentData {
    Dataset train;
    Dataset validation;
    Dataset test;
    PairedImageTextDataset paired;
};

/// Loads the dataset files named in the config.
ExperimentData load_experiment_data(const ExperimentConfig& config, std::uint64_t seed);

struct RunOutcome {
    TrainResult training;
    ClassificationMetrics test_metrics;
    std::optional<ContributionReport> contributions;
};

struct CheckpointScore {
    ClassificationMetrics metrics;
    std::optional<ContributionReport> contributions;
};

/// Restores a checkpoint, regenerates features for `dataset` with its
/// generator and scores it; optionally runs the modality-contribution protocol.
CheckpointScore evaluate_checkpoint(const ExperimentConfig& config, const Checkpoint& checkpoint,
                                    const Dataset& dataset, bool contributions);

/// Trains one seed, then scores the best checkpoint on the test split (the
/// training split when there is no test split).
RunOutcome run_experiment(const ExperimentConfig& config, const ExperimentData& data, std::uint64_t seed,
                          const std::optional<std::filesystem::path>& run_dir, bool contributions,
                          const TrainHooks& hooks = {}, const Checkpoint* resume = nullptr);

/// Scores a dataset with fixed parameters (features must already be cached).
ClassificationMetrics evaluate_split(const Components& components, const FeatureCache* cache,
                                     const ParameterSet& params, const DetectorConfig& config, const Dataset& dataset);

/// Cache root honouring RETSIMD_CACHE_DIR; nullopt keeps the cache in memory.
std::optional<std::filesystem::path> cache_root_from_env();

}  // namespace retsimd
