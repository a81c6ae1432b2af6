// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "retsimd/cache.hpp"
#include "retsimd/checkpoint.hpp"
#include "retsimd/data.hpp"
#include "retsimd/detector.hpp"
#include "retsimd/generator.hpp"

namespace retsimd {

/// Alternating-training hyperparameters. update_step and generation_step are
/// counted in detector iterations; one epoch is ceil(n_train / batch_size_detector)
/// iterations, so "every 5 epochs" is 5 * that.
struct TrainConfig {
    double alpha1 = 0.01;
    double alpha2 = 0.01;
    double beta = 0.01;
    std::size_t update_step = 5;
    std::size_t generation_step = 5;
    std::size_t iterations = 1000;
    std::size_t batch_size_detector = 16;
    std::size_t batch_size_generator = 4;
    double lr_encoder = 3e-5;
    double lr_generator = 1e-4;
    double lr_other = 1e-3;
    double weight_decay = 0.01;
    std::size_t patience = 10;
    std::uint64_t seed = 1;
    int aux_fit_iterations = 200;
};

struct TrainState {
    std::size_t iteration = 0;
    double best_val_micro_f1 = -1.0;
    std::size_t best_iteration = 0;
    std::size_t epochs_since_improvement = 0;
    std::size_t epoch = 0;
    int cache_round = 0;
    bool stopped_early = false;
    bool aborted = false;
    std::string abort_reason;
    std::vector<double> loss_history;
    std::vector<GeneratorLossReport> generator_history;
    std::vector<double> validation_history;
    std::vector<std::size_t> regeneration_iterations;
    std::vector<std::size_t> generator_update_iterations;
};

/// Observation points for instrumentation; all optional.
struct TrainHooks {
    std::function<void(std::size_t iteration, const DetectorLossReport&)> after_detector_step;
    std::function<void(std::size_t iteration, int round)> after_regeneration;
    std::function<void(std::size_t iteration, const GeneratorLossReport&)> after_generator_step;
    std::function<void(std::size_t epoch, double val_micro_f1)> after_validation;
    /// Called before and after every parameter-mutating step with the current θ and φ.
    std::function<void(std::size_t iteration, const char* phase, const ParameterSet& theta, const ParameterSet* phi)>
        parameter_probe;
};

struct TrainInputs {
    const Dataset* train = nullptr;
    const Dataset* validation = nullptr;
    /// Further datasets whose generated features are kept current (e.g. test).
    std::vector<const Dataset*> extra;
    const PairedImageTextDataset* paired = nullptr;

    FeaturePipeline pipeline;
    GeneratorBackend* generator = nullptr;
    FeatureCache* cache = nullptr;

    DetectorConfig detector;
    TrainConfig config;

    /// When set: checkpoints `ckpt_<iter>` and `metrics.jsonl` are written here.
    std::optional<std::filesystem::path> run_dir;
    const Checkpoint* resume = nullptr;
};

struct TrainResult {
    /// Best checkpoint by validation Micro F1 (the last one when there is no validation set).
    Checkpoint best;
    Checkpoint last;
    TrainState state;
};

/// Iteration i (1-based) runs a detector step; when i % generation_step == 0 all
/// cached generated features are regenerated; when i % update_step == 0 the
/// generator takes one step. Early-stops on validation Micro F1.
TrainResult train(const TrainInputs& inputs, const TrainHooks& hooks = {});

/// Generates features for every sample and writes them to the cache with the
/// given round. Runs across samples concurrently and returns when all are done.
void regenerate(const std::vector<const Dataset*>& datasets, const FeaturePipeline& pipeline,
                const GeneratorBackend& generator, const ImagePathway& pathway, FeatureCache& cache, int round);

/// Fraction of argmax predictions equal to the labels (Micro F1 for binary single-label data).
double micro_f1(const std::vector<EncodedSample>& samples, const FeatureCache* cache, const ParameterSet& params,
                const DetectorConfig& config);

}  // namespace retsimd
