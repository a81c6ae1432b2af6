// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#include "retsimd/pipeline.hpp"

#include <cstdlib>

#include "retsimd/error.hpp"

namespace retsimd {

std::unique_ptr<Components> make_components(const ExperimentConfig& config) {
    auto c = std::make_unique<Components>();
    c->encoder = make_encoder(config.encoder.backend, config.encoder.d_t, config.encoder.d_v, config.encoder.seed);
    if (config.graph.parser == "adjacent") {
        c->parser = std::make_unique<AdjacentTokenParser>();
    } else if (config.graph.parser.rfind("subprocess:", 0) == 0) {
        c->parser = std::make_unique<SubprocessParser>(config.graph.parser.substr(11));
    } else if (config.graph.parser != "none") {
        throw ConfigError("unknown dependency parser '" + config.graph.parser + "'");
    }
    if (config.variant != DetectorVariant::NoAugmentation) {
        c->generator = make_generator(config.generator.backend, config.encoder.d, config.generator.seed,
                                      config.generator.leak_strength, PlantedLexicon{});
    }
    c->pipeline.encoder = c->encoder.get();
    c->pipeline.parser = c->parser.get();
    c->pipeline.segmentation = config.segmentation;
    return c;
}

ExperimentData load_experiment_data(const ExperimentConfig& config, std::uint64_t seed) {
    ExperimentData d;
    auto load = [&](const std::string& path, Split split, CropMode crop) {
        if (path.empty()) return Dataset{};
        LoadOptions opt;
        opt.max_text_tokens = config.data.max_text_tokens;
        opt.crop = crop;
        opt.seed = seed;
        return load_dataset(path, split, opt);
    };
    d.train = load(config.data.train, Split::Train, CropMode::Random);
    d.validation = load(config.data.validation, Split::Validation, CropMode::Center);
    d.test = load(config.data.test, Split::Test, CropMode::Center);
    if (!config.data.paired.empty()) d.paired = load_paired_dataset(config.data.paired, config.data.caption_limit);
    return d;
}

std::optional<std::filesystem::path> cache_root_from_env() {
    const char* dir = std::getenv("RETSIMD_CACHE_DIR");
    if (dir == nullptr || *dir == '\0') return std::nullopt;
    return std::filesystem::path(dir);
}

ClassificationMetrics evaluate_split(const Components& components, const FeatureCache* cache,
                                     const ParameterSet& params, const DetectorConfig& config, const Dataset& dataset) {
    std::vector<int> preds, labels;
    for (const auto& s : dataset.samples) {
        const EncodedSample enc = components.pipeline.encode(s);
        preds.push_back(predicted_label(detector_predict(make_input(enc, cache, config), params, config)));
        labels.push_back(s.label);
    }
    return classification_metrics(preds, labels);
}

CheckpointScore evaluate_checkpoint(const ExperimentConfig& config, const Checkpoint& checkpoint,
                                    const Dataset& dataset, bool contributions) {
    if (dataset.samples.empty()) throw ContractError("evaluate: empty dataset");
    auto comp = make_components(config);
    const DetectorConfig dc = config.detector_config();
    std::optional<std::filesystem::path> cache_root = cache_root_from_env();
    if (cache_root) *cache_root /= config.run_id + "-eval";
    FeatureCache cache(config.segmentation.k, dataset.name.empty() ? "eval" : dataset.name, cache_root);
    const ParameterSet& theta = checkpoint.detector_params;
    if (config.variant != DetectorVariant::NoAugmentation) {
        if (auto* g = dynamic_cast<TrainableGenerator*>(comp->generator.get())) {
            if (checkpoint.generator_params.size() > 0) g->params() = checkpoint.generator_params;
        }
        const ImagePathway pathway = [&](const Image& img) {
            return project_shared(comp->encoder->encode_image(img), Modality::Image, theta);
        };
        regenerate({&dataset}, comp->pipeline, *comp->generator, pathway, cache, 1);
    }
    CheckpointScore out;
    out.metrics = evaluate_split(*comp, &cache, theta, dc, dataset);
    if (contributions) {
        DetectorPredictor predictor(comp->pipeline, &cache, theta, dc);
        out.contributions = evaluate_contributions(predictor, dataset, config.evaluation.replacement_seeds);
    }
    return out;
}

RunOutcome run_experiment(const ExperimentConfig& config, const ExperimentData& data, std::uint64_t seed,
                          const std::optional<std::filesystem::path>& run_dir, bool contributions,
                          const TrainHooks& hooks, const Checkpoint* resume) {
    auto comp = make_components(config);
    std::optional<std::filesystem::path> cache_root = cache_root_from_env();
    if (cache_root) *cache_root /= config.run_id + "-seed" + std::to_string(seed);
    FeatureCache cache(config.segmentation.k, data.train.name.empty() ? "train" : data.train.name, cache_root);

    TrainInputs in;
    in.train = &data.train;
    in.validation = data.validation.samples.empty() ? nullptr : &data.validation;
    in.paired = data.paired.pairs.empty() ? nullptr : &data.paired;
    in.pipeline = comp->pipeline;
    in.generator = comp->generator.get();
    in.cache = &cache;
    in.detector = config.detector_config();
    in.config = config.train;
    in.config.seed = seed;
    in.run_dir = run_dir;
    in.resume = resume;

    RunOutcome out;
    out.training = train(in, hooks);
    const Dataset& scored = data.test.samples.empty() ? data.train : data.test;
    CheckpointScore score = evaluate_checkpoint(config, out.training.best, scored, contributions);
    out.test_metrics = score.metrics;
    out.contributions = std::move(score.contributions);
    return out;
}

}  // namespace retsimd
