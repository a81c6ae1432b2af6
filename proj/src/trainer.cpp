// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#include "retsimd/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "retsimd/error.hpp"

namespace retsimd {

using nlohmann::json;

namespace {

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(std::max(1U, std::thread::hardware_concurrency()), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                    }
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

// Portable Fisher-Yates so that runs replay identically across standard libraries.
void shuffle_indices(std::vector<std::size_t>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

std::string rng_state(const std::mt19937_64& rng) {
    std::ostringstream os;
    os << rng;
    return os.str();
}

void save_moments(Checkpoint& ckpt, Adam& opt, const std::string& tag) {
    for (const auto& [name, m] : opt.first_moments()) ckpt.extra_tensors["adam." + tag + ".m/" + name] = m;
    for (const auto& [name, v] : opt.second_moments()) ckpt.extra_tensors["adam." + tag + ".v/" + name] = v;
}

void load_moments(const Checkpoint& ckpt, Adam& opt, const std::string& tag) {
    const std::string pm = "adam." + tag + ".m/", pv = "adam." + tag + ".v/";
    for (const auto& [key, value] : ckpt.extra_tensors) {
        if (key.rfind(pm, 0) == 0) opt.first_moments()[key.substr(pm.size())] = value;
        if (key.rfind(pv, 0) == 0) opt.second_moments()[key.substr(pv.size())] = value;
    }
}

}  // namespace

void regenerate(const std::vector<const Dataset*>& datasets, const FeaturePipeline& pipeline,
                const GeneratorBackend& generator, const ImagePathway& pathway, FeatureCache& cache, int round) {
    std::vector<const Sample*> all;
    for (const Dataset* ds : datasets) {
        if (ds == nullptr) continue;
        for (const auto& s : ds->samples) all.push_back(&s);
    }
    parallel_for(all.size(), [&](std::size_t i) {
        const Sample& s = *all[i];
        const SegmentSet seg = segment(s.text, pipeline.segmentation);
        cache.put(s.id, generate_sequence(seg, generator, pathway), round, seg.k());
    });
}

double micro_f1(const std::vector<EncodedSample>& samples, const FeatureCache* cache, const ParameterSet& params,
                const DetectorConfig& config) {
    if (samples.empty()) return 0.0;
    std::size_t correct = 0;
    for (const auto& enc : samples) {
        const RowVector p = detector_predict(make_input(enc, cache, config), params, config);
        if ((p[1] > p[0] ? 1 : 0) == enc.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(samples.size());
}

TrainResult train(const TrainInputs& in, const TrainHooks& hooks) {
    if (in.train == nullptr || in.train->samples.empty()) throw ContractError("train: empty training set");
    const TrainConfig& cfg = in.config;
    if (cfg.update_step == 0 || cfg.generation_step == 0 || cfg.batch_size_detector == 0 ||
        cfg.batch_size_generator == 0) {
        throw ConfigError("train: step sizes and batch sizes must be positive");
    }
    const bool augment = in.detector.variant != DetectorVariant::NoAugmentation;
    if (augment && (in.generator == nullptr || in.cache == nullptr)) {
        throw ContractError("train: augmented variants need a generator and a cache");
    }
    auto* trainable = dynamic_cast<TrainableGenerator*>(in.generator);
    if (augment && trainable != nullptr && (in.paired == nullptr || in.paired->pairs.empty())) {
        throw ContractError("train: a trainable generator needs a non-empty paired dataset");
    }

    ParameterSet theta = make_detector_params(in.detector, cfg.seed);
    Adam det_opt({cfg.lr_other, 0.9, 0.999, 1e-8, 0.0});
    det_opt.set_lr_for_prefix("encoder.backbone", cfg.lr_encoder);
    Adam gen_opt({cfg.lr_generator, 0.9, 0.999, 1e-8, cfg.weight_decay});
    // Epoch order and generator sampling draw from separate streams so that a
    // checkpoint taken mid-epoch can replay both exactly.
    std::mt19937_64 order_rng(cfg.seed);
    std::mt19937_64 sample_rng(cfg.seed ^ 0x6A09E667F3BCC909ULL);
    std::size_t cursor = 0;
    TrainState state;

    if (in.resume != nullptr) {
        theta = in.resume->detector_params;
        if (trainable != nullptr) trainable->params() = in.resume->generator_params;
        load_moments(*in.resume, det_opt, "det");
        load_moments(*in.resume, gen_opt, "gen");
        const json s = json::parse(in.resume->state.empty() ? "{}" : in.resume->state);
        state.iteration = in.resume->iteration;
        det_opt.set_steps(s.value("det_steps", std::int64_t{0}));
        gen_opt.set_steps(s.value("gen_steps", std::int64_t{0}));
        state.best_val_micro_f1 = s.value("best_val_micro_f1", -1.0);
        state.best_iteration = s.value("best_iteration", std::size_t{0});
        state.epochs_since_improvement = s.value("epochs_since_improvement", std::size_t{0});
        state.epoch = s.value("epoch", std::size_t{0});
        state.cache_round = s.value("cache_round", 0);
        if (s.contains("order_rng")) {
            std::istringstream is(s["order_rng"].get<std::string>());
            is >> order_rng;
        }
        if (s.contains("sample_rng")) {
            std::istringstream is(s["sample_rng"].get<std::string>());
            is >> sample_rng;
        }
        cursor = s.value("cursor", std::size_t{0});
    }

    // Encoders are frozen, so hidden features and graph structure are computed once.
    auto encode_all = [&](const Dataset* ds) {
        std::vector<EncodedSample> out;
        if (ds == nullptr) return out;
        out.resize(ds->samples.size());
        parallel_for(ds->samples.size(), [&](std::size_t i) { out[i] = in.pipeline.encode(ds->samples[i]); });
        return out;
    };
    const std::vector<EncodedSample> train_enc = encode_all(in.train);
    const std::vector<EncodedSample> val_enc = encode_all(in.validation);

    std::vector<const Dataset*> cached_sets{in.train};
    if (in.validation != nullptr) cached_sets.push_back(in.validation);
    for (const Dataset* d : in.extra) cached_sets.push_back(d);

    const ImagePathway pathway = [&](const Image& img) {
        return project_shared(in.pipeline.encoder->encode_image(img), Modality::Image, theta);
    };

    if (augment) {
        bool need_initial = in.resume == nullptr;
        if (!need_initial) {
            for (const auto* ds : cached_sets) {
                for (const auto& s : ds->samples) need_initial = need_initial || !in.cache->get(s.id).has_value();
            }
        }
        if (need_initial) {
            if (state.cache_round == 0) state.cache_round = 1;
            regenerate(cached_sets, in.pipeline, *in.generator, pathway, *in.cache, state.cache_round);
        }
    }

    RowVector prior = RowVector::Zero(2);
    for (const auto& s : in.train->samples) prior[s.label] += 1.0;
    prior /= prior.sum();
    std::vector<RowVector> paired_z;
    if (in.paired != nullptr) {
        for (const auto& p : in.paired->pairs) paired_z.push_back(in.pipeline.encoder->encode_image(*p.image));
    }

    const std::size_t n_train = in.train->samples.size();
    std::vector<std::size_t> order(n_train);
    std::string epoch_rng_state;
    auto start_epoch_order = [&] {
        epoch_rng_state = rng_state(order_rng);
        for (std::size_t i = 0; i < n_train; ++i) order[i] = i;
        shuffle_indices(order, order_rng);
    };
    start_epoch_order();
    if (cursor >= n_train) cursor = 0;

    auto make_checkpoint = [&](std::size_t iteration, double val_f1) {
        Checkpoint c;
        c.detector_params = theta;
        if (trainable != nullptr) c.generator_params = trainable->params();
        c.iteration = iteration;
        c.metrics["val_micro_f1"] = val_f1;
        if (!state.loss_history.empty()) c.metrics["train_loss"] = state.loss_history.back();
        save_moments(c, det_opt, "det");
        save_moments(c, gen_opt, "gen");
        json s;
        s["det_steps"] = det_opt.steps();
        s["gen_steps"] = gen_opt.steps();
        s["best_val_micro_f1"] = state.best_val_micro_f1;
        s["best_iteration"] = state.best_iteration;
        s["epochs_since_improvement"] = state.epochs_since_improvement;
        s["epoch"] = state.epoch;
        s["cache_round"] = state.cache_round;
        s["order_rng"] = epoch_rng_state;
        s["sample_rng"] = rng_state(sample_rng);
        s["cursor"] = cursor;
        c.state = s.dump();
        return c;
    };

    std::ofstream metrics_log;
    if (in.run_dir) {
        std::filesystem::create_directories(*in.run_dir);
        metrics_log.open(*in.run_dir / "metrics.jsonl", std::ios::app);
    }

    TrainResult result;
    result.best = make_checkpoint(state.iteration, state.best_val_micro_f1);

    auto probe = [&](std::size_t i, const char* phase) {
        if (hooks.parameter_probe) hooks.parameter_probe(i, phase, theta, trainable ? &trainable->params() : nullptr);
    };

    try {
        for (std::size_t i = state.iteration + 1; i <= cfg.iterations; ++i) {
            std::vector<DetectorInput> batch;
            for (std::size_t b = 0; b < cfg.batch_size_detector && cursor < n_train; ++b, ++cursor) {
                batch.push_back(make_input(train_enc[order[cursor]], in.cache, in.detector));
            }
            probe(i, "detector_before");
            const DetectorLossReport rep = detector_step(batch, theta, in.detector, cfg.beta, det_opt);
            probe(i, "detector_after");
            state.iteration = i;
            state.loss_history.push_back(rep.l_det);
            if (hooks.after_detector_step) hooks.after_detector_step(i, rep);

            if (augment && i % cfg.generation_step == 0) {
                state.cache_round = static_cast<int>(i / cfg.generation_step) + 1;
                regenerate(cached_sets, in.pipeline, *in.generator, pathway, *in.cache, state.cache_round);
                state.regeneration_iterations.push_back(i);
                if (hooks.after_regeneration) hooks.after_regeneration(i, state.cache_round);
            }

            if (augment && trainable != nullptr && i % cfg.update_step == 0) {
                // Aux head for the image-label term is refit on the current cached features.
                std::vector<RowVector> pooled;
                std::vector<int> labels;
                for (const auto& enc : train_enc) {
                    const auto entry = in.cache->get(enc.id);
                    RowVector acc = RowVector::Zero(in.detector.d);
                    for (const auto& f : entry->features) acc += f.values();
                    pooled.push_back(acc / static_cast<double>(entry->features.size()));
                    labels.push_back(enc.label);
                }
                GeneratorBatch gb;
                gb.aux_head = AuxHead::fit(pooled, labels, cfg.aux_fit_iterations);
                gb.label_prior = prior;
                for (std::size_t b = 0; b < cfg.batch_size_generator; ++b) {
                    const Sample& s = in.train->samples[sample_rng() % n_train];
                    gb.mmd.push_back({segment(s.text, in.pipeline.segmentation), s.label});
                    const std::size_t pi = sample_rng() % in.paired->pairs.size();
                    gb.paired.push_back({in.paired->pairs[pi].caption,
                                         project_shared(paired_z[pi], Modality::Image, theta)});
                }
                probe(i, "generator_before");
                const GeneratorLossReport grep = generator_step(*trainable, gb, cfg.alpha1, cfg.alpha2, gen_opt);
                probe(i, "generator_after");
                state.generator_history.push_back(grep);
                state.generator_update_iterations.push_back(i);
                if (hooks.after_generator_step) hooks.after_generator_step(i, grep);
            }

            const bool epoch_end = cursor >= n_train;
            if (epoch_end || i == cfg.iterations) {
                if (epoch_end) {
                    ++state.epoch;
                    cursor = 0;
                    start_epoch_order();
                }
                double val = micro_f1(val_enc.empty() ? train_enc : val_enc, in.cache, theta, in.detector);
                state.validation_history.push_back(val);
                if (hooks.after_validation) hooks.after_validation(state.epoch, val);
                if (val > state.best_val_micro_f1) {
                    state.best_val_micro_f1 = val;
                    state.best_iteration = i;
                    state.epochs_since_improvement = 0;
                    result.best = make_checkpoint(i, val);
                    if (in.run_dir) save_checkpoint(*in.run_dir / ("ckpt_" + std::to_string(i)), result.best);
                } else {
                    ++state.epochs_since_improvement;
                }
                if (metrics_log.is_open()) {
                    metrics_log << json{{"epoch", state.epoch},
                                        {"iteration", i},
                                        {"train_loss", rep.l_det},
                                        {"val_micro_f1", val},
                                        {"cache_round", state.cache_round}}
                                       .dump()
                                << '\n';
                }
                if (state.epochs_since_improvement >= cfg.patience) {
                    state.stopped_early = true;
                    break;
                }
            }
        }
    } catch (const NumericError& e) {
        state.aborted = true;
        state.abort_reason = e.what();
    }

    result.last = make_checkpoint(state.iteration, state.validation_history.empty() ? -1.0 : state.validation_history.back());
    if (in.run_dir) save_checkpoint(*in.run_dir / ("ckpt_" + std::to_string(state.iteration)), result.last);
    if (val_enc.empty() && state.validation_history.empty()) result.best = result.last;
    result.state = std::move(state);
    return result;
}

}  // namespace retsimd
