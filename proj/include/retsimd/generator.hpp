// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "retsimd/autodiff.hpp"
#include "retsimd/data.hpp"
#include "retsimd/information.hpp"
#include "retsimd/optim.hpp"
#include "retsimd/segmentation.hpp"

namespace retsimd {

/// A generator emits either a shared-space feature or a pixel image.
using GeneratedOutput = std::variant<FeatureVector, Image>;

/// Maps a generated pixel image into the shared space (image encoder + W_a^v).
using ImagePathway = std::function<FeatureVector(const Image&)>;

class GeneratorBackend {
public:
    virtual ~GeneratorBackend() = default;
    virtual GeneratedOutput generate(const Tokens& segment) const = 0;
    /// Non-negative proxy for H(x^g | segment); lower means the segment explains x^g better.
    virtual double cond_score(const FeatureVector& generated, const Tokens& segment) const = 0;
    virtual bool trainable() const { return false; }
};

/// Backend whose parameters can be optimized through the tape.
class TrainableGenerator : public GeneratorBackend {
public:
    bool trainable() const override { return true; }
    virtual ParameterSet& params() = 0;
    virtual const ParameterSet& params() const = 0;
    virtual ad::Var generate(ad::Tape& tape, const Tokens& segment) = 0;
    virtual ad::Var cond_score(ad::Tape& tape, ad::Var generated, const Tokens& segment) = 0;
    using GeneratorBackend::cond_score;
    using GeneratorBackend::generate;
};

/// Label cue words recognised by the planted-signal mode. A segment's cue is
/// (#positive - #negative) / max(1, #positive + #negative).
struct PlantedLexicon {
    std::string positive_prefix = "cue+";
    std::string negative_prefix = "cue-";
    double score(const Tokens& segment) const;
};

/// Desk-scale generator: x^g = embed(segment) * head + leak * cue(segment) * u.
///
/// embed is the normalized mean of seeded hash token embeddings in the shared
/// space, head is the trainable d x d matrix, and u a fixed unit direction.
/// With leak = 0 the output depends only on the segment text through embed.
class MockGenerator final : public TrainableGenerator {
public:
    static constexpr const char* kHead = "generator.head";

    MockGenerator(Eigen::Index d, std::uint64_t seed, double leak_strength = 0.0, PlantedLexicon lexicon = {});

    GeneratedOutput generate(const Tokens& segment) const override;
    double cond_score(const FeatureVector& generated, const Tokens& segment) const override;
    ad::Var generate(ad::Tape& tape, const Tokens& segment) override;
    ad::Var cond_score(ad::Tape& tape, ad::Var generated, const Tokens& segment) override;

    ParameterSet& params() override { return params_; }
    const ParameterSet& params() const override { return params_; }

    RowVector embed(const Tokens& segment) const;
    const RowVector& leak_direction() const { return direction_; }
    double leak_strength() const { return leak_; }
    Eigen::Index dim() const { return d_; }

private:
    Eigen::Index d_;
    std::uint64_t seed_;
    double leak_;
    PlantedLexicon lexicon_;
    RowVector direction_;
    ParameterSet params_;
};

/// HTTP generator: POST /generate {prompt, seed} -> {feature} | {image_base64};
/// POST /cond_score {prompt, feature} -> {score}.
class RemoteGenerator final : public GeneratorBackend {
public:
    RemoteGenerator(std::string url, std::uint64_t seed);
    GeneratedOutput generate(const Tokens& segment) const override;
    double cond_score(const FeatureVector& generated, const Tokens& segment) const override;

private:
    std::string url_;
    std::uint64_t seed_;
};

/// Generates one shared-space feature per segment, in order. Pixel outputs go
/// through `pathway`; failures are rethrown as GenerationError with the index.
std::vector<FeatureVector> generate_sequence(const SegmentSet& segments, const GeneratorBackend& backend,
                                             const ImagePathway& pathway = {});

/// Distance weight |j - m| / (k - 1) for 1-based segment indices.
double xi_weight(std::size_t j, std::size_t m, std::size_t k);

/// Text-image regularizer of one text from a K x K table where
/// scores(j, m) = cond_score(x_j | s_m): mean over j of the mean over m != j
/// of scores(j, j) - xi(j, m) * scores(j, m). Zero for K = 1.
double r_mti_from_scores(const Matrix& scores);
double r_mti(const SegmentSet& segments, const std::vector<FeatureVector>& generated, const GeneratorBackend& backend);
ad::Var r_mti(ad::Tape& tape, const SegmentSet& segments, const std::vector<ad::Var>& generated,
              TrainableGenerator& backend);

/// Linear classifier over mean-pooled generated features, used by R_MIL.
struct AuxHead {
    Matrix weight;  // d x 2
    RowVector bias;  // 1 x 2

    static AuxHead zeros(Eigen::Index d);
    RowVector predict(const RowVector& pooled) const;
    /// Full-batch logistic regression from zero init; deterministic.
    static AuxHead fit(const std::vector<RowVector>& pooled, const std::vector<int>& labels, int iterations = 200,
                       double learning_rate = 0.5);
};

/// -(H(y) - H(y | {x^g})), with H(y) from the prior and H(y | {x^g}) the
/// predictive entropy of the aux head on the mean-pooled features.
double r_mil_from_predictive(const RowVector& predictive, const RowVector& label_prior);
double r_mil(const std::vector<FeatureVector>& generated, int label, const AuxHead& aux_head,
             const RowVector& label_prior);
ad::Var r_mil(ad::Tape& tape, const std::vector<ad::Var>& generated, int label, const AuxHead& aux_head,
              const RowVector& label_prior);

/// Caption with its target representation in the generator's output space.
struct CaptionTarget {
    Tokens caption;
    FeatureVector target;
};

/// Mean over pairs of the per-coordinate mean squared error.
double l_t2i(const GeneratorBackend& backend, const std::vector<CaptionTarget>& batch,
             const ImagePathway& pathway = {});
ad::Var l_t2i(ad::Tape& tape, TrainableGenerator& backend, const std::vector<CaptionTarget>& batch);

struct GeneratorLossReport {
    double l_t2i = 0.0;
    double r_mti = 0.0;
    double r_mil = 0.0;
    double l_gen = 0.0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
};

/// One text of the detector batch as seen by the generator.
struct GeneratorSample {
    SegmentSet segments;
    int label = 0;
};

struct GeneratorBatch {
    std::vector<GeneratorSample> mmd;
    std::vector<CaptionTarget> paired;
    AuxHead aux_head;
    RowVector label_prior;
};

/// L_GEN = L_T2I + alpha1 R_MTI + alpha2 R_MIL with one optimizer step on the
/// generator parameters only. On a non-finite loss the parameters are left
/// unchanged and NumericError is thrown.
GeneratorLossReport generator_step(TrainableGenerator& backend, const GeneratorBatch& batch, double alpha1,
                                   double alpha2, Adam& optimizer);

/// Builds "mock" or "remote:<url>" backends.
std::unique_ptr<GeneratorBackend> make_generator(const std::string& tag, Eigen::Index d, std::uint64_t seed,
                                                 double leak_strength, const PlantedLexicon& lexicon);

}  // namespace retsimd
