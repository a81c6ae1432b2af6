// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "retsimd/autodiff.hpp"
#include "retsimd/cache.hpp"
#include "retsimd/data.hpp"
#include "retsimd/encoders.hpp"
#include "retsimd/graph_fusion.hpp"
#include "retsimd/optim.hpp"
#include "retsimd/segmentation.hpp"

namespace retsimd {

/// Architecture variants used by the ablation study.
enum class DetectorVariant {
    Full,            ///< graph + GCN + cross-attention over original and generated images
    NoGraph,         ///< linear map of [h_t, h_v, mean h_g] instead of the graph
    NoAugmentation,  ///< original image only (single-node graph), no generator
};

std::string_view to_string(DetectorVariant v);
DetectorVariant parse_detector_variant(std::string_view s);

/// Optional R_CA regularizer. The paper leaves R_CA undefined, so the default is none.
enum class AttentionRegularizer { None, AttentionEntropy };

struct DetectorConfig {
    Eigen::Index d_t = 32;
    Eigen::Index d_v = 32;
    Eigen::Index d = 16;
    Eigen::Index hidden = 16;
    DetectorVariant variant = DetectorVariant::Full;
    AttentionRegularizer r_ca = AttentionRegularizer::None;
};

/// Classifier weights: d -> hidden (ReLU) -> 2.
struct ClassifierParams {
    static constexpr const char* kW1 = "cls.w1";
    static constexpr const char* kB1 = "cls.b1";
    static constexpr const char* kW2 = "cls.w2";
    static constexpr const char* kB2 = "cls.b2";
    static void register_into(ParameterSet& params, Eigen::Index d, Eigen::Index hidden, std::uint64_t seed);
};

inline constexpr const char* kConcatWeight = "concat.w";

/// Registers every trainable detector tensor exactly once.
ParameterSet make_detector_params(const DetectorConfig& config, std::uint64_t seed);

/// Softmax of the two-layer map; sums to 1.
RowVector classify(const FeatureVector& e, const ParameterSet& params);
ad::Var classify(ad::Tape& tape, ad::Var e, ParameterSet& params);

/// Mean cross-entropy (natural log). Probabilities at the true label are
/// floored at 1e-12; each floored entry increments `clamped` when given.
double l_vc(const std::vector<RowVector>& predictions, const std::vector<int>& labels,
            std::size_t* clamped = nullptr);

inline double l_det(double l_vc_value, double r_ca_value, double beta) { return l_vc_value + beta * r_ca_value; }

/// Per-sample tensors fed to the network. Everything except the parameters is constant.
struct DetectorInput {
    RowVector z_t;
    RowVector z_v;
    /// K x d generated features in the shared space (empty for NoAugmentation).
    Matrix generated;
    /// (K+1) x (K+1) normalized adjacency.
    Matrix adjacency;
    int label = 0;
};

struct ForwardVars {
    ad::Var probs;
    std::optional<AttentionVars> attention;
};

ForwardVars detector_forward(ad::Tape& tape, const DetectorInput& input, ParameterSet& params,
                             const DetectorConfig& config);
RowVector detector_predict(const DetectorInput& input, const ParameterSet& params, const DetectorConfig& config);

/// Sample encodings that stay fixed during training: hidden features and the
/// image-graph structure derived from the text.
struct EncodedSample {
    std::string id;
    int label = 0;
    RowVector z_t;
    RowVector z_v;
    SegmentSet segments;
    /// Normalized (K+1) x (K+1) adjacency of the generated-image graph.
    Matrix adjacency;
};

/// Everything needed to turn Samples into DetectorInputs.
struct FeaturePipeline {
    const EncoderBackend* encoder = nullptr;
    const DependencyParser* parser = nullptr;  // null: no dependency edges
    SegmentationConfig segmentation;

    EncodedSample encode(const Sample& sample) const;
    /// Graph structure for a text, normalized.
    Matrix graph_structure(const Tokens& text, SegmentSet* segments_out = nullptr) const;
};

/// Builds the network input, fetching generated features from the cache.
/// Throws PipelineError on a cache miss.
DetectorInput make_input(const EncodedSample& enc, const FeatureCache* cache, const DetectorConfig& config);

struct DetectorLossReport {
    double l_vc = 0.0;
    double r_ca = 0.0;
    double l_det = 0.0;
    double accuracy = 0.0;
};

/// One optimizer step on the detector parameters over a batch. On a
/// non-finite loss the parameters are left bitwise unchanged and NumericError is thrown.
DetectorLossReport detector_step(const std::vector<DetectorInput>& batch, ParameterSet& params,
                                 const DetectorConfig& config, double beta, Adam& optimizer);

/// Loss and accuracy of a batch without updating anything.
DetectorLossReport detector_loss(const std::vector<DetectorInput>& batch, const ParameterSet& params,
                                 const DetectorConfig& config, double beta);

}  // namespace retsimd
