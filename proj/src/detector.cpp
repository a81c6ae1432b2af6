// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#include "retsimd/detector.hpp"

#include <cmath>

#include "retsimd/error.hpp"
#include "retsimd/util.hpp"

namespace retsimd {

std::string_view to_string(DetectorVariant v) {
    switch (v) {
        case DetectorVariant::Full: return "full";
        case DetectorVariant::NoGraph: return "no_graph";
        case DetectorVariant::NoAugmentation: return "no_augmentation";
    }
    return "full";
}

DetectorVariant parse_detector_variant(std::string_view s) {
    if (s == "full") return DetectorVariant::Full;
    if (s == "no_graph") return DetectorVariant::NoGraph;
    if (s == "no_augmentation") return DetectorVariant::NoAugmentation;
    throw ConfigError("unknown detector variant: " + std::string(s));
}

void ClassifierParams::register_into(ParameterSet& params, Eigen::Index d, Eigen::Index hidden, std::uint64_t seed) {
    SplitMix64 rng(seed ^ 0x94D049BB133111EBULL);
    auto init = [&](Eigen::Index rows, Eigen::Index cols) {
        Matrix m(rows, cols);
        const double s = std::sqrt(2.0 / static_cast<double>(rows));
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal() * s;
        return m;
    };
    params.add(kW1, init(d, hidden));
    params.add(kB1, Matrix::Zero(1, hidden));
    params.add(kW2, init(hidden, 2));
    params.add(kB2, Matrix::Zero(1, 2));
}

ParameterSet make_detector_params(const DetectorConfig& config, std::uint64_t seed) {
    ParameterSet params;
    EncoderParams{config.d_t, config.d_v, config.d}.register_into(params, seed);
    if (config.variant == DetectorVariant::NoGraph) {
        SplitMix64 rng(seed ^ 0xBF58476D1CE4E5B9ULL);
        Matrix w(3 * config.d, config.d);
        const double s = 1.0 / std::sqrt(static_cast<double>(3 * config.d));
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.normal() * s;
        params.add(kConcatWeight, std::move(w));
    } else {
        GcnParams::register_into(params, config.d, seed);
        AttentionParams::register_into(params, config.d, seed);
    }
    ClassifierParams::register_into(params, config.d, config.hidden, seed);
    return params;
}

ad::Var classify(ad::Tape& tape, ad::Var e, ParameterSet& params) {
    const Parameter& w1 = params.get(ClassifierParams::kW1);
    if (e.rows() != 1 || e.cols() != w1.value.rows()) throw ContractError("classify: feature dimension mismatch");
    ad::Var h = ad::matmul(e, tape.param(params.get(ClassifierParams::kW1)));
    h = ad::relu(ad::add(h, tape.param(params.get(ClassifierParams::kB1))));
    ad::Var logits = ad::add(ad::matmul(h, tape.param(params.get(ClassifierParams::kW2))),
                             tape.param(params.get(ClassifierParams::kB2)));
    if (!logits.value().allFinite()) throw NumericError("classify: non-finite logits");
    return ad::softmax_rows(logits);
}

RowVector classify(const FeatureVector& e, const ParameterSet& params) {
    ad::Tape tape;
    ParameterSet frozen = params;
    return classify(tape, tape.constant(e.values()), frozen).value().row(0);
}

double l_vc(const std::vector<RowVector>& predictions, const std::vector<int>& labels, std::size_t* clamped) {
    if (predictions.empty() || predictions.size() != labels.size()) {
        throw ContractError("l_vc: predictions and labels must be non-empty and of equal length");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const int y = labels[i];
        if (y < 0 || y >= predictions[i].size()) throw ContractError("l_vc: label out of range");
        double p = predictions[i][y];
        if (p <= 1e-12) {
            p = 1e-12;
            if (clamped != nullptr) ++*clamped;
        }
        total -= std::log(p);
    }
    return total / static_cast<double>(predictions.size());
}

ForwardVars detector_forward(ad::Tape& tape, const DetectorInput& input, ParameterSet& params,
                             const DetectorConfig& config) {
    const ad::Var h_t = project_shared(tape, tape.constant(input.z_t), Modality::Text, params);
    const ad::Var h_v = project_shared(tape, tape.constant(input.z_v), Modality::Image, params);
    ForwardVars out;
    ad::Var fused;
    if (config.variant == DetectorVariant::NoGraph) {
        if (input.generated.rows() == 0) throw PipelineError("no_graph variant needs generated features");
        const ad::Var pooled = tape.constant(input.generated.colwise().mean());
        fused = ad::matmul(ad::hstack({h_t, h_v, pooled}), tape.param(params.get(kConcatWeight)));
    } else {
        std::vector<ad::Var> rows{h_v};
        Matrix adjacency = Matrix::Ones(1, 1);
        if (config.variant == DetectorVariant::Full) {
            if (input.generated.rows() == 0) throw PipelineError("full variant needs generated features");
            if (input.generated.cols() != config.d) throw ContractError("generated feature dimension mismatch");
            rows.push_back(tape.constant(input.generated));
            adjacency = input.adjacency;
        }
        const ad::Var nodes = ad::vstack(rows);
        const ad::Var e_v = gcn_forward(tape, adjacency, nodes, params);
        AttentionVars att = cross_attention_fuse(tape, e_v, h_v, h_t, params);
        fused = att.fused;
        out.attention = att;
    }
    // The fused image representation is added onto the text feature.
    const ad::Var e = ad::add(h_t, fused);
    out.probs = classify(tape, e, params);
    return out;
}

RowVector detector_predict(const DetectorInput& input, const ParameterSet& params, const DetectorConfig& config) {
    ad::Tape tape;
    ParameterSet frozen = params;
    return detector_forward(tape, input, frozen, config).probs.value().row(0);
}

Matrix FeaturePipeline::graph_structure(const Tokens& text, SegmentSet* segments_out) const {
    SegmentSet seg = segment(text, segmentation);
    std::optional<DependencyEdges> dep;
    if (parser != nullptr) dep = parser->parse(text);
    const FusionGraph g = assemble_structure(seg.k(), dep, &seg);
    if (segments_out != nullptr) *segments_out = std::move(seg);
    return normalized_adjacency(g.adjacency);
}

EncodedSample FeaturePipeline::encode(const Sample& sample) const {
    if (encoder == nullptr) throw ContractError("feature pipeline has no encoder");
    EncodedSample enc;
    enc.id = sample.id;
    enc.label = sample.label;
    enc.z_t = encoder->encode_text(sample.text);
    enc.z_v = encoder->encode_image(sample.image ? *sample.image : *white_image());
    enc.adjacency = graph_structure(sample.text, &enc.segments);
    return enc;
}

DetectorInput make_input(const EncodedSample& enc, const FeatureCache* cache, const DetectorConfig& config) {
    DetectorInput in;
    in.z_t = enc.z_t;
    in.z_v = enc.z_v;
    in.label = enc.label;
    in.adjacency = enc.adjacency;
    if (config.variant == DetectorVariant::NoAugmentation) return in;
    if (cache == nullptr) throw PipelineError("no feature cache; run a generation pass first");
    const auto entry = cache->get(enc.id);
    if (!entry) {
        throw PipelineError("no generated features cached for sample '" + enc.id + "'; run a generation pass first");
    }
    in.generated.resize(static_cast<Eigen::Index>(entry->features.size()), config.d);
    for (std::size_t j = 0; j < entry->features.size(); ++j) {
        in.generated.row(static_cast<Eigen::Index>(j)) = entry->features[j].values();
    }
    if (in.adjacency.rows() != in.generated.rows() + 1) {
        throw PipelineError("cached feature count does not match the graph for sample '" + enc.id + "'");
    }
    return in;
}

namespace {

struct BatchLoss {
    ad::Var l_vc;
    ad::Var r_ca;
    ad::Var l_det;
    std::size_t correct = 0;
};

BatchLoss batch_loss(ad::Tape& tape, const std::vector<DetectorInput>& batch, ParameterSet& params,
                     const DetectorConfig& config, double beta) {
    if (batch.empty()) throw ContractError("empty detector batch");
    std::vector<ad::Var> nll_terms, reg_terms;
    BatchLoss out;
    for (const auto& in : batch) {
        const ForwardVars f = detector_forward(tape, in, params, config);
        nll_terms.push_back(ad::nll(f.probs, in.label));
        const RowVector& p = f.probs.value().row(0);
        if ((p[1] > p[0] ? 1 : 0) == in.label) ++out.correct;
        if (config.r_ca == AttentionRegularizer::AttentionEntropy && f.attention) {
            reg_terms.push_back(ad::entropy(f.attention->stage2_weights));
        }
    }
    out.l_vc = ad::mean(ad::vstack(nll_terms));
    out.r_ca = reg_terms.empty() ? tape.constant(Matrix::Zero(1, 1)) : ad::mean(ad::vstack(reg_terms));
    out.l_det = ad::add(out.l_vc, ad::scale(out.r_ca, beta));
    return out;
}

}  // namespace

DetectorLossReport detector_loss(const std::vector<DetectorInput>& batch, const ParameterSet& params,
                                 const DetectorConfig& config, double beta) {
    ad::Tape tape;
    ParameterSet frozen = params;
    const BatchLoss b = batch_loss(tape, batch, frozen, config, beta);
    return {b.l_vc.scalar(), b.r_ca.scalar(), b.l_det.scalar(),
            static_cast<double>(b.correct) / static_cast<double>(batch.size())};
}

DetectorLossReport detector_step(const std::vector<DetectorInput>& batch, ParameterSet& params,
                                 const DetectorConfig& config, double beta, Adam& optimizer) {
    const ParameterSet backup = params;
    params.zero_grad();
    ad::Tape tape;
    const BatchLoss b = batch_loss(tape, batch, params, config, beta);
    DetectorLossReport report{b.l_vc.scalar(), b.r_ca.scalar(), b.l_det.scalar(),
                              static_cast<double>(b.correct) / static_cast<double>(batch.size())};
    if (!std::isfinite(report.l_det)) throw NumericError("detector loss is not finite; step skipped");
    tape.backward(b.l_det);
    optimizer.step(params);
    if (!params.all_finite()) {
        params = backup;
        throw NumericError("detector update produced non-finite parameters; step reverted");
    }
    return report;
}

}  // namespace retsimd
