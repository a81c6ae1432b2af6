// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#include "retsimd/graph_fusion.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

#include "json.hpp"
#include "retsimd/error.hpp"
#include "retsimd/util.hpp"

namespace retsimd {

void DependencyEdges::validate() const {
    for (const auto& [h, d] : edges) {
        if (h >= token_count || d >= token_count) {
            throw ContractError("dependency edge (" + std::to_string(h) + ", " + std::to_string(d) +
                                ") outside token range " + std::to_string(token_count));
        }
        if (h == d) throw ContractError("dependency self-edge at token " + std::to_string(h));
    }
}

EdgeSet FusionGraph::edges() const {
    EdgeSet out;
    for (const auto& [e, _] : provenance) out.insert(e);
    return out;
}

EdgeSet build_central(std::size_t k) {
    EdgeSet out;
    for (std::size_t j = 1; j <= k; ++j) out.insert({0, j});
    return out;
}

EdgeSet build_temporal(std::size_t k) {
    EdgeSet out;
    for (std::size_t j = 1; j < k; ++j) out.insert({j, j + 1});
    return out;
}

EdgeSet build_dependency(const DependencyEdges& dep, const SegmentSet& segments) {
    if (dep.token_count != segments.source_token_count) {
        throw ContractError("dependency parse covers " + std::to_string(dep.token_count) + " tokens, segments cover " +
                            std::to_string(segments.source_token_count));
    }
    dep.validate();
    EdgeSet out;
    for (const auto& [h, d] : dep.edges) {
        const std::size_t a = segments.segment_of(h) + 1;
        const std::size_t b = segments.segment_of(d) + 1;
        if (a != b) out.insert(make_edge(a, b));
    }
    return out;
}

FusionGraph assemble_structure(std::size_t k, const std::optional<DependencyEdges>& dep, const SegmentSet* segments) {
    FusionGraph g;
    const auto n = static_cast<Eigen::Index>(k + 1);
    g.adjacency = Matrix::Zero(n, n);
    auto mark = [&](const EdgeSet& edges, Relationship r) {
        for (const auto& e : edges) {
            g.provenance[e] |= r;
            g.adjacency(static_cast<Eigen::Index>(e.first), static_cast<Eigen::Index>(e.second)) = 1.0;
            g.adjacency(static_cast<Eigen::Index>(e.second), static_cast<Eigen::Index>(e.first)) = 1.0;
        }
    };
    mark(build_central(k), kCentral);
    mark(build_temporal(k), kTemporal);
    if (dep) {
        if (segments == nullptr) throw ContractError("dependency edges need the segment set");
        mark(build_dependency(*dep, *segments), kDependency);
    }
    return g;
}

FusionGraph assemble_graph(const FeatureVector& h_v, const std::vector<FeatureVector>& h_g,
                           const std::optional<DependencyEdges>& dep, const SegmentSet& segments) {
    if (h_g.size() != segments.k()) {
        throw ContractError("assemble_graph: " + std::to_string(h_g.size()) + " generated features for " +
                            std::to_string(segments.k()) + " segments");
    }
    FusionGraph g = assemble_structure(segments.k(), dep, &segments);
    const Eigen::Index d = h_v.dim();
    g.node_features.resize(static_cast<Eigen::Index>(h_g.size() + 1), d);
    g.node_features.row(0) = h_v.values();
    for (std::size_t j = 0; j < h_g.size(); ++j) {
        if (h_g[j].dim() != d) throw ContractError("assemble_graph: feature dimension mismatch");
        g.node_features.row(static_cast<Eigen::Index>(j + 1)) = h_g[j].values();
    }
    return g;
}

Matrix normalized_adjacency(const Matrix& adjacency) {
    if (adjacency.rows() != adjacency.cols()) throw ContractError("adjacency must be square");
    Matrix a = adjacency + Matrix::Identity(adjacency.rows(), adjacency.cols());
    const Vector deg = a.rowwise().sum();
    const Vector inv_sqrt = deg.array().rsqrt();
    return inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal();
}

namespace {

Matrix glorot(Eigen::Index rows, Eigen::Index cols, SplitMix64& rng) {
    Matrix m(rows, cols);
    const double s = std::sqrt(2.0 / static_cast<double>(rows + cols));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal() * s;
    return m;
}

}  // namespace

void GcnParams::register_into(ParameterSet& params, Eigen::Index d, std::uint64_t seed) {
    SplitMix64 rng(seed ^ 0x8EBC6AF09C88C6E3ULL);
    // Near-identity init keeps node features informative from the first step.
    params.add(kW1, Matrix::Identity(d, d) + 0.5 * glorot(d, d, rng));
    params.add(kB1, Matrix::Zero(1, d));
    params.add(kW2, Matrix::Identity(d, d) + 0.5 * glorot(d, d, rng));
    params.add(kB2, Matrix::Zero(1, d));
}

ad::Var gcn_forward(ad::Tape& tape, const Matrix& normalized_adj, ad::Var node_features, ParameterSet& params) {
    if (normalized_adj.rows() != node_features.rows() || normalized_adj.cols() != node_features.rows()) {
        throw ContractError("gcn_forward: adjacency/feature mismatch");
    }
    const ad::Var a = tape.constant(normalized_adj);
    ad::Var h = ad::matmul(a, ad::matmul(node_features, tape.param(params.get(GcnParams::kW1))));
    h = ad::relu(ad::add_row(h, tape.param(params.get(GcnParams::kB1))));
    h = ad::matmul(a, ad::matmul(h, tape.param(params.get(GcnParams::kW2))));
    h = ad::add_row(h, tape.param(params.get(GcnParams::kB2)));
    if (!h.value().allFinite()) throw NumericError("gcn_forward produced non-finite output");
    return h;
}

Matrix gcn_forward(const FusionGraph& graph, const ParameterSet& params) {
    if (graph.node_features.rows() != graph.adjacency.rows()) {
        throw ContractError("gcn_forward: graph has no node features");
    }
    ad::Tape tape;
    ParameterSet frozen = params;
    return gcn_forward(tape, normalized_adjacency(graph.adjacency), tape.constant(graph.node_features), frozen).value();
}

void AttentionParams::register_into(ParameterSet& params, Eigen::Index d, std::uint64_t seed) {
    SplitMix64 rng(seed ^ 0x589965CC75374CC3ULL);
    params.add(kWq, glorot(d, d, rng));
    params.add(kWk, glorot(d, d, rng));
    params.add(kWv, Matrix::Identity(d, d) + 0.5 * glorot(d, d, rng));
}

namespace {

// One stage: weights = softmax over rows of (X Wq)(k Wk)^T / sqrt(d); out = diag(weights) X Wv.
std::pair<ad::Var, ad::Var> attention_stage(ad::Tape& tape, ad::Var x, ad::Var key, ParameterSet& params) {
    const ad::Var wq = tape.param(params.get(AttentionParams::kWq));
    const ad::Var wk = tape.param(params.get(AttentionParams::kWk));
    const ad::Var wv = tape.param(params.get(AttentionParams::kWv));
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(x.cols()));
    const ad::Var logits = ad::scale(ad::matmul(ad::matmul(x, wq), ad::transpose(ad::matmul(key, wk))), inv_sqrt_d);
    const ad::Var weights = ad::softmax_cols(logits);
    return {ad::scale_rows(weights, ad::matmul(x, wv)), weights};
}

}  // namespace

AttentionVars cross_attention_fuse(ad::Tape& tape, ad::Var e_v, ad::Var h_v, ad::Var h_t, ParameterSet& params) {
    const Eigen::Index d = e_v.cols();
    if (h_v.rows() != 1 || h_t.rows() != 1 || h_v.cols() != d || h_t.cols() != d) {
        throw ContractError("cross_attention_fuse: dimension mismatch");
    }
    auto [o, w1] = attention_stage(tape, e_v, h_v, params);
    auto [e, w2] = attention_stage(tape, o, h_t, params);
    ad::Var fused = ad::mean_rows(e);
    if (!fused.value().allFinite()) throw NumericError("cross_attention_fuse produced non-finite output");
    return {fused, ad::transpose(w1), ad::transpose(w2)};
}

AttentionResult cross_attention_fuse(const Matrix& e_v, const FeatureVector& h_v, const FeatureVector& h_t,
                                     const ParameterSet& params) {
    ad::Tape tape;
    ParameterSet frozen = params;
    const AttentionVars v = cross_attention_fuse(tape, tape.constant(e_v), tape.constant(h_v.values()),
                                                 tape.constant(h_t.values()), frozen);
    return {FeatureVector(RowVector(v.fused.value().row(0))), RowVector(v.stage1_weights.value().row(0)),
            RowVector(v.stage2_weights.value().row(0))};
}

DependencyEdges AdjacentTokenParser::parse(const Tokens& tokens) const {
    DependencyEdges dep;
    dep.token_count = tokens.size();
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        if (is_punctuation(tokens[i]) || is_punctuation(tokens[i + 1])) continue;
        dep.edges.emplace_back(i, i + 1);
    }
    return dep;
}

DependencyEdges SubprocessParser::parse(const Tokens& tokens) const {
    namespace fs = std::filesystem;
    const fs::path input = fs::temp_directory_path() /
                           ("retsimd_parse_" + std::to_string(fnv1a64(command_) ^ reinterpret_cast<std::uintptr_t>(&tokens)) +
                            ".json");
    {
        std::ofstream out(input);
        out << nlohmann::json{{"tokens", tokens}}.dump();
    }
    const std::string cmd = command_ + " < '" + input.string() + "'";
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
    if (!pipe) {
        fs::remove(input);
        throw PipelineError("cannot start dependency parser: " + command_);
    }
    std::string output;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof(buf), pipe.get())) > 0) output.append(buf, n);
    const int status = pclose(pipe.release());
    fs::remove(input);
    if (status != 0) throw PipelineError("dependency parser exited with status " + std::to_string(status));
    const auto j = nlohmann::json::parse(output, nullptr, false);
    if (j.is_discarded() || !j.contains("edges") || !j["edges"].is_array()) {
        throw PipelineError("dependency parser output lacks an edges array");
    }
    DependencyEdges dep;
    dep.token_count = tokens.size();
    for (const auto& e : j["edges"]) {
        if (!e.is_array() || e.size() != 2) throw PipelineError("dependency edge must be a [head, dependent] pair");
        dep.edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
    }
    dep.validate();
    return dep;
}

}  // namespace retsimd
