// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "retsimd/autodiff.hpp"
#include "retsimd/data.hpp"
#include "retsimd/segmentation.hpp"

namespace retsimd {

/// Undirected edge stored as (min, max). Node 0 is the original image,
/// nodes 1..K the generated images in segment order.
using Edge = std::pair<std::size_t, std::size_t>;
using EdgeSet = std::set<Edge>;

inline Edge make_edge(std::size_t a, std::size_t b) { return a < b ? Edge{a, b} : Edge{b, a}; }

enum Relationship : std::uint8_t {
    kCentral = 1U << 0,
    kTemporal = 1U << 1,
    kDependency = 1U << 2,
};

/// Token-level directed (head, dependent) edges over a source text.
struct DependencyEdges {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::size_t token_count = 0;

    /// Throws ContractError on out-of-range indices or self-edges.
    void validate() const;
};

struct FusionGraph {
    /// (K+1) x (K+1) symmetric 0/1 matrix, zero diagonal.
    Matrix adjacency;
    /// (K+1) x d, rows [h_v; h_g_1; ...; h_g_K].
    Matrix node_features;
    /// Relationship bitmask per edge.
    std::map<Edge, std::uint8_t> provenance;

    std::size_t k() const { return static_cast<std::size_t>(adjacency.rows()) - 1; }
    EdgeSet edges() const;
};

EdgeSet build_central(std::size_t k);
EdgeSet build_temporal(std::size_t k);
/// Merges token edges into segment edges on nodes 1..K; intra-segment edges vanish.
EdgeSet build_dependency(const DependencyEdges& dep, const SegmentSet& segments);

/// Adjacency with the union of central, temporal and (when given) dependency edges.
FusionGraph assemble_graph(const FeatureVector& h_v, const std::vector<FeatureVector>& h_g,
                           const std::optional<DependencyEdges>& dep, const SegmentSet& segments);

/// Edge structure only; node features are supplied later.
FusionGraph assemble_structure(std::size_t k, const std::optional<DependencyEdges>& dep, const SegmentSet* segments);

/// D^-1/2 (A + I) D^-1/2.
Matrix normalized_adjacency(const Matrix& adjacency);

/// Two graph-convolution layers: ReLU after the first, identity after the second.
struct GcnParams {
    static constexpr const char* kW1 = "gcn.w1";
    static constexpr const char* kB1 = "gcn.b1";
    static constexpr const char* kW2 = "gcn.w2";
    static constexpr const char* kB2 = "gcn.b2";
    static void register_into(ParameterSet& params, Eigen::Index d, std::uint64_t seed);
};

/// Returns the (K+1) x d final node features.
Matrix gcn_forward(const FusionGraph& graph, const ParameterSet& params);
ad::Var gcn_forward(ad::Tape& tape, const Matrix& normalized_adj, ad::Var node_features, ParameterSet& params);

/// W^Q, W^K, W^V shared by both attention stages.
struct AttentionParams {
    static constexpr const char* kWq = "attn.wq";
    static constexpr const char* kWk = "attn.wk";
    static constexpr const char* kWv = "attn.wv";
    static void register_into(ParameterSet& params, Eigen::Index d, std::uint64_t seed);
};

struct AttentionResult {
    FeatureVector fused;
    /// (K+1) attention weights of each stage; each sums to 1.
    RowVector stage1_weights;
    RowVector stage2_weights;
};

struct AttentionVars {
    ad::Var fused;
    ad::Var stage1_weights;
    ad::Var stage2_weights;
};

/// Two stacked single-key cross-attention stages (image key, then text key)
/// with softmax over the query rows, followed by a mean over rows.
AttentionResult cross_attention_fuse(const Matrix& e_v, const FeatureVector& h_v, const FeatureVector& h_t,
                                     const ParameterSet& params);
AttentionVars cross_attention_fuse(ad::Tape& tape, ad::Var e_v, ad::Var h_v, ad::Var h_t, ParameterSet& params);

/// Token dependency parser adapter.
class DependencyParser {
public:
    virtual ~DependencyParser() = default;
    virtual DependencyEdges parse(const Tokens& tokens) const = 0;
};

/// Parser-free fallback: links each token to its successor inside a clause;
/// clauses end at punctuation tokens.
class AdjacentTokenParser final : public DependencyParser {
public:
    DependencyEdges parse(const Tokens& tokens) const override;
};

/// Runs an external command; writes {"tokens": [...]} to its stdin and reads
/// {"edges": [[head, dependent], ...]} from its stdout.
class SubprocessParser final : public DependencyParser {
public:
    explicit SubprocessParser(std::string command) : command_(std::move(command)) {}
    DependencyEdges parse(const Tokens& tokens) const override;

private:
    std::string command_;
};

}  // namespace retsimd
