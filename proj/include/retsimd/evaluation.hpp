// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "retsimd/data.hpp"
#include "retsimd/detector.hpp"
#include "retsimd/information.hpp"
#include "retsimd/segmentation.hpp"

namespace retsimd {

enum class VariantKind { Full, TextOnly, ImageOnly, TextReplaced, ImageReplaced };

inline constexpr std::array<VariantKind, 5> kAllVariants = {VariantKind::Full, VariantKind::TextOnly,
                                                            VariantKind::ImageOnly, VariantKind::TextReplaced,
                                                            VariantKind::ImageReplaced};

std::string_view to_string(VariantKind k);
VariantKind parse_variant_kind(std::string_view s);
inline bool is_replacement(VariantKind k) {
    return k == VariantKind::TextReplaced || k == VariantKind::ImageReplaced;
}

/// An ablated post plus where its image-side inputs come from. The image side
/// covers the original image and the generated images of its text, so
/// ImageReplaced takes both from the donor, and TextOnly whitens both.
struct VariantInput {
    Sample sample;
    const Sample* image_source = nullptr;
    bool whiten_generated = false;
    VariantKind kind = VariantKind::Full;
    std::uint64_t seed = 0;
};

/// Uniform draw of a donor index != self_index from a pool of size n.
std::size_t draw_donor(std::size_t n, std::size_t self_index, std::uint64_t seed);

/// Uniform random derangement of 0..n-1 (no fixed points); n >= 2.
std::vector<std::size_t> donor_permutation(std::size_t n, std::uint64_t seed);

/// Builds a variant with an explicit donor (used for replacement kinds only).
VariantInput make_variant_with_donor(const Sample& sample, VariantKind kind, const Sample* donor, std::uint64_t seed);

/// Builds a variant; replacement kinds draw a different donor from `donor_pool`.
/// `sample` must outlive the result when it is used as the image source.
VariantInput make_variant_input(const Sample& sample, VariantKind kind, const Dataset& donor_pool, std::uint64_t seed);
Sample make_variant(const Sample& sample, VariantKind kind, const Dataset& donor_pool, std::uint64_t seed);

class Predictor {
public:
    virtual ~Predictor() = default;
    /// Class distribution for one (possibly ablated) input.
    virtual RowVector predict(const VariantInput& input) const = 0;
};

/// Runs a trained detector on variant inputs, reading generated features from the cache.
class DetectorPredictor final : public Predictor {
public:
    DetectorPredictor(const FeaturePipeline& pipeline, const FeatureCache* cache, const ParameterSet& params,
                      DetectorConfig config);
    RowVector predict(const VariantInput& input) const override;

private:
    const FeaturePipeline& pipeline_;
    const FeatureCache* cache_;
    const ParameterSet& params_;
    DetectorConfig config_;
    FeatureVector white_generated_;
};

/// Argmax with ties going to class 0.
int predicted_label(const RowVector& p);

struct ClassificationMetrics {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    std::array<double, 2> precision{};
    std::array<double, 2> recall{};
    std::array<double, 2> f1{};
    bool operator==(const ClassificationMetrics&) const = default;
};

ClassificationMetrics classification_metrics(const std::vector<int>& predictions, const std::vector<int>& labels);

struct VariantReport {
    VariantKind kind = VariantKind::Full;
    ClassificationMetrics metrics;
    double mean_entropy = 0.0;
    bool operator==(const VariantReport&) const = default;
};

struct ContributionReport {
    std::vector<VariantReport> variants;  // in kAllVariants order
    /// H(TextOnly) - H(Full): information carried by the image side.
    double gain_image = 0.0;
    /// H(ImageOnly) - H(Full): information carried by the text.
    double gain_text = 0.0;
    /// H(ImageReplaced) - H(Full).
    double gain_image_replaced = 0.0;
    /// H(TextReplaced) - H(Full).
    double gain_text_replaced = 0.0;
    std::size_t sample_count = 0;
    std::vector<std::uint64_t> seeds;

    const VariantReport& variant(VariantKind k) const;
    bool operator==(const ContributionReport&) const = default;
};

/// Predicts every variant of every sample; gains are matched per sample and
/// averaged, replacement variants are averaged over the seeds.
ContributionReport evaluate_contributions(const Predictor& predictor, const Dataset& dataset,
                                          const std::vector<std::uint64_t>& seeds);

/// Mean cosine similarity of generated features and their segment text features.
/// Zero-norm pairs contribute 0 and are counted in `zero_norm_warnings`.
double sim_metric(const SegmentSet& segments, const std::vector<FeatureVector>& generated,
                  const std::vector<FeatureVector>& text_features, std::size_t* zero_norm_warnings = nullptr);

nlohmann::json to_json(const ClassificationMetrics& m);
nlohmann::json to_json(const ContributionReport& r);
/// One row per variant: variant, accuracy, macro_f1, p0, r0, f1_0, p1, r1, f1_1, mean_entropy.
std::string to_csv(const ContributionReport& r);
/// Writes contributions.json, contributions.csv and gaps.csv (Full minus each variant).
void write_report(const std::filesystem::path& dir, const ContributionReport& r);

}  // namespace retsimd
