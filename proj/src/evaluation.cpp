// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#include "retsimd/evaluation.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "retsimd/error.hpp"
#include "retsimd/util.hpp"

namespace retsimd {

using nlohmann::json;

std::string_view to_string(VariantKind k) {
    switch (k) {
        case VariantKind::Full: return "full";
        case VariantKind::TextOnly: return "text_only";
        case VariantKind::ImageOnly: return "image_only";
        case VariantKind::TextReplaced: return "text_replaced";
        case VariantKind::ImageReplaced: return "image_replaced";
    }
    return "?";
}

VariantKind parse_variant_kind(std::string_view s) {
    for (VariantKind k : kAllVariants) {
        if (to_string(k) == s) return k;
    }
    throw ConfigError("unknown variant kind '" + std::string(s) + "'");
}

std::size_t draw_donor(std::size_t n, std::size_t self_index, std::uint64_t seed) {
    if (n < 2) throw ContractError("replacement needs a donor pool with at least two samples");
    SplitMix64 rng(seed);
    const std::size_t r = static_cast<std::size_t>(rng.next() % (n - 1));
    return r >= self_index ? r + 1 : r;
}

std::vector<std::size_t> donor_permutation(std::size_t n, std::uint64_t seed) {
    if (n < 2) throw ContractError("replacement needs a donor pool with at least two samples");
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> perm(n);
    // Rejection sampling: shuffle until there is no fixed point (expected ~e tries).
    for (;;) {
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng() % i]);
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) ok = perm[i] != i;
        if (ok) return perm;
    }
}

VariantInput make_variant_with_donor(const Sample& sample, VariantKind kind, const Sample* donor, std::uint64_t seed) {
    VariantInput out;
    out.sample = sample;
    out.image_source = &sample;
    out.kind = kind;
    out.seed = seed;
    switch (kind) {
        case VariantKind::Full: break;
        case VariantKind::TextOnly:
            out.sample.image = white_image();
            out.whiten_generated = true;
            break;
        case VariantKind::ImageOnly: out.sample.text = pad_tokens(sample.text.size()); break;
        case VariantKind::TextReplaced:
            if (donor == nullptr || donor->id == sample.id) throw ContractError("text replacement needs a different donor");
            out.sample.text = donor->text;
            break;
        case VariantKind::ImageReplaced:
            if (donor == nullptr || donor->id == sample.id) throw ContractError("image replacement needs a different donor");
            out.sample.image = donor->image;
            out.sample.image_absent = donor->image_absent;
            out.image_source = donor;
            break;
    }
    return out;
}

VariantInput make_variant_input(const Sample& sample, VariantKind kind, const Dataset& donor_pool, std::uint64_t seed) {
    if (!is_replacement(kind)) return make_variant_with_donor(sample, kind, nullptr, seed);
    if (donor_pool.samples.size() < 2) throw ContractError("replacement needs a donor pool with at least two samples");
    std::size_t self = donor_pool.samples.size();
    for (std::size_t i = 0; i < donor_pool.samples.size(); ++i) {
        if (donor_pool.samples[i].id == sample.id) self = i;
    }
    std::size_t donor;
    if (self < donor_pool.samples.size()) {
        donor = draw_donor(donor_pool.samples.size(), self, seed ^ fnv1a64(sample.id));
    } else {
        SplitMix64 rng(seed ^ fnv1a64(sample.id));
        donor = static_cast<std::size_t>(rng.next() % donor_pool.samples.size());
    }
    return make_variant_with_donor(sample, kind, &donor_pool.samples[donor], seed);
}

Sample make_variant(const Sample& sample, VariantKind kind, const Dataset& donor_pool, std::uint64_t seed) {
    return make_variant_input(sample, kind, donor_pool, seed).sample;
}

DetectorPredictor::DetectorPredictor(const FeaturePipeline& pipeline, const FeatureCache* cache,
                                     const ParameterSet& params, DetectorConfig config)
    : pipeline_(pipeline),
      cache_(cache),
      params_(params),
      config_(config),
      white_generated_(project_shared(pipeline.encoder->encode_image(*white_image()), Modality::Image, params)) {}

RowVector DetectorPredictor::predict(const VariantInput& input) const {
    const Sample& src = input.image_source != nullptr ? *input.image_source : input.sample;
    EncodedSample enc;
    enc.id = src.id;
    enc.label = input.sample.label;
    enc.z_t = pipeline_.encoder->encode_text(input.sample.text);
    enc.z_v = pipeline_.encoder->encode_image(input.sample.image ? *input.sample.image : *white_image());
    enc.adjacency = pipeline_.graph_structure(src.text, &enc.segments);
    DetectorInput in = make_input(enc, cache_, config_);
    if (input.whiten_generated) {
        for (Eigen::Index r = 0; r < in.generated.rows(); ++r) in.generated.row(r) = white_generated_.values();
    }
    return detector_predict(in, params_, config_);
}

int predicted_label(const RowVector& p) { return p[1] > p[0] ? 1 : 0; }

ClassificationMetrics classification_metrics(const std::vector<int>& predictions, const std::vector<int>& labels) {
    if (predictions.size() != labels.size()) throw ContractError("metrics: prediction and label counts differ");
    ClassificationMetrics m;
    if (labels.empty()) return m;
    std::array<std::array<double, 2>, 2> confusion{};  // [true][pred]
    for (std::size_t i = 0; i < labels.size(); ++i) confusion[labels[i]][predictions[i]] += 1.0;
    m.accuracy = (confusion[0][0] + confusion[1][1]) / static_cast<double>(labels.size());
    for (int c = 0; c < 2; ++c) {
        const double tp = confusion[c][c];
        const double predicted = confusion[0][c] + confusion[1][c];
        const double actual = confusion[c][0] + confusion[c][1];
        m.precision[c] = predicted > 0 ? tp / predicted : 0.0;
        m.recall[c] = actual > 0 ? tp / actual : 0.0;
        const double denom = m.precision[c] + m.recall[c];
        m.f1[c] = denom > 0 ? 2.0 * m.precision[c] * m.recall[c] / denom : 0.0;
    }
    m.macro_f1 = 0.5 * (m.f1[0] + m.f1[1]);
    return m;
}

const VariantReport& ContributionReport::variant(VariantKind k) const {
    for (const auto& v : variants) {
        if (v.kind == k) return v;
    }
    throw ContractError("report has no variant '" + std::string(to_string(k)) + "'");
}

namespace {

struct VariantPass {
    std::vector<int> predictions;
    std::vector<double> entropies;
};

VariantPass run_pass(const Predictor& predictor, const Dataset& dataset, VariantKind kind, std::uint64_t seed) {
    VariantPass pass;
    std::vector<std::size_t> donors;
    if (is_replacement(kind)) donors = donor_permutation(dataset.samples.size(), seed);
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        const Sample& s = dataset.samples[i];
        const Sample* donor = donors.empty() ? nullptr : &dataset.samples[donors[i]];
        RowVector p;
        try {
            p = predictor.predict(make_variant_with_donor(s, kind, donor, seed));
        } catch (const Error& e) {
            throw PipelineError("prediction failed for sample '" + s.id + "': " + e.what());
        }
        pass.predictions.push_back(predicted_label(p));
        pass.entropies.push_back(predictive_entropy(p));
    }
    return pass;
}

ClassificationMetrics average(const std::vector<ClassificationMetrics>& ms) {
    ClassificationMetrics out;
    const double n = static_cast<double>(ms.size());
    for (const auto& m : ms) {
        out.accuracy += m.accuracy / n;
        out.macro_f1 += m.macro_f1 / n;
        for (int c = 0; c < 2; ++c) {
            out.precision[c] += m.precision[c] / n;
            out.recall[c] += m.recall[c] / n;
            out.f1[c] += m.f1[c] / n;
        }
    }
    return out;
}

}  // namespace

ContributionReport evaluate_contributions(const Predictor& predictor, const Dataset& dataset,
                                          const std::vector<std::uint64_t>& seeds) {
    if (dataset.samples.empty()) throw ContractError("evaluate_contributions: empty dataset");
    if (seeds.empty()) throw ContractError("evaluate_contributions: at least one seed is required");
    std::vector<int> labels;
    for (const auto& s : dataset.samples) labels.push_back(s.label);
    const std::size_t n = labels.size();

    ContributionReport report;
    report.sample_count = n;
    report.seeds = seeds;

    const VariantPass full = run_pass(predictor, dataset, VariantKind::Full, seeds.front());

    for (VariantKind kind : kAllVariants) {
        std::vector<ClassificationMetrics> metrics;
        double mean_entropy = 0.0;
        double gain = 0.0;
        const std::vector<std::uint64_t> kind_seeds =
            is_replacement(kind) ? seeds : std::vector<std::uint64_t>{seeds.front()};
        for (std::uint64_t seed : kind_seeds) {
            const VariantPass pass = kind == VariantKind::Full ? full : run_pass(predictor, dataset, kind, seed);
            metrics.push_back(classification_metrics(pass.predictions, labels));
            double h = 0.0, g = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                h += pass.entropies[i];
                g += info_gain(pass.entropies[i], full.entropies[i]);
            }
            mean_entropy += h / static_cast<double>(n) / static_cast<double>(kind_seeds.size());
            gain += g / static_cast<double>(n) / static_cast<double>(kind_seeds.size());
        }
        report.variants.push_back({kind, average(metrics), mean_entropy});
        switch (kind) {
            case VariantKind::Full: break;
            case VariantKind::TextOnly: report.gain_image = gain; break;
            case VariantKind::ImageOnly: report.gain_text = gain; break;
            case VariantKind::TextReplaced: report.gain_text_replaced = gain; break;
            case VariantKind::ImageReplaced: report.gain_image_replaced = gain; break;
        }
    }
    return report;
}

double sim_metric(const SegmentSet& segments, const std::vector<FeatureVector>& generated,
                  const std::vector<FeatureVector>& text_features, std::size_t* zero_norm_warnings) {
    if (generated.size() != text_features.size() || generated.size() != segments.k()) {
        throw ContractError("sim_metric: segments, generated and text features must have equal lengths");
    }
    if (generated.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t j = 0; j < generated.size(); ++j) {
        const RowVector& a = generated[j].values();
        const RowVector& b = text_features[j].values();
        if (a.size() != b.size()) throw ContractError("sim_metric: feature dimensions differ");
        const double na = a.norm(), nb = b.norm();
        if (na == 0.0 || nb == 0.0) {
            if (zero_norm_warnings != nullptr) ++*zero_norm_warnings;
            continue;
        }
        total += a.dot(b) / (na * nb);
    }
    return total / static_cast<double>(generated.size());
}

json to_json(const ClassificationMetrics& m) {
    return json{{"accuracy", m.accuracy},
                {"macro_f1", m.macro_f1},
                {"micro_f1", m.accuracy},
                {"precision", m.precision},
                {"recall", m.recall},
                {"f1", m.f1}};
}

json to_json(const ContributionReport& r) {
    json variants = json::object();
    for (const auto& v : r.variants) {
        json j = to_json(v.metrics);
        j["mean_entropy"] = v.mean_entropy;
        variants[std::string(to_string(v.kind))] = j;
    }
    return json{{"variants", variants},
                {"gains_nats",
                 {{"G(y,x^v)", r.gain_image},
                  {"G(y,x^t)", r.gain_text},
                  {"G(y,x^v_replaced)", r.gain_image_replaced},
                  {"G(y,x^t_replaced)", r.gain_text_replaced}}},
                {"sample_count", r.sample_count},
                {"seeds", r.seeds}};
}

std::string to_csv(const ContributionReport& r) {
    std::ostringstream os;
    os << std::setprecision(10);
    os << "variant,accuracy,macro_f1,precision_0,recall_0,f1_0,precision_1,recall_1,f1_1,mean_entropy\n";
    for (const auto& v : r.variants) {
        const auto& m = v.metrics;
        os << to_string(v.kind) << ',' << m.accuracy << ',' << m.macro_f1 << ',' << m.precision[0] << ','
           << m.recall[0] << ',' << m.f1[0] << ',' << m.precision[1] << ',' << m.recall[1] << ',' << m.f1[1] << ','
           << v.mean_entropy << '\n';
    }
    return os.str();
}

void write_report(const std::filesystem::path& dir, const ContributionReport& r) {
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "contributions.json") << to_json(r).dump(2) << '\n';
    std::ofstream(dir / "contributions.csv") << to_csv(r);
    std::ofstream gaps(dir / "gaps.csv");
    gaps << std::setprecision(10) << "variant,accuracy_gap,gain_nats\n";
    const double full = r.variant(VariantKind::Full).metrics.accuracy;
    const std::array<std::pair<VariantKind, double>, 4> rows = {{{VariantKind::TextOnly, r.gain_image},
                                                                 {VariantKind::ImageOnly, r.gain_text},
                                                                 {VariantKind::ImageReplaced, r.gain_image_replaced},
                                                                 {VariantKind::TextReplaced, r.gain_text_replaced}}};
    for (const auto& [kind, gain] : rows) {
        gaps << to_string(kind) << ',' << full - r.variant(kind).metrics.accuracy << ',' << gain << '\n';
    }
}

}  // namespace retsimd
