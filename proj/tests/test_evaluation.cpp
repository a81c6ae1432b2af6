// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <set>

#include "doctest.h"
#include "json.hpp"
#include "retsimd/encoders.hpp"
#include "retsimd/error.hpp"
#include "retsimd/evaluation.hpp"
#include "retsimd/information.hpp"
#include "support.hpp"

using namespace retsimd;
using retsimd::testing::TempDir;

namespace {

Sample make_sample(const std::string& id, std::size_t tokens, int label, std::uint8_t shade) {
    Sample s;
    s.id = id;
    for (std::size_t i = 0; i < tokens; ++i) s.text.push_back(id + "_" + std::to_string(i));
    s.image = std::make_shared<Image>(8, 8, shade);
    s.label = label;
    return s;
}

Dataset pool(std::size_t n) {
    Dataset d;
    for (std::size_t i = 0; i < n; ++i)
        d.samples.push_back(make_sample("p" + std::to_string(i), 3 + i, static_cast<int>(i % 2), static_cast<std::uint8_t>(10 * i)));
    return d;
}

class ConstantPredictor final : public Predictor {
public:
    RowVector predict(const VariantInput&) const override { return RowVector{{0.3, 0.7}}; }
};

// Looks only at the text: confident on real words, uniform on [PAD].
class TextOnlyPredictor final : public Predictor {
public:
    RowVector predict(const VariantInput& in) const override {
        if (in.sample.text.front() == kPadToken) return RowVector{{0.5, 0.5}};
        return in.sample.label == 1 ? RowVector{{0.1, 0.9}} : RowVector{{0.9, 0.1}};
    }
};

}  // namespace

TEST_CASE("make_variant examples") {
    const Dataset d = pool(3);
    const Sample& s = d.samples[0];
    const Sample full = make_variant(s, VariantKind::Full, d, 1);
    CHECK(full.text == s.text);
    CHECK(full.image == s.image);
    CHECK(full.label == s.label);

    const Sample seven = make_sample("x", 7, 1, 50);
    const Sample img_only = make_variant(seven, VariantKind::ImageOnly, d, 1);
    CHECK(img_only.text == Tokens(7, kPadToken));
    CHECK(*img_only.image == *seven.image);

    const Sample text_only = make_variant(s, VariantKind::TextOnly, d, 1);
    CHECK(*text_only.image == *white_image());
    CHECK(text_only.text == s.text);
    CHECK(make_variant_input(s, VariantKind::TextOnly, d, 1).whiten_generated);

    const Sample r1 = make_variant(s, VariantKind::TextReplaced, d, 42);
    const Sample r2 = make_variant(s, VariantKind::TextReplaced, d, 42);
    CHECK(r1.text == r2.text);
    CHECK(r1.text != s.text);
    CHECK(r1.label == s.label);
    CHECK(*r1.image == *s.image);
    std::set<Tokens> donors;
    for (std::uint64_t seed = 0; seed < 40; ++seed) donors.insert(make_variant(s, VariantKind::TextReplaced, d, seed).text);
    CHECK(donors == std::set<Tokens>{d.samples[1].text, d.samples[2].text});

    const VariantInput ir = make_variant_input(s, VariantKind::ImageReplaced, d, 7);
    REQUIRE(ir.image_source != nullptr);
    CHECK(ir.image_source->id != s.id);
    CHECK(ir.sample.text == s.text);
    CHECK(*ir.sample.image == *ir.image_source->image);

    Dataset lonely;
    lonely.samples.push_back(s);
    CHECK_THROWS_AS(make_variant(s, VariantKind::TextReplaced, lonely, 1), ContractError);
    CHECK_NOTHROW(make_variant(s, VariantKind::TextOnly, lonely, 1));
}

TEST_CASE("donor draws exclude self and are uniform") {
    std::vector<int> counts(5, 0);
    for (std::uint64_t seed = 0; seed < 4000; ++seed) {
        const std::size_t j = draw_donor(5, 2, seed);
        CHECK(j != 2);
        ++counts[j];
    }
    CHECK(counts[2] == 0);
    for (int i : {0, 1, 3, 4}) CHECK(counts[i] == doctest::Approx(1000).epsilon(0.1));
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto perm = donor_permutation(6, seed);
        std::vector<std::size_t> sorted = perm;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < 6; ++i) {
            CHECK(perm[i] != i);
            CHECK(sorted[i] == i);
        }
    }
    CHECK_THROWS_AS(draw_donor(1, 0, 1), ContractError);
}

TEST_CASE("entropy and information gain") {
    CHECK(predictive_entropy(RowVector{{1.0, 0.0}}) == 0.0);
    CHECK(predictive_entropy(RowVector{{0.5, 0.5}}) == doctest::Approx(0.6931).epsilon(1e-4));
    CHECK(predictive_entropy(RowVector{{0.9, 0.1}}) == doctest::Approx(0.3251).epsilon(1e-4));
    CHECK(info_gain(0.4, 0.4) == 0.0);
    CHECK(info_gain(0.6931, 0.3251) == doctest::Approx(0.3680).epsilon(1e-12));
    SplitMix64 rng(1);
    for (int i = 0; i < 50; ++i) {
        const double a = rng.normal(), b = rng.normal();
        CHECK(info_gain(a, b) == -info_gain(b, a));
    }
}

TEST_CASE("classification metrics") {
    const auto m = classification_metrics({1, 0, 1}, {1, 1, 1});
    CHECK(m.accuracy == doctest::Approx(2.0 / 3.0));
    CHECK(m.precision[1] == 1.0);
    CHECK(m.recall[1] == doctest::Approx(2.0 / 3.0));
    CHECK(m.f1[1] == doctest::Approx(0.8));
    const auto perfect = classification_metrics({0, 1, 1, 0}, {0, 1, 1, 0});
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.macro_f1 == 1.0);
    // Class 0: tp 1, fp 1, fn 1; class 1: tp 1, fp 1, fn 1.
    const auto half = classification_metrics({0, 1, 0, 1}, {0, 0, 1, 1});
    CHECK(half.precision[0] == 0.5);
    CHECK(half.recall[1] == 0.5);
    CHECK(half.macro_f1 == 0.5);
    CHECK(predicted_label(RowVector{{0.5, 0.5}}) == 0);
    CHECK(predicted_label(RowVector{{0.4, 0.6}}) == 1);
    CHECK_THROWS_AS(classification_metrics({1}, {1, 0}), ContractError);
}

TEST_CASE("constant predictor carries no information") {
    const Dataset d = pool(6);
    const ContributionReport r = evaluate_contributions(ConstantPredictor(), d, {1, 2, 3});
    CHECK(r.gain_image == 0.0);
    CHECK(r.gain_text == 0.0);
    CHECK(r.gain_image_replaced == 0.0);
    CHECK(r.gain_text_replaced == 0.0);
    CHECK(r.sample_count == 6);
    CHECK(r.variants.size() == 5);
    for (const auto& v : r.variants) CHECK(v.metrics.accuracy == doctest::Approx(0.5));
}

TEST_CASE("a text-only detector has zero image gain and the closed-form text gain") {
    const Dataset d = pool(8);
    const ContributionReport r = evaluate_contributions(TextOnlyPredictor(), d, {4});
    CHECK(r.gain_image == doctest::Approx(0.0).epsilon(1e-15));
    const double expected = predictive_entropy(RowVector{{0.5, 0.5}}) - predictive_entropy(RowVector{{0.9, 0.1}});
    CHECK(r.gain_text == doctest::Approx(expected).epsilon(1e-12));
    CHECK(r.gain_text > 0.0);
    CHECK(r.gain_image_replaced == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(r.variant(VariantKind::Full).metrics.accuracy == 1.0);
    CHECK(r.variant(VariantKind::ImageOnly).metrics.accuracy == 0.5);
}

TEST_CASE("contribution reports are deterministic and serialisable") {
    TempDir dir;
    const Dataset d = pool(7);
    const ContributionReport a = evaluate_contributions(TextOnlyPredictor(), d, {1, 2});
    const ContributionReport b = evaluate_contributions(TextOnlyPredictor(), d, {1, 2});
    CHECK(a == b);
    const nlohmann::json j = to_json(a);
    CHECK(j["gains_nats"].contains("G(y,x^v)"));
    CHECK(j["sample_count"] == 7);
    write_report(dir.path(), a);
    CHECK(std::filesystem::exists(dir / "contributions.json"));
    CHECK(std::filesystem::exists(dir / "gaps.csv"));
    const std::string csv = to_csv(a);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}

TEST_CASE("prediction failures name the sample") {
    class Failing final : public Predictor {
    public:
        RowVector predict(const VariantInput& in) const override {
            if (in.sample.id == "p3") throw NumericError("boom");
            return RowVector{{0.5, 0.5}};
        }
    };
    try {
        evaluate_contributions(Failing(), pool(5), {1});
        FAIL("expected a pipeline error");
    } catch (const PipelineError& e) {
        CHECK(std::string(e.what()).find("p3") != std::string::npos);
    }
}

TEST_CASE("sim_metric examples") {
    SegmentSet s;
    s.segments = {{"a"}, {"b"}};
    const std::vector<FeatureVector> t{FeatureVector{1.0, 2.0}, FeatureVector{-3.0, 0.5}};
    CHECK(sim_metric(s, t, t) == doctest::Approx(1.0));
    CHECK(sim_metric(s, {FeatureVector{2.0, -1.0}, FeatureVector{0.5, 3.0}}, t) == doctest::Approx(0.0));
    const std::vector<FeatureVector> g{FeatureVector{1.0, 0.0}, FeatureVector{1.0, 1.0}};
    const std::vector<FeatureVector> h{FeatureVector{1.0, 1.0}, FeatureVector{0.0, -1.0}};
    const double c1 = 1.0 / std::sqrt(2.0), c2 = -1.0 / std::sqrt(2.0);
    CHECK(sim_metric(s, g, h) == doctest::Approx((c1 + c2) / 2.0));
    std::size_t warnings = 0;
    CHECK(sim_metric(s, {FeatureVector{0.0, 0.0}, FeatureVector{-3.0, 0.5}}, t, &warnings) == doctest::Approx(0.5));
    CHECK(warnings == 1);
    CHECK_THROWS_AS(sim_metric(s, {FeatureVector{1.0, 0.0}}, t), ContractError);
}

TEST_CASE("variant names round-trip") {
    for (const auto k : kAllVariants) CHECK(parse_variant_kind(to_string(k)) == k);
    CHECK_THROWS(parse_variant_kind("bogus"));
}
