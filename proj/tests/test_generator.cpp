// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#include <thread>

#include "doctest.h"
#include "retsimd/encoders.hpp"
#include "retsimd/error.hpp"
#include "retsimd/generator.hpp"
#include "retsimd/information.hpp"
#include "support.hpp"
// Eigen must precede httplib: <resolv.h> defines a _res macro.
#include "httplib.h"
#include "json.hpp"

using namespace retsimd;
using namespace retsimd::testing;

namespace {

SegmentSet make_segments(const std::vector<Tokens>& segs) {
    SegmentSet s;
    std::size_t offset = 0;
    for (const auto& seg : segs) {
        s.segments.push_back(seg);
        s.offsets.push_back(offset);
        offset += seg.size();
    }
    s.source_token_count = offset;
    return s;
}

// Backend with a fixed score table indexed by the first token of each side.
class TableBackend final : public GeneratorBackend {
public:
    explicit TableBackend(Matrix scores) : scores_(std::move(scores)) {}
    GeneratedOutput generate(const Tokens& segment) const override {
        if (segment.front() == "bad") throw std::runtime_error("backend exploded");
        return FeatureVector{static_cast<double>(std::stoi(segment.front()))};
    }
    double cond_score(const FeatureVector& generated, const Tokens& segment) const override {
        return scores_(static_cast<Eigen::Index>(generated[0]), std::stoi(segment.front()));
    }

private:
    Matrix scores_;
};

double entropy2(double p) {
    double h = 0.0;
    for (double q : {p, 1.0 - p})
        if (q > 1e-12) h -= q * std::log(q);
    return h;
}

}  // namespace

TEST_CASE("xi weights") {
    CHECK(xi_weight(1, 5, 5) == 1.0);
    CHECK(xi_weight(2, 3, 5) == 0.25);
    CHECK(xi_weight(1, 2, 2) == 1.0);
    CHECK(xi_weight(4, 2, 5) == xi_weight(2, 4, 5));
    CHECK(xi_weight(1, 2, 5) < xi_weight(1, 3, 5));
    CHECK_THROWS_AS(xi_weight(2, 2, 5), ContractError);
    CHECK_THROWS_AS(xi_weight(1, 2, 1), ContractError);
    CHECK_THROWS_AS(xi_weight(0, 2, 3), ContractError);
}

TEST_CASE("r_mti examples") {
    const TableBackend one(Matrix::Constant(1, 1, 3.0));
    CHECK(r_mti(make_segments({{"0"}}), {FeatureVector{0.0}}, one) == 0.0);

    const TableBackend constant(Matrix::Constant(2, 2, 1.7));
    CHECK(r_mti(make_segments({{"0"}, {"1"}}), {FeatureVector{0.0}, FeatureVector{1.0}}, constant) == 0.0);

    Matrix table{{0.2, 0.9, 1.4}, {0.7, 0.1, 0.6}, {2.0, 0.3, 0.5}};
    const TableBackend hand(table);
    double brute = 0.0;
    for (int j = 0; j < 3; ++j) {
        double inner = 0.0;
        for (int m = 0; m < 3; ++m) {
            if (m == j) continue;
            const double xi = std::abs(j - m) / 2.0;
            inner += table(j, j) - xi * table(j, m);
        }
        brute += inner / 2.0;
    }
    brute /= 3.0;
    const double got = r_mti(make_segments({{"0"}, {"1"}, {"2"}}),
                             {FeatureVector{0.0}, FeatureVector{1.0}, FeatureVector{2.0}}, hand);
    CHECK(got == doctest::Approx(brute).epsilon(1e-12));
    CHECK(r_mti_from_scores(table) == doctest::Approx(brute).epsilon(1e-12));
    CHECK_THROWS_AS(r_mti(make_segments({{"0"}, {"1"}}), {FeatureVector{0.0}}, hand), ContractError);
    Matrix bad = table;
    bad(1, 2) = std::nan("");
    CHECK_THROWS_AS(r_mti_from_scores(bad), NumericError);
}

TEST_CASE("r_mti with identical segments equals the brute-force (1 - xi) sum") {
    MockGenerator gen(4, 3, 0.0);
    SplitMix64 rng(5);
    gen.params().get(MockGenerator::kHead).value = random_matrix(4, 4, rng);
    const Tokens seg{"same", "words"};
    const SegmentSet s = make_segments({seg, seg, seg, seg});
    std::vector<FeatureVector> generated;
    for (int j = 0; j < 4; ++j) generated.emplace_back(random_matrix(1, 4, rng));
    double brute = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
        const double c = gen.cond_score(generated[j], seg);
        double inner = 0.0;
        for (std::size_t m = 0; m < 4; ++m)
            if (m != j) inner += (1.0 - xi_weight(j + 1, m + 1, 4)) * c;
        brute += inner / 3.0;
    }
    CHECK(r_mti(s, generated, gen) == doctest::Approx(brute / 4.0).epsilon(1e-12));
}

TEST_CASE("r_mil examples and monotonicity") {
    const RowVector prior{{0.5, 0.5}};
    CHECK(r_mil_from_predictive(prior, prior) == 0.0);
    CHECK(r_mil_from_predictive(RowVector{{1.0, 0.0}}, prior) == doctest::Approx(-0.693147).epsilon(1e-5));
    const double expected = -(entropy2(0.5) - entropy2(0.9));
    CHECK(expected == doctest::Approx(-0.3680).epsilon(1e-3));
    CHECK(r_mil_from_predictive(RowVector{{0.9, 0.1}}, prior) == doctest::Approx(expected).epsilon(1e-12));

    double last = 1.0;
    for (int s = 0; s < 10; ++s) {
        const double t = s / 9.0;
        const double p1 = 0.5 + 0.5 * t;
        const double loss = r_mil_from_predictive(RowVector{{1.0 - p1, p1}}, prior);
        CHECK(loss < last);
        last = loss;
    }

    AuxHead head = AuxHead::zeros(2);
    CHECK(r_mil({FeatureVector{1.0, 2.0}}, 1, head, prior) == doctest::Approx(0.0));
    head.weight = Matrix{{0.0, 0.0}, {0.0, 50.0}};
    CHECK(r_mil({FeatureVector{0.0, 1.0}, FeatureVector{0.0, 1.0}}, 1, head, prior) == doctest::Approx(-std::log(2.0)).epsilon(1e-9));
    CHECK_THROWS_AS(r_mil_from_predictive(prior, RowVector{{0.6, 0.6}}), ContractError);
}

TEST_CASE("predictive entropy") {
    CHECK(predictive_entropy(RowVector{{0.5, 0.5}}) == doctest::Approx(std::log(2.0)));
    CHECK(predictive_entropy(RowVector{{1.0, 0.0}}) == 0.0);
    CHECK(predictive_entropy(RowVector{{0.9, 0.1}}) == doctest::Approx(0.325083).epsilon(1e-5));
    CHECK_THROWS_AS(predictive_entropy(RowVector{{0.9, 0.2}}), ContractError);
    CHECK_THROWS_AS(predictive_entropy(RowVector{{1.1, -0.1}}), ContractError);
}

TEST_CASE("l_t2i examples") {
    MockGenerator gen(3, 9, 0.0);
    const Tokens a{"red", "car"}, b{"blue", "sky"};
    const RowVector ga = std::get<FeatureVector>(gen.generate(a)).values();
    const RowVector gb = std::get<FeatureVector>(gen.generate(b)).values();
    CHECK(l_t2i(gen, {{a, FeatureVector(ga)}, {b, FeatureVector(gb)}}) == 0.0);
    CHECK(l_t2i(gen, {{a, FeatureVector(RowVector(ga.array() + 0.3))}}) == doctest::Approx(0.09).epsilon(1e-12));

    const RowVector ta{{1.0, -1.0, 0.5}}, tb{{0.0, 2.0, 0.25}};
    double sum_a = 0.0, sum_b = 0.0;
    for (int i = 0; i < 3; ++i) {
        sum_a += (ga[i] - ta[i]) * (ga[i] - ta[i]);
        sum_b += (gb[i] - tb[i]) * (gb[i] - tb[i]);
    }
    const double expected = (sum_a / 3.0 + sum_b / 3.0) / 2.0;
    CHECK(l_t2i(gen, {{a, FeatureVector(ta)}, {b, FeatureVector(tb)}}) == doctest::Approx(expected).epsilon(1e-12));
    CHECK_THROWS_AS(l_t2i(gen, {{a, FeatureVector{1.0}}}), ContractError);
    CHECK_THROWS_AS(l_t2i(gen, {}), ContractError);
}

TEST_CASE("mock generator and generate_sequence") {
    MockGenerator gen(8, 21, 0.0);
    const auto out = generate_sequence(make_segments({{"a"}, {"b"}}), gen);
    REQUIRE(out.size() == 2);
    CHECK(relative_error(out[0].values(), oracle_token_embedding("a", 8, 21)) < 1e-12);
    CHECK(relative_error(out[1].values(), oracle_token_embedding("b", 8, 21)) < 1e-12);
    CHECK(generate_sequence(make_segments({{"x"}}), gen).size() == 1);
    const auto same = generate_sequence(make_segments({{"s", "t"}, {"s", "t"}}), gen);
    CHECK(same[0] == same[1]);

    MockGenerator leaky(8, 21, 0.5);
    const RowVector plain = std::get<FeatureVector>(gen.generate({"w", "cue+1"})).values();
    const RowVector leaked = std::get<FeatureVector>(leaky.generate({"w", "cue+1"})).values();
    CHECK(relative_error(leaked - plain, 0.5 * leaky.leak_direction()) < 1e-12);
    CHECK(std::get<FeatureVector>(leaky.generate({"w"})).values() == std::get<FeatureVector>(gen.generate({"w"})).values());
    CHECK(PlantedLexicon{}.score({"cue+a", "cue-b", "cue-c", "w"}) == doctest::Approx(-1.0 / 3.0));
    CHECK(gen.cond_score(out[0], {"a"}) == 0.0);
    CHECK(gen.cond_score(out[0], {"b"}) > 0.0);
}

TEST_CASE("generation failures carry the segment index") {
    const TableBackend backend(Matrix::Zero(3, 3));
    try {
        generate_sequence(make_segments({{"0"}, {"1"}, {"bad"}}), backend);
        FAIL("expected a generation error");
    } catch (const GenerationError& e) {
        CHECK(e.segment_index() == 2);
    }
    CHECK_THROWS_AS(generate_sequence(SegmentSet{}, backend), ContractError);
}

TEST_CASE("generator loss gradient matches finite differences") {
    SplitMix64 rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::Index d = 2 + static_cast<Eigen::Index>(rng.next() % 7);
        MockGenerator gen(d, 40 + trial, 0.3);
        gen.params().get(MockGenerator::kHead).value = random_matrix(d, d, rng);
        GeneratorBatch batch;
        batch.paired = {{{"cap", "one"}, FeatureVector(RowVector(random_matrix(1, d, rng)))},
                        {{"cap", "two"}, FeatureVector(RowVector(random_matrix(1, d, rng)))}};
        batch.mmd = {{make_segments({{"a", "cue+1"}, {"b"}, {"c", "d"}}), 1}, {make_segments({{"e"}, {"cue-2"}}), 0}};
        batch.aux_head = {random_matrix(d, 2, rng), RowVector(random_matrix(1, 2, rng))};
        batch.label_prior = RowVector{{0.4, 0.6}};
        const double a1 = 0.7, a2 = 0.9;
        auto loss = [&] {
            double mti = 0.0, mil = 0.0;
            for (const auto& s : batch.mmd) {
                const auto g = generate_sequence(s.segments, gen);
                mti += r_mti(s.segments, g, gen);
                mil += r_mil(g, s.label, batch.aux_head, batch.label_prior);
            }
            return l_t2i(gen, batch.paired) + a1 * mti / 2.0 + a2 * mil / 2.0;
        };
        auto backprop = [&] {
            Adam frozen(AdamOptions{0.0});
            const ParameterSet keep = gen.params();
            const auto report = generator_step(gen, batch, a1, a2, frozen);
            CHECK(report.l_gen == doctest::Approx(loss()).epsilon(1e-10));
            CHECK(gen.params() == keep);
        };
        CHECK(gradient_check(gen.params(), loss, backprop) < 1e-4);
    }
}

TEST_CASE("generator_step composition and learning-rate contract") {
    MockGenerator gen(4, 2, 0.5);
    GeneratorBatch batch;
    batch.paired = {{{"x"}, FeatureVector{0.1, 0.2, 0.3, 0.4}}};
    batch.mmd = {{make_segments({{"cue+1", "a"}, {"b"}}), 1}};
    batch.aux_head = AuxHead::zeros(4);
    batch.aux_head.weight(0, 1) = 1.0;
    batch.label_prior = RowVector{{0.5, 0.5}};

    Adam zero(AdamOptions{0.0});
    const ParameterSet before = gen.params();
    const auto r = generator_step(gen, batch, 0.01, 0.01, zero);
    CHECK(gen.params() == before);
    CHECK(r.l_gen == doctest::Approx(r.l_t2i + 0.01 * (r.r_mti + r.r_mil)).epsilon(1e-14));
    CHECK(r.alpha1 == 0.01);

    Adam plain(AdamOptions{0.05});
    const auto pure = generator_step(gen, batch, 0.0, 0.0, plain);
    CHECK(pure.l_gen == pure.l_t2i);
    CHECK(pure.r_mti != 0.0);
    CHECK_FALSE(gen.params() == before);
    double last = pure.l_t2i;
    for (int i = 0; i < 30; ++i) last = generator_step(gen, batch, 0.0, 0.0, plain).l_t2i;
    CHECK(last < pure.l_t2i);

    GeneratorBatch poisoned = batch;
    poisoned.paired[0].target = FeatureVector{1e300, 1e300, 1e300, 1e300};
    const ParameterSet keep = gen.params();
    CHECK_THROWS_AS(generator_step(gen, poisoned, 0.0, 0.0, plain), NumericError);
    CHECK(gen.params() == keep);
}

TEST_CASE("aux head fit separates a separable set") {
    std::vector<RowVector> pooled;
    std::vector<int> labels;
    for (int i = 0; i < 20; ++i) {
        pooled.push_back(RowVector{{i % 2 == 0 ? -1.0 : 1.0, 0.1 * i}});
        labels.push_back(i % 2);
    }
    const AuxHead head = AuxHead::fit(pooled, labels, 200, 0.5);
    for (std::size_t i = 0; i < pooled.size(); ++i) CHECK(head.predict(pooled[i])[labels[i]] > 0.5);
    const AuxHead again = AuxHead::fit(pooled, labels, 200, 0.5);
    CHECK(again.weight == head.weight);
}

TEST_CASE("remote generator over HTTP") {
    httplib::Server server;
    server.Post("/gen/generate", [](const httplib::Request& req, httplib::Response& res) {
        const auto body = nlohmann::json::parse(req.body);
        const std::string prompt = body["prompt"];
        if (prompt == "fail") {
            res.status = 500;
            return;
        }
        if (prompt == "pixels") {
            std::vector<std::uint8_t> ppm = {'P', '6', '\n', '4', ' ', '4', '\n', '2', '5', '5', '\n'};
            ppm.resize(ppm.size() + 48, 200);
            res.set_content(nlohmann::json{{"image_base64", base64_encode(ppm)}}.dump(), "application/json");
            return;
        }
        res.set_content(nlohmann::json{{"feature", {static_cast<double>(prompt.size()), body["seed"].get<double>()}}}.dump(),
                        "application/json");
    });
    server.Post("/gen/cond_score", [](const httplib::Request& req, httplib::Response& res) {
        const auto body = nlohmann::json::parse(req.body);
        res.set_content(nlohmann::json{{"score", body["feature"][0].get<double>() * 0.5}}.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    const RemoteGenerator gen("http://127.0.0.1:" + std::to_string(port) + "/gen", 7);
    const auto feats = generate_sequence(make_segments({{"ab", "c"}, {"d"}}), gen);
    CHECK(feats[0].values() == RowVector{{4.0, 7.0}});
    CHECK(feats[1].values() == RowVector{{1.0, 7.0}});
    CHECK(gen.cond_score(feats[0], {"x"}) == 2.0);
    const auto pix = generate_sequence(make_segments({{"pixels"}}), gen,
                                       [](const Image& img) { return FeatureVector{static_cast<double>(img.at(0, 0, 0))}; });
    CHECK(pix[0][0] == 200.0);
    try {
        generate_sequence(make_segments({{"ok"}, {"fail"}}), gen);
        FAIL("expected a generation error");
    } catch (const GenerationError& e) {
        CHECK(e.segment_index() == 1);
    }
    server.stop();
    th.join();
    CHECK_THROWS_AS(make_generator("diffusion", 4, 1, 0.0, {}), ConfigError);
}
