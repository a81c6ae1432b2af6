// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#include "retsimd/generator.hpp"

#include <cmath>
#include <cstdlib>

#include "httplib.h"
#include "json.hpp"
#include "retsimd/encoders.hpp"
#include "retsimd/error.hpp"
#include "retsimd/util.hpp"

namespace retsimd {

double PlantedLexicon::score(const Tokens& segment) const {
    int pos = 0, neg = 0;
    for (const auto& t : segment) {
        if (t.rfind(positive_prefix, 0) == 0) ++pos;
        else if (t.rfind(negative_prefix, 0) == 0) ++neg;
    }
    return static_cast<double>(pos - neg) / std::max(1, pos + neg);
}

MockGenerator::MockGenerator(Eigen::Index d, std::uint64_t seed, double leak_strength, PlantedLexicon lexicon)
    : d_(d), seed_(seed), leak_(leak_strength), lexicon_(std::move(lexicon)) {
    if (d <= 0) throw ContractError("generator dimension must be positive");
    if (leak_strength < 0.0 || leak_strength > 1.0) throw ContractError("leak strength must lie in [0, 1]");
    SplitMix64 rng(seed ^ 0x2545F4914F6CDD1DULL);
    direction_.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) direction_[i] = rng.normal();
    direction_ /= direction_.norm();
    params_.add(kHead, Matrix::Identity(d, d));
}

RowVector MockGenerator::embed(const Tokens& segment) const { return toy_encode_text(segment, d_, seed_); }

GeneratedOutput MockGenerator::generate(const Tokens& segment) const {
    RowVector out = embed(segment) * params_.get(kHead).value;
    if (leak_ > 0.0) out += leak_ * lexicon_.score(segment) * direction_;
    return FeatureVector(std::move(out));
}

double MockGenerator::cond_score(const FeatureVector& generated, const Tokens& segment) const {
    if (generated.dim() != d_) throw ContractError("cond_score: feature dimension mismatch");
    const RowVector recon = embed(segment) * params_.get(kHead).value;
    return (generated.values() - recon).squaredNorm() / static_cast<double>(d_);
}

ad::Var MockGenerator::generate(ad::Tape& tape, const Tokens& segment) {
    ad::Var out = ad::matmul(tape.constant(embed(segment)), tape.param(params_.get(kHead)));
    if (leak_ > 0.0) out = ad::add(out, tape.constant(leak_ * lexicon_.score(segment) * direction_));
    return out;
}

ad::Var MockGenerator::cond_score(ad::Tape& tape, ad::Var generated, const Tokens& segment) {
    if (generated.cols() != d_) throw ContractError("cond_score: feature dimension mismatch");
    const ad::Var recon = ad::matmul(tape.constant(embed(segment)), tape.param(params_.get(kHead)));
    return ad::mean(ad::square(ad::sub(generated, recon)));
}

RemoteGenerator::RemoteGenerator(std::string url, std::uint64_t seed) : url_(std::move(url)), seed_(seed) {
    parse_http_url(url_);
}

namespace {

std::string join_tokens(const Tokens& t) {
    std::string s;
    for (const auto& tok : t) {
        if (!s.empty()) s += ' ';
        s += tok;
    }
    return s;
}

nlohmann::json post_json(const std::string& url, const std::string& route, const nlohmann::json& body) {
    const auto ep = parse_http_url(url);
    httplib::Client client(ep.scheme_host_port);
    client.set_read_timeout(300, 0);
    auto res = client.Post(ep.path + route, body.dump(), "application/json");
    if (!res) throw PipelineError("generator service unreachable at " + url);
    if (res->status != 200) throw PipelineError("generator service returned HTTP " + std::to_string(res->status));
    auto j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw PipelineError("generator service returned invalid JSON");
    return j;
}

}  // namespace

GeneratedOutput RemoteGenerator::generate(const Tokens& segment) const {
    const auto j = post_json(url_, "/generate", {{"prompt", join_tokens(segment)}, {"seed", seed_}});
    if (j.contains("feature") && j["feature"].is_array()) {
        const auto v = j["feature"].get<std::vector<double>>();
        return FeatureVector(RowVector(Eigen::Map<const RowVector>(v.data(), static_cast<Eigen::Index>(v.size()))));
    }
    if (j.contains("image_base64") && j["image_base64"].is_string()) {
        return decode_image_bytes(base64_decode(j["image_base64"].get<std::string>()));
    }
    throw PipelineError("generator response has neither feature nor image_base64");
}

double RemoteGenerator::cond_score(const FeatureVector& generated, const Tokens& segment) const {
    std::vector<double> f(generated.values().data(), generated.values().data() + generated.dim());
    const auto j = post_json(url_, "/cond_score", {{"prompt", join_tokens(segment)}, {"feature", f}});
    if (!j.contains("score") || !j["score"].is_number()) throw PipelineError("cond_score response lacks a score");
    const double s = j["score"].get<double>();
    if (!std::isfinite(s) || s < 0.0) throw NumericError("cond_score must be finite and non-negative");
    return s;
}

std::vector<FeatureVector> generate_sequence(const SegmentSet& segments, const GeneratorBackend& backend,
                                             const ImagePathway& pathway) {
    if (segments.k() == 0) throw ContractError("generate_sequence: empty segment set");
    std::vector<FeatureVector> out;
    out.reserve(segments.k());
    for (std::size_t j = 0; j < segments.k(); ++j) {
        try {
            GeneratedOutput g = backend.generate(segments.segments[j]);
            if (auto* f = std::get_if<FeatureVector>(&g)) {
                out.push_back(std::move(*f));
            } else {
                if (!pathway) throw ContractError("pixel output needs an image pathway");
                out.push_back(pathway(std::get<Image>(g)));
            }
        } catch (const GenerationError&) {
            throw;
        } catch (const std::exception& e) {
            throw GenerationError("generation failed for segment " + std::to_string(j) + ": " + e.what(), j);
        }
    }
    return out;
}

double xi_weight(std::size_t j, std::size_t m, std::size_t k) {
    if (k < 2 || j < 1 || m < 1 || j > k || m > k) throw ContractError("xi_weight: indices outside 1..k or k < 2");
    if (j == m) throw ContractError("xi_weight: self-pairs are excluded");
    const double dist = j > m ? static_cast<double>(j - m) : static_cast<double>(m - j);
    return dist / static_cast<double>(k - 1);
}

double r_mti_from_scores(const Matrix& scores) {
    if (scores.rows() != scores.cols()) throw ContractError("r_mti: score table must be K x K");
    const auto k = static_cast<std::size_t>(scores.rows());
    if (k <= 1) return 0.0;
    if (!scores.allFinite()) throw NumericError("r_mti: non-finite cond_score");
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        double inner = 0.0;
        for (std::size_t m = 0; m < k; ++m) {
            if (m == j) continue;
            inner += scores(j, j) - xi_weight(j + 1, m + 1, k) * scores(j, m);
        }
        total += inner / static_cast<double>(k - 1);
    }
    return total / static_cast<double>(k);
}

double r_mti(const SegmentSet& segments, const std::vector<FeatureVector>& generated, const GeneratorBackend& backend) {
    const std::size_t k = segments.k();
    if (generated.size() != k) throw ContractError("r_mti: generated/segment count mismatch");
    if (k <= 1) return 0.0;
    Matrix scores(k, k);
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t m = 0; m < k; ++m) {
            scores(j, m) = backend.cond_score(generated[j], segments.segments[m]);
        }
    }
    return r_mti_from_scores(scores);
}

ad::Var r_mti(ad::Tape& tape, const SegmentSet& segments, const std::vector<ad::Var>& generated,
              TrainableGenerator& backend) {
    const std::size_t k = segments.k();
    if (generated.size() != k) throw ContractError("r_mti: generated/segment count mismatch");
    Matrix zero = Matrix::Zero(1, 1);
    if (k <= 1) return tape.constant(zero);
    std::vector<ad::Var> terms;
    for (std::size_t j = 0; j < k; ++j) {
        const ad::Var own = backend.cond_score(tape, generated[j], segments.segments[j]);
        for (std::size_t m = 0; m < k; ++m) {
            if (m == j) continue;
            const ad::Var other = backend.cond_score(tape, generated[j], segments.segments[m]);
            terms.push_back(ad::sub(own, ad::scale(other, xi_weight(j + 1, m + 1, k))));
        }
    }
    const ad::Var out = ad::mean(ad::vstack(terms));
    if (!out.value().allFinite()) throw NumericError("r_mti: non-finite cond_score");
    return out;
}

AuxHead AuxHead::zeros(Eigen::Index d) { return {Matrix::Zero(d, 2), RowVector::Zero(2)}; }

RowVector AuxHead::predict(const RowVector& pooled) const {
    if (pooled.size() != weight.rows()) throw ContractError("aux head: feature dimension mismatch");
    RowVector logits = pooled * weight + bias;
    logits.array() -= logits.maxCoeff();
    RowVector p = logits.array().exp().matrix();
    return p / p.sum();
}

AuxHead AuxHead::fit(const std::vector<RowVector>& pooled, const std::vector<int>& labels, int iterations,
                     double learning_rate) {
    if (pooled.empty() || pooled.size() != labels.size()) throw ContractError("aux head fit: bad training data");
    const Eigen::Index d = pooled.front().size();
    AuxHead head = zeros(d);
    const double n = static_cast<double>(pooled.size());
    for (int it = 0; it < iterations; ++it) {
        Matrix gw = Matrix::Zero(d, 2);
        RowVector gb = RowVector::Zero(2);
        for (std::size_t i = 0; i < pooled.size(); ++i) {
            RowVector g = head.predict(pooled[i]);
            g[labels[i]] -= 1.0;
            gw += pooled[i].transpose() * g;
            gb += g;
        }
        head.weight -= learning_rate * gw / n;
        head.bias -= learning_rate * gb / n;
    }
    return head;
}

double r_mil_from_predictive(const RowVector& predictive, const RowVector& label_prior) {
    if (label_prior.size() != predictive.size() || std::abs(label_prior.sum() - 1.0) > 1e-6) {
        throw ContractError("r_mil: label prior must be a distribution over the same classes");
    }
    return -(predictive_entropy(label_prior) - predictive_entropy(predictive));
}

double r_mil(const std::vector<FeatureVector>& generated, int label, const AuxHead& aux_head,
             const RowVector& label_prior) {
    if (generated.empty()) throw ContractError("r_mil: no generated features");
    if (label != 0 && label != 1) throw ContractError("r_mil: label outside {0,1}");
    RowVector pooled = RowVector::Zero(generated.front().dim());
    for (const auto& g : generated) pooled += g.values();
    pooled /= static_cast<double>(generated.size());
    return r_mil_from_predictive(aux_head.predict(pooled), label_prior);
}

ad::Var r_mil(ad::Tape& tape, const std::vector<ad::Var>& generated, int label, const AuxHead& aux_head,
              const RowVector& label_prior) {
    if (generated.empty()) throw ContractError("r_mil: no generated features");
    if (label != 0 && label != 1) throw ContractError("r_mil: label outside {0,1}");
    if (std::abs(label_prior.sum() - 1.0) > 1e-6) throw ContractError("r_mil: label prior must sum to 1");
    const ad::Var pooled = ad::mean_rows(ad::vstack(generated));
    const ad::Var logits = ad::add(ad::matmul(pooled, tape.constant(aux_head.weight)), tape.constant(aux_head.bias));
    const ad::Var h = ad::entropy(ad::softmax_rows(logits));
    Matrix prior_h(1, 1);
    prior_h(0, 0) = predictive_entropy(label_prior);
    return ad::sub(h, tape.constant(prior_h));
}

double l_t2i(const GeneratorBackend& backend, const std::vector<CaptionTarget>& batch, const ImagePathway& pathway) {
    if (batch.empty()) throw ContractError("l_t2i: empty batch");
    double total = 0.0;
    for (const auto& pair : batch) {
        GeneratedOutput g = backend.generate(pair.caption);
        FeatureVector f;
        if (auto* fv = std::get_if<FeatureVector>(&g)) {
            f = std::move(*fv);
        } else {
            if (!pathway) throw ContractError("pixel output needs an image pathway");
            f = pathway(std::get<Image>(g));
        }
        if (f.dim() != pair.target.dim()) throw ContractError("l_t2i: generated/target dimension mismatch");
        total += (f.values() - pair.target.values()).squaredNorm() / static_cast<double>(f.dim());
    }
    return total / static_cast<double>(batch.size());
}

ad::Var l_t2i(ad::Tape& tape, TrainableGenerator& backend, const std::vector<CaptionTarget>& batch) {
    if (batch.empty()) throw ContractError("l_t2i: empty batch");
    std::vector<ad::Var> terms;
    for (const auto& pair : batch) {
        const ad::Var g = backend.generate(tape, pair.caption);
        if (g.cols() != pair.target.dim()) throw ContractError("l_t2i: generated/target dimension mismatch");
        terms.push_back(ad::mean(ad::square(ad::sub(g, tape.constant(pair.target.values())))));
    }
    return ad::mean(ad::vstack(terms));
}

GeneratorLossReport generator_step(TrainableGenerator& backend, const GeneratorBatch& batch, double alpha1,
                                   double alpha2, Adam& optimizer) {
    ParameterSet& phi = backend.params();
    const ParameterSet backup = phi;
    phi.zero_grad();

    ad::Tape tape;
    const ad::Var t2i = l_t2i(tape, backend, batch.paired);
    std::vector<ad::Var> mti_terms, mil_terms;
    for (const auto& s : batch.mmd) {
        std::vector<ad::Var> gen;
        for (const auto& seg : s.segments.segments) gen.push_back(backend.generate(tape, seg));
        mti_terms.push_back(r_mti(tape, s.segments, gen, backend));
        mil_terms.push_back(r_mil(tape, gen, s.label, batch.aux_head, batch.label_prior));
    }
    Matrix zero = Matrix::Zero(1, 1);
    const ad::Var mti = mti_terms.empty() ? tape.constant(zero) : ad::mean(ad::vstack(mti_terms));
    const ad::Var mil = mil_terms.empty() ? tape.constant(zero) : ad::mean(ad::vstack(mil_terms));
    const ad::Var loss = ad::add(t2i, ad::add(ad::scale(mti, alpha1), ad::scale(mil, alpha2)));

    GeneratorLossReport report;
    report.l_t2i = t2i.scalar();
    report.r_mti = mti.scalar();
    report.r_mil = mil.scalar();
    report.l_gen = loss.scalar();
    report.alpha1 = alpha1;
    report.alpha2 = alpha2;
    if (!std::isfinite(report.l_gen)) throw NumericError("generator loss is not finite; step skipped");

    tape.backward(loss);
    optimizer.step(phi);
    if (!phi.all_finite()) {
        phi = backup;
        throw NumericError("generator update produced non-finite parameters; step reverted");
    }
    return report;
}

std::unique_ptr<GeneratorBackend> make_generator(const std::string& tag, Eigen::Index d, std::uint64_t seed,
                                                 double leak_strength, const PlantedLexicon& lexicon) {
    if (tag == "mock") return std::make_unique<MockGenerator>(d, seed, leak_strength, lexicon);
    if (tag.rfind("remote:", 0) == 0) return std::make_unique<RemoteGenerator>(tag.substr(7), seed);
    if (tag == "remote") {
        const char* url = std::getenv("RETSIMD_GEN_URL");
        if (url == nullptr) throw ConfigError("generator backend 'remote' needs RETSIMD_GEN_URL");
        return std::make_unique<RemoteGenerator>(url, seed);
    }
    throw ConfigError("unknown generator backend: " + tag);
}

}  // namespace retsimd
