// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#include "retsimd/encoders.hpp"

#include <cmath>

#include "httplib.h"
#include "json.hpp"
#include "retsimd/error.hpp"
#include "retsimd/util.hpp"

namespace retsimd {

RowVector token_embedding(const std::string& token, Eigen::Index dim, std::uint64_t seed) {
    SplitMix64 rng(fnv1a64(token) ^ (seed * 0x9E3779B97F4A7C15ULL));
    RowVector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v[i] = rng.normal();
    return v / v.norm();
}

RowVector toy_encode_text(const Tokens& text, Eigen::Index d_t, std::uint64_t seed) {
    if (text.empty()) throw ContractError("toy_encode_text: empty text");
    if (d_t <= 0) throw ContractError("toy_encode_text: dimension must be positive");
    RowVector acc = RowVector::Zero(d_t);
    std::size_t used = 0;
    for (const auto& t : text) {
        if (t == kPadToken) continue;
        acc += token_embedding(t, d_t, seed);
        ++used;
    }
    if (used == 0) return acc;
    acc /= static_cast<double>(used);
    const double n = acc.norm();
    return n > 0.0 ? RowVector(acc / n) : acc;
}

RowVector image_descriptor(const Image& image) {
    if (!image.valid() || image.height < kImageGrid || image.width < kImageGrid) {
        throw ContractError("image must be H x W x 3 with H, W >= 4");
    }
    RowVector out(kImageDescriptorDim);
    for (int gy = 0; gy < kImageGrid; ++gy) {
        const int y0 = gy * image.height / kImageGrid, y1 = (gy + 1) * image.height / kImageGrid;
        for (int gx = 0; gx < kImageGrid; ++gx) {
            const int x0 = gx * image.width / kImageGrid, x1 = (gx + 1) * image.width / kImageGrid;
            const double n = static_cast<double>(y1 - y0) * (x1 - x0);
            for (int c = 0; c < 3; ++c) {
                double s = 0.0, s2 = 0.0;
                for (int y = y0; y < y1; ++y) {
                    for (int x = x0; x < x1; ++x) {
                        const double v = image.at(y, x, c) / 255.0;
                        s += v;
                        s2 += v * v;
                    }
                }
                const double mean = s / n;
                const Eigen::Index base = ((gy * kImageGrid + gx) * 3 + c) * 2;
                out[base] = mean;
                out[base + 1] = std::max(0.0, s2 / n - mean * mean);
            }
        }
    }
    return out;
}

Matrix image_descriptor_map(Eigen::Index d_v, std::uint64_t seed) {
    if (d_v <= 0) throw ContractError("image dimension must be positive");
    SplitMix64 rng(0xD1B54A32D192ED03ULL ^ seed);
    Matrix m(kImageDescriptorDim, d_v);
    const double s = 1.0 / std::sqrt(static_cast<double>(kImageDescriptorDim));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal() * s;
    return m;
}

RowVector l2_normalized(RowVector v) {
    const double n = v.norm();
    if (n > 0.0) v /= n;
    return v;
}

RowVector toy_encode_image(const Image& image, Eigen::Index d_v, std::uint64_t seed) {
    return l2_normalized(image_descriptor(image) * image_descriptor_map(d_v, seed));
}

RowVector white_reference_vector(Eigen::Index d_v, std::uint64_t seed) {
    RowVector desc = RowVector::Zero(kImageDescriptorDim);
    for (Eigen::Index i = 0; i < kImageDescriptorDim; i += 2) desc[i] = 1.0;
    return l2_normalized(desc * image_descriptor_map(d_v, seed));
}

ToyEncoder::ToyEncoder(Eigen::Index d_t, Eigen::Index d_v, std::uint64_t seed)
    : d_t_(d_t), d_v_(d_v), seed_(seed), map_(image_descriptor_map(d_v, seed)) {
    if (d_t <= 0) throw ContractError("text dimension must be positive");
}

RemoteEncoder::RemoteEncoder(std::string url, Eigen::Index d_t, Eigen::Index d_v)
    : url_(std::move(url)), d_t_(d_t), d_v_(d_v) {
    parse_http_url(url_);
}

RowVector RemoteEncoder::request(const std::string& modality, const std::string& payload, Eigen::Index expected) const {
    const auto ep = parse_http_url(url_);
    httplib::Client client(ep.scheme_host_port);
    client.set_read_timeout(60, 0);
    const nlohmann::json body = {{"modality", modality}, {"payload", payload}};
    auto res = client.Post(ep.path.empty() ? "/" : ep.path, body.dump(), "application/json");
    if (!res) throw PipelineError("encoder service unreachable at " + url_);
    if (res->status != 200) throw PipelineError("encoder service returned HTTP " + std::to_string(res->status));
    const auto j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains("vector") || !j["vector"].is_array()) {
        throw PipelineError("encoder service response lacks a vector");
    }
    const auto values = j["vector"].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(values.size()) != expected) {
        throw ContractError("encoder service returned dimension " + std::to_string(values.size()) + ", expected " +
                            std::to_string(expected));
    }
    RowVector v = Eigen::Map<const RowVector>(values.data(), static_cast<Eigen::Index>(values.size()));
    if (!v.allFinite()) throw NumericError("encoder service returned non-finite values");
    return v;
}

RowVector RemoteEncoder::encode_text(const Tokens& text) const {
    if (text.empty()) throw ContractError("encode_text: empty text");
    std::string joined;
    for (const auto& t : text) {
        if (!joined.empty()) joined += ' ';
        joined += t;
    }
    return request("text", joined, d_t_);
}

RowVector RemoteEncoder::encode_image(const Image& image) const {
    if (!image.valid()) throw ContractError("encode_image: invalid image");
    std::string header = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.insert(bytes.end(), image.pixels.begin(), image.pixels.end());
    return request("image", base64_encode(bytes), d_v_);
}

std::unique_ptr<EncoderBackend> make_encoder(const std::string& tag, Eigen::Index d_t, Eigen::Index d_v,
                                             std::uint64_t seed) {
    if (tag == "toy") return std::make_unique<ToyEncoder>(d_t, d_v, seed);
    if (tag.rfind("remote:", 0) == 0) return std::make_unique<RemoteEncoder>(tag.substr(7), d_t, d_v);
    throw ConfigError("unknown encoder backend: " + tag);
}

void EncoderParams::register_into(ParameterSet& params, std::uint64_t seed) const {
    SplitMix64 rng(seed ^ 0xA0761D6478BD642FULL);
    auto init = [&](Eigen::Index rows, Eigen::Index cols) {
        Matrix m(rows, cols);
        const double s = 1.0 / std::sqrt(static_cast<double>(rows));
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal() * s;
        return m;
    };
    params.add(kTextProjection, init(d_t, d));
    params.add(kImageProjection, init(d_v, d));
}

namespace {
const char* projection_name(Modality m) {
    return m == Modality::Text ? EncoderParams::kTextProjection : EncoderParams::kImageProjection;
}
}  // namespace

FeatureVector project_shared(const RowVector& z, Modality modality, const ParameterSet& params) {
    const Matrix& w = params.get(projection_name(modality)).value;
    if (z.size() != w.rows()) {
        throw ContractError("project_shared: hidden dim " + std::to_string(z.size()) + " does not match " +
                            std::to_string(w.rows()));
    }
    return FeatureVector(RowVector(z * w));
}

ad::Var project_shared(ad::Tape& tape, ad::Var z, Modality modality, ParameterSet& params) {
    Parameter& w = params.get(projection_name(modality));
    if (z.cols() != w.value.rows()) throw ContractError("project_shared: hidden dim mismatch");
    return ad::matmul(z, tape.param(w));
}

Tokens pad_tokens(std::size_t n) { return Tokens(n, kPadToken); }

}  // namespace retsimd
