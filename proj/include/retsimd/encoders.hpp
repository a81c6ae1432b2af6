// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "retsimd/autodiff.hpp"
#include "retsimd/data.hpp"
#include "retsimd/image.hpp"

namespace retsimd {

enum class Modality { Text, Image };

/// Hidden-feature extractor for one or both modalities.
class EncoderBackend {
public:
    virtual ~EncoderBackend() = default;
    virtual RowVector encode_text(const Tokens& text) const = 0;
    virtual RowVector encode_image(const Image& image) const = 0;
    virtual Eigen::Index text_dim() const = 0;
    virtual Eigen::Index image_dim() const = 0;
    virtual bool trainable() const { return false; }
};

/// Unit-norm pseudo-random embedding of a token, a pure function of (token, seed).
RowVector token_embedding(const std::string& token, Eigen::Index dim, std::uint64_t seed);

/// Mean of token embeddings with [PAD] masked out, L2-normalized; all-[PAD]
/// text encodes to zero. Throws ContractError on empty text.
RowVector toy_encode_text(const Tokens& text, Eigen::Index d_t, std::uint64_t seed);

inline constexpr int kImageGrid = 4;
inline constexpr Eigen::Index kImageDescriptorDim = kImageGrid * kImageGrid * 3 * 2;

/// Per-cell, per-channel mean and variance of pixel intensities in [0, 1]
/// over a 4x4 grid. Layout: ((cell_row * 4 + cell_col) * 3 + channel) * 2 + {0: mean, 1: var}.
RowVector image_descriptor(const Image& image);

/// Fixed seeded map from the descriptor to d_v, entries N(0, 1/96).
Matrix image_descriptor_map(Eigen::Index d_v, std::uint64_t seed);

/// v / ||v||, or v unchanged when it is zero.
RowVector l2_normalized(RowVector v);

/// image_descriptor(image) * image_descriptor_map(d_v, seed), L2-normalized.
RowVector toy_encode_image(const Image& image, Eigen::Index d_v, std::uint64_t seed = 0);

/// Encoding of the all-white image: all means 1, all variances 0, mapped to d_v and normalized.
RowVector white_reference_vector(Eigen::Index d_v, std::uint64_t seed = 0);

class ToyEncoder final : public EncoderBackend {
public:
    ToyEncoder(Eigen::Index d_t, Eigen::Index d_v, std::uint64_t seed);
    RowVector encode_text(const Tokens& text) const override { return toy_encode_text(text, d_t_, seed_); }
    RowVector encode_image(const Image& image) const override { return l2_normalized(image_descriptor(image) * map_); }
    Eigen::Index text_dim() const override { return d_t_; }
    Eigen::Index image_dim() const override { return d_v_; }

private:
    Eigen::Index d_t_;
    Eigen::Index d_v_;
    std::uint64_t seed_;
    Matrix map_;
};

/// Delegates to an HTTP service: POST <url> {"modality": "text"|"image",
/// "payload": text or base64 PPM} -> {"vector": [...]}.
class RemoteEncoder final : public EncoderBackend {
public:
    RemoteEncoder(std::string url, Eigen::Index d_t, Eigen::Index d_v);
    RowVector encode_text(const Tokens& text) const override;
    RowVector encode_image(const Image& image) const override;
    Eigen::Index text_dim() const override { return d_t_; }
    Eigen::Index image_dim() const override { return d_v_; }

private:
    RowVector request(const std::string& modality, const std::string& payload, Eigen::Index expected) const;
    std::string url_;
    Eigen::Index d_t_;
    Eigen::Index d_v_;
};

/// Builds a backend from a config tag: "toy" or "remote:<url>".
std::unique_ptr<EncoderBackend> make_encoder(const std::string& tag, Eigen::Index d_t, Eigen::Index d_v,
                                             std::uint64_t seed);

/// Trainable projections into the shared space, registered in a ParameterSet.
struct EncoderParams {
    Eigen::Index d_t = 32;
    Eigen::Index d_v = 32;
    Eigen::Index d = 16;

    static constexpr const char* kTextProjection = "encoder.proj_text";
    static constexpr const char* kImageProjection = "encoder.proj_image";

    /// Registers W_a^t (d_t x d) and W_a^v (d_v x d) with scaled random init.
    void register_into(ParameterSet& params, std::uint64_t seed) const;
};

/// h = z * W_a for the modality, using the projection stored in params.
FeatureVector project_shared(const RowVector& z, Modality modality, const ParameterSet& params);
/// Tape version for training.
ad::Var project_shared(ad::Tape& tape, ad::Var z, Modality modality, ParameterSet& params);

/// Encodes text as the image-only variant does: the same number of [PAD] tokens.
Tokens pad_tokens(std::size_t n);
inline constexpr const char* kPadToken = "[PAD]";

}  // namespace retsimd
