// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <vector>

namespace retsimd {

/// 8-bit RGB image, row-major H x W x 3.
struct Image {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(int h, int w, std::uint8_t fill = 0);

    std::uint8_t& at(int y, int x, int c) { return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
    std::uint8_t at(int y, int x, int c) const { return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
    bool valid() const { return height > 0 && width > 0 && pixels.size() == static_cast<std::size_t>(height) * width * 3; }

    friend bool operator==(const Image&, const Image&) = default;
};

using ImagePtr = std::shared_ptr<const Image>;

inline constexpr int kResizeSide = 256;
inline constexpr int kCropSide = 224;

/// Shared all-white 224x224 image used for absent images and text-only variants.
ImagePtr white_image();

enum class CropMode { Center, Random };

/// Decodes binary PPM (P6) or PNG. Throws IngestionError on failure.
Image read_image_file(const std::filesystem::path& path);
/// Decodes PPM or PNG from an in-memory byte buffer.
Image decode_image_bytes(const std::vector<std::uint8_t>& bytes);
void write_ppm(const std::filesystem::path& path, const Image& img);

Image resize_bilinear(const Image& img, int height, int width);
Image crop(const Image& img, int top, int left, int height, int width);

/// Resize to 256x256 then crop 224x224 (center, or seeded random in training mode).
Image prepare_image(const Image& img, CropMode mode, std::mt19937_64* rng = nullptr);

}  // namespace retsimd
