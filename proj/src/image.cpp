// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#include "retsimd/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "retsimd/error.hpp"

namespace retsimd {

Image::Image(int h, int w, std::uint8_t fill)
    : height(h), width(w), pixels(static_cast<std::size_t>(h) * w * 3, fill) {}

ImagePtr white_image() {
    static const ImagePtr white = std::make_shared<const Image>(kCropSide, kCropSide, 255);
    return white;
}

namespace {

bool is_png(const std::vector<std::uint8_t>& b) {
    static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    return b.size() >= 8 && std::memcmp(b.data(), sig, 8) == 0;
}

Image decode_ppm(const std::vector<std::uint8_t>& b) {
    std::size_t pos = 0;
    auto skip_ws = [&] {
        while (pos < b.size()) {
            if (b[pos] == '#') {
                while (pos < b.size() && b[pos] != '\n') ++pos;
            } else if (std::isspace(b[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_int = [&] {
        skip_ws();
        int v = 0;
        bool any = false;
        while (pos < b.size() && std::isdigit(b[pos])) {
            v = v * 10 + (b[pos++] - '0');
            any = true;
        }
        if (!any) throw IngestionError("malformed PPM header");
        return v;
    };
    if (b.size() < 2 || b[0] != 'P' || b[1] != '6') throw IngestionError("unsupported image format");
    pos = 2;
    const int w = read_int();
    const int h = read_int();
    const int maxval = read_int();
    if (w <= 0 || h <= 0 || maxval != 255) throw IngestionError("unsupported PPM dimensions or depth");
    ++pos;  // single whitespace after maxval
    Image img(h, w);
    if (b.size() < pos + img.pixels.size()) throw IngestionError("truncated PPM data");
    std::memcpy(img.pixels.data(), b.data() + pos, img.pixels.size());
    return img;
}

Image decode_png(const std::vector<std::uint8_t>& b) {
    png_image pimg;
    std::memset(&pimg, 0, sizeof(pimg));
    pimg.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&pimg, b.data(), b.size())) {
        throw IngestionError(std::string("PNG decode failed: ") + pimg.message);
    }
    pimg.format = PNG_FORMAT_RGB;
    Image img(static_cast<int>(pimg.height), static_cast<int>(pimg.width));
    if (!png_image_finish_read(&pimg, nullptr, img.pixels.data(), 0, nullptr)) {
        png_image_free(&pimg);
        throw IngestionError(std::string("PNG decode failed: ") + pimg.message);
    }
    return img;
}

}  // namespace

Image decode_image_bytes(const std::vector<std::uint8_t>& bytes) {
    return is_png(bytes) ? decode_png(bytes) : decode_ppm(bytes);
}

Image read_image_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestionError("cannot open image " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_image_bytes(bytes);
}

void write_ppm(const std::filesystem::path& path, const Image& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
}

Image resize_bilinear(const Image& img, int height, int width) {
    if (!img.valid() || height <= 0 || width <= 0) throw ContractError("resize: invalid image or size");
    Image out(height, width);
    const double sy = static_cast<double>(img.height) / height;
    const double sx = static_cast<double>(img.width) / width;
    for (int y = 0; y < height; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.height - 1.0);
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < width; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.width - 1.0);
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double wx = fx - x0;
            for (int c = 0; c < 3; ++c) {
                const double v = (1 - wy) * ((1 - wx) * img.at(y0, x0, c) + wx * img.at(y0, x1, c)) +
                                 wy * ((1 - wx) * img.at(y1, x0, c) + wx * img.at(y1, x1, c));
                out.at(y, x, c) = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
            }
        }
    }
    return out;
}

Image crop(const Image& img, int top, int left, int height, int width) {
    if (top < 0 || left < 0 || top + height > img.height || left + width > img.width) {
        throw ContractError("crop window outside image");
    }
    Image out(height, width);
    for (int y = 0; y < height; ++y) {
        const auto* src = &img.pixels[(static_cast<std::size_t>(top + y) * img.width + left) * 3];
        std::copy(src, src + static_cast<std::size_t>(width) * 3, &out.pixels[static_cast<std::size_t>(y) * width * 3]);
    }
    return out;
}

Image prepare_image(const Image& img, CropMode mode, std::mt19937_64* rng) {
    const Image resized = (img.height == kResizeSide && img.width == kResizeSide)
                              ? img
                              : resize_bilinear(img, kResizeSide, kResizeSide);
    constexpr int slack = kResizeSide - kCropSide;
    int top = slack / 2, left = slack / 2;
    if (mode == CropMode::Random) {
        if (rng == nullptr) throw ContractError("random crop requires an rng");
        std::uniform_int_distribution<int> dist(0, slack);
        top = dist(*rng);
        left = dist(*rng);
    }
    return crop(resized, top, left, kCropSide, kCropSide);
}

}  // namespace retsimd
