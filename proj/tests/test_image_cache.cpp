// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstring>
#include <png.h>

#include "doctest.h"
#include "retsimd/cache.hpp"
#include "retsimd/error.hpp"
#include "retsimd/image.hpp"
#include "support.hpp"

using namespace retsimd;
using retsimd::testing::TempDir;

TEST_CASE("PPM and PNG decode to the same pixels") {
    TempDir dir;
    Image img(5, 7);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(i * 13);
    write_ppm(dir / "a.ppm", img);
    CHECK(read_image_file(dir / "a.ppm") == img);

    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = 7;
    png.height = 5;
    png.format = PNG_FORMAT_RGB;
    REQUIRE(png_image_write_to_file(&png, (dir / "a.png").c_str(), 0, img.pixels.data(), 0, nullptr));
    CHECK(read_image_file(dir / "a.png") == img);
    CHECK_THROWS_AS(decode_image_bytes({1, 2, 3}), IngestionError);
}

TEST_CASE("prepare_image resizes to 256 and crops 224") {
    Image img(30, 50, 77);
    const Image out = prepare_image(img, CropMode::Center);
    CHECK(out.height == 224);
    CHECK(out.width == 224);
    CHECK(out == Image(224, 224, 77));
    std::mt19937_64 rng(5);
    CHECK(prepare_image(img, CropMode::Random, &rng).height == 224);
    CHECK(white_image()->height == 224);
}

TEST_CASE("cache: last round wins, misses are explicit, values round-trip") {
    FeatureCache cache(2);
    CHECK_FALSE(cache.get("never").has_value());
    cache.put("x", {FeatureVector{1.0, 2.0}, FeatureVector{3.0, 4.0}}, 1);
    cache.put("x", {FeatureVector{5.0, 6.0}, FeatureVector{7.0, 8.0}}, 2);
    const auto e = cache.get("x");
    REQUIRE(e.has_value());
    CHECK(e->round == 2);
    CHECK(e->features[0].values()[0] == 5.0);
    CHECK(e->features[1].values()[1] == 8.0);
    CHECK_THROWS_AS(cache.put("y", {FeatureVector{1.0}}, 1), ContractError);
    CHECK_NOTHROW(cache.put("short", {FeatureVector{1.0}}, 1, 1));
}

TEST_CASE("cache stores float32 bit-exactly on disk") {
    TempDir dir;
    SplitMix64 rng(9);
    std::vector<FeatureVector> feats;
    for (int j = 0; j < 3; ++j) {
        RowVector v(6);
        for (auto& x : v) x = static_cast<double>(static_cast<float>(rng.normal()));
        feats.emplace_back(v);
    }
    {
        FeatureCache cache(3, "ds", dir.path());
        cache.put("sample-1", feats, 1);
        cache.put("sample-1", feats, 4);
    }
    CHECK(std::filesystem::exists(dir / "ds/sample-1/round_4.bin"));
    CHECK_FALSE(std::filesystem::exists(dir / "ds/sample-1/round_1.bin"));
    FeatureCache reopened(3, "ds", dir.path());
    const auto e = reopened.get("sample-1");
    REQUIRE(e.has_value());
    CHECK(e->round == 4);
    for (int j = 0; j < 3; ++j) {
        CHECK(std::memcmp(e->features[j].values().data(), feats[j].values().data(), 6 * sizeof(double)) == 0);
    }
    const auto bytes = FeatureCache::encode(feats);
    CHECK(bytes.size() == 4 + 3 * (4 + 6 * 4));
    CHECK(bytes[0] == 3);
    CHECK(FeatureCache::decode(bytes).size() == 3);
}
