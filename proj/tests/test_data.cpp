// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>

#include "doctest.h"
#include "json.hpp"
#include "retsimd/checkpoint.hpp"
#include "retsimd/data.hpp"
#include "retsimd/error.hpp"
#include "retsimd/image.hpp"
#include "support.hpp"

using namespace retsimd;
using retsimd::testing::TempDir;
using retsimd::testing::write_text;

TEST_CASE("tokenize splits whitespace, punctuation and CJK characters") {
    CHECK(tokenize("hello world") == Tokens{"hello", "world"});
    CHECK(tokenize("a,b. c!") == Tokens{"a", ",", "b", ".", "c", "!"});
    CHECK(tokenize("  spaced\tout\n") == Tokens{"spaced", "out"});
    CHECK(tokenize("新闻，假的。") == Tokens{"新", "闻", "，", "假", "的", "。"});
    CHECK(tokenize("").empty());
}

TEST_CASE("load_dataset reproduces the GossipCop class counts") {
    TempDir dir;
    std::string body;
    for (int i = 0; i < 10259 + 2581; ++i) {
        body += nlohmann::json{{"id", "g" + std::to_string(i)},
                               {"text", "post number " + std::to_string(i)},
                               {"image_path", nullptr},
                               {"label", i < 10259 ? 0 : 1}}
                    .dump() +
                "\n";
    }
    write_text(dir / "gossipcop.jsonl", body);
    const Dataset ds = load_dataset(dir / "gossipcop.jsonl", Split::Train);
    CHECK(ds.size() == 12840);
    CHECK(ds.class_histogram() == std::map<int, std::size_t>{{0, 10259}, {1, 2581}});
    CHECK(ds.missing_images == 0);
    CHECK(ds.samples.front().image_absent);
    CHECK(*ds.samples.front().image == *white_image());
}

TEST_CASE("load_dataset edge cases") {
    TempDir dir;
    SUBCASE("empty file gives an empty dataset") {
        write_text(dir / "empty.jsonl", "");
        CHECK(load_dataset(dir / "empty.jsonl", Split::Test).size() == 0);
    }
    SUBCASE("label outside {0,1} names the line") {
        write_text(dir / "bad.jsonl",
                   R"({"id":"a","text":"x","image_path":null,"label":0})"
                   "\n"
                   R"({"id":"b","text":"y","image_path":null,"label":2})"
                   "\n");
        try {
            load_dataset(dir / "bad.jsonl", Split::Train);
            FAIL("expected a validation error");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }
    SUBCASE("malformed JSON is an ingestion error with the line number") {
        write_text(dir / "broken.jsonl", "{\"id\": \"a\", \"text\": \"x\", \"label\": 0}\n{not json\n");
        try {
            load_dataset(dir / "broken.jsonl", Split::Train);
            FAIL("expected an ingestion error");
        } catch (const IngestionError& e) {
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }
    SUBCASE("missing keys are malformed") {
        write_text(dir / "nokey.jsonl", R"({"id":"a","label":0})"
                                        "\n");
        CHECK_THROWS_AS(load_dataset(dir / "nokey.jsonl", Split::Train), IngestionError);
    }
    SUBCASE("duplicate ids are rejected") {
        write_text(dir / "dup.jsonl", R"({"id":"a","text":"x","label":0})"
                                      "\n"
                                      R"({"id":"a","text":"y","label":1})"
                                      "\n");
        CHECK_THROWS_AS(load_dataset(dir / "dup.jsonl", Split::Train), ValidationError);
    }
    SUBCASE("empty text is rejected") {
        write_text(dir / "blank.jsonl", R"({"id":"a","text":"   ","label":0})"
                                        "\n");
        CHECK_THROWS_AS(load_dataset(dir / "blank.jsonl", Split::Train), ValidationError);
    }
    SUBCASE("unresolvable image becomes white and is counted") {
        write_text(dir / "img.jsonl", R"({"id":"a","text":"x","image_path":"nope.png","label":1})"
                                      "\n");
        const Dataset ds = load_dataset(dir / "img.jsonl", Split::Train);
        CHECK(ds.missing_images == 1);
        CHECK(*ds.samples[0].image == *white_image());
    }
    SUBCASE("text is truncated to max_text_tokens") {
        std::string text;
        for (int i = 0; i < 300; ++i) text += "w ";
        write_text(dir / "long.jsonl", nlohmann::json{{"id", "a"}, {"text", text}, {"label", 0}}.dump() + "\n");
        CHECK(load_dataset(dir / "long.jsonl", Split::Train).samples[0].text.size() == 128);
        LoadOptions opt;
        opt.max_text_tokens = 7;
        CHECK(load_dataset(dir / "long.jsonl", Split::Train, opt).samples[0].text.size() == 7);
    }
}

TEST_CASE("images resolve relative to the dataset file and are resized then cropped") {
    TempDir dir;
    Image img(40, 60);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(i % 251);
    std::filesystem::create_directories(dir / "imgs");
    write_ppm(dir / "imgs" / "a.ppm", img);
    write_text(dir / "d.jsonl", R"({"id":"a","text":"x","image_path":"imgs/a.ppm","label":0})"
                                "\n");
    const Dataset ds = load_dataset(dir / "d.jsonl", Split::Test);
    CHECK(ds.missing_images == 0);
    CHECK(ds.samples[0].image->height == kCropSide);
    CHECK(ds.samples[0].image->width == kCropSide);
    CHECK(*ds.samples[0].image == prepare_image(img, CropMode::Center));
}

TEST_CASE("ingestion is deterministic") {
    TempDir dir;
    std::string body;
    for (int i = 0; i < 50; ++i) {
        body += nlohmann::json{{"id", "s" + std::to_string(i)}, {"text", "t " + std::to_string(i)}, {"label", i % 2}}
                    .dump() +
                "\n";
    }
    write_text(dir / "d.jsonl", body);
    const Dataset a = load_dataset(dir / "d.jsonl", Split::Train);
    const Dataset b = load_dataset(dir / "d.jsonl", Split::Train);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.samples[i].id == b.samples[i].id);
        CHECK(a.samples[i].text == b.samples[i].text);
        CHECK(*a.samples[i].image == *b.samples[i].image);
    }
}

TEST_CASE("paired dataset requires both elements and truncates captions") {
    TempDir dir;
    write_ppm(dir / "p.ppm", Image(8, 8, 10));
    std::string caption;
    for (int i = 0; i < 100; ++i) caption += "c ";
    write_text(dir / "pairs.jsonl", nlohmann::json{{"caption", caption}, {"image_path", "p.ppm"}}.dump() + "\n");
    const auto paired = load_paired_dataset(dir / "pairs.jsonl");
    REQUIRE(paired.pairs.size() == 1);
    CHECK(paired.pairs[0].caption.size() == 77);
    write_text(dir / "bad.jsonl", R"({"caption":"x"})"
                                  "\n");
    CHECK_THROWS_AS(load_paired_dataset(dir / "bad.jsonl"), IngestionError);
}

TEST_CASE("FeatureVector rejects non-finite entries") {
    CHECK_NOTHROW(FeatureVector{1.0, 2.0});
    CHECK_THROWS_AS(FeatureVector({1.0, std::numeric_limits<double>::quiet_NaN()}), NumericError);
    CHECK_THROWS_AS(FeatureVector({std::numeric_limits<double>::infinity()}), NumericError);
}

TEST_CASE("checkpoint round-trips bit-exactly and save-load-save is byte-identical") {
    TempDir dir;
    SplitMix64 rng(3);
    Checkpoint c;
    c.detector_params.add("a", testing::random_matrix(3, 4, rng));
    c.detector_params.add("b", testing::random_matrix(1, 5, rng));
    c.generator_params.add("g", testing::random_matrix(2, 2, rng));
    c.iteration = 42;
    c.metrics["val_micro_f1"] = 0.123456789;
    c.extra_tensors["adam.m/a"] = testing::random_matrix(3, 4, rng);
    c.state = R"({"rng":"1 2 3"})";
    save_checkpoint(dir / "ckpt_42", c);
    const Checkpoint d = load_checkpoint(dir / "ckpt_42");
    CHECK(d.detector_params == c.detector_params);
    CHECK(d.generator_params == c.generator_params);
    CHECK(d.iteration == 42);
    CHECK(d.metrics == c.metrics);
    CHECK(d.state == c.state);
    save_checkpoint(dir / "again", d);
    CHECK(read_file_bytes(dir / "ckpt_42") == read_file_bytes(dir / "again"));
    auto bytes = serialize(c);
    bytes.resize(bytes.size() / 2);
    CHECK_THROWS_AS(deserialize_checkpoint(bytes), IngestionError);
}
