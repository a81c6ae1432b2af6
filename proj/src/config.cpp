// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#include "retsimd/config.hpp"

#include <fstream>

#include "config_schema.hpp"
#include "retsimd/error.hpp"

namespace retsimd {

using nlohmann::json;

namespace {

std::string type_name(const json& v) {
    if (v.is_number_integer()) return "integer";
    if (v.is_number()) return "number";
    return v.type_name();
}

bool has_type(const json& v, const std::string& type) {
    if (type == "object") return v.is_object();
    if (type == "array") return v.is_array();
    if (type == "string") return v.is_string();
    if (type == "integer") return v.is_number_integer();
    if (type == "number") return v.is_number();
    if (type == "boolean") return v.is_boolean();
    return false;
}

// Covers the keywords used by the shipped schema.
void validate(const json& v, const json& schema, const std::string& path) {
    const std::string where = path.empty() ? "<root>" : path;
    if (schema.contains("type") && !has_type(v, schema["type"])) {
        throw ConfigError(where + ": expected " + schema["type"].get<std::string>() + ", got " + type_name(v));
    }
    if (schema.contains("enum")) {
        bool found = false;
        for (const auto& e : schema["enum"]) found = found || e == v;
        if (!found) throw ConfigError(where + ": value " + v.dump() + " is not one of " + schema["enum"].dump());
    }
    if (v.is_number()) {
        const double x = v.get<double>();
        if (schema.contains("minimum") && x < schema["minimum"].get<double>()) {
            throw ConfigError(where + ": must be >= " + schema["minimum"].dump());
        }
        if (schema.contains("maximum") && x > schema["maximum"].get<double>()) {
            throw ConfigError(where + ": must be <= " + schema["maximum"].dump());
        }
    }
    if (v.is_string() && schema.contains("minLength") &&
        v.get<std::string>().size() < schema["minLength"].get<std::size_t>()) {
        throw ConfigError(where + ": string is too short");
    }
    if (v.is_array()) {
        if (schema.contains("minItems") && v.size() < schema["minItems"].get<std::size_t>()) {
            throw ConfigError(where + ": needs at least " + schema["minItems"].dump() + " items");
        }
        if (schema.contains("items")) {
            for (std::size_t i = 0; i < v.size(); ++i) validate(v[i], schema["items"], where + "[" + std::to_string(i) + "]");
        }
    }
    if (v.is_object()) {
        const json props = schema.value("properties", json::object());
        const bool closed = schema.contains("additionalProperties") && schema["additionalProperties"] == false;
        for (const auto& [key, value] : v.items()) {
            const std::string child = path.empty() ? key : path + "." + key;
            if (props.contains(key)) {
                validate(value, props[key], child);
            } else if (closed) {
                throw ConfigError("unknown config key '" + child + "'");
            }
        }
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj[key].get<T>();
}

}  // namespace

const json& config_schema() {
    static const json schema = json::parse(detail::kConfigSchemaText);
    return schema;
}

DetectorConfig ExperimentConfig::detector_config() const {
    DetectorConfig d;
    d.d_t = encoder.d_t;
    d.d_v = encoder.d_v;
    d.d = encoder.d;
    d.hidden = hidden;
    d.variant = variant;
    d.r_ca = r_ca;
    return d;
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const { return to_json(*this) == to_json(o); }

ExperimentConfig parse_config(const json& j) {
    validate(j, config_schema(), "");
    ExperimentConfig c;
    read(j, "run_id", c.run_id);
    read(j, "seeds", c.seeds);
    const json empty = json::object();
    const json& d = j.contains("data") ? j["data"] : empty;
    read(d, "train", c.data.train);
    read(d, "validation", c.data.validation);
    read(d, "test", c.data.test);
    read(d, "paired", c.data.paired);
    read(d, "max_text_tokens", c.data.max_text_tokens);
    read(d, "caption_limit", c.data.caption_limit);

    const json& s = j.contains("segmentation") ? j["segmentation"] : empty;
    if (s.contains("strategy")) c.segmentation.strategy = parse_segmentation_strategy(s["strategy"].get<std::string>());
    read(s, "k", c.segmentation.k);
    read(s, "l", c.segmentation.l);
    read(s, "min_tokens", c.segmentation.min_tokens);

    const json& e = j.contains("encoder") ? j["encoder"] : empty;
    read(e, "backend", c.encoder.backend);
    read(e, "d_t", c.encoder.d_t);
    read(e, "d_v", c.encoder.d_v);
    read(e, "d", c.encoder.d);
    read(e, "seed", c.encoder.seed);

    const json& g = j.contains("generator") ? j["generator"] : empty;
    read(g, "backend", c.generator.backend);
    read(g, "leak_strength", c.generator.leak_strength);
    read(g, "seed", c.generator.seed);

    const json& gr = j.contains("graph") ? j["graph"] : empty;
    read(gr, "parser", c.graph.parser);

    const json& t = j.contains("train") ? j["train"] : empty;
    read(t, "alpha1", c.train.alpha1);
    read(t, "alpha2", c.train.alpha2);
    read(t, "beta", c.train.beta);
    read(t, "update_step", c.train.update_step);
    read(t, "generation_step", c.train.generation_step);
    read(t, "iterations", c.train.iterations);
    read(t, "batch_size_detector", c.train.batch_size_detector);
    read(t, "batch_size_generator", c.train.batch_size_generator);
    read(t, "lr_encoder", c.train.lr_encoder);
    read(t, "lr_generator", c.train.lr_generator);
    read(t, "lr_other", c.train.lr_other);
    read(t, "weight_decay", c.train.weight_decay);
    read(t, "patience", c.train.patience);
    read(t, "aux_fit_iterations", c.train.aux_fit_iterations);
    read(t, "hidden", c.hidden);
    if (t.contains("variant")) c.variant = parse_detector_variant(t["variant"].get<std::string>());
    if (t.contains("r_ca")) {
        c.r_ca = t["r_ca"] == "attention_entropy" ? AttentionRegularizer::AttentionEntropy : AttentionRegularizer::None;
    }

    const json& ev = j.contains("evaluation") ? j["evaluation"] : empty;
    read(ev, "replacement_seeds", c.evaluation.replacement_seeds);
    read(ev, "split", c.evaluation.split);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
    return json{
        {"run_id", c.run_id},
        {"seeds", c.seeds},
        {"data",
         {{"train", c.data.train},
          {"validation", c.data.validation},
          {"test", c.data.test},
          {"paired", c.data.paired},
          {"max_text_tokens", c.data.max_text_tokens},
          {"caption_limit", c.data.caption_limit}}},
        {"segmentation",
         {{"strategy", std::string(to_string(c.segmentation.strategy))},
          {"k", c.segmentation.k},
          {"l", c.segmentation.l},
          {"min_tokens", c.segmentation.min_tokens}}},
        {"encoder",
         {{"backend", c.encoder.backend},
          {"d_t", c.encoder.d_t},
          {"d_v", c.encoder.d_v},
          {"d", c.encoder.d},
          {"seed", c.encoder.seed}}},
        {"generator",
         {{"backend", c.generator.backend},
          {"leak_strength", c.generator.leak_strength},
          {"seed", c.generator.seed}}},
        {"graph", {{"parser", c.graph.parser}}},
        {"train",
         {{"alpha1", c.train.alpha1},
          {"alpha2", c.train.alpha2},
          {"beta", c.train.beta},
          {"update_step", c.train.update_step},
          {"generation_step", c.train.generation_step},
          {"iterations", c.train.iterations},
          {"batch_size_detector", c.train.batch_size_detector},
          {"batch_size_generator", c.train.batch_size_generator},
          {"lr_encoder", c.train.lr_encoder},
          {"lr_generator", c.train.lr_generator},
          {"lr_other", c.train.lr_other},
          {"weight_decay", c.train.weight_decay},
          {"patience", c.train.patience},
          {"aux_fit_iterations", c.train.aux_fit_iterations},
          {"hidden", c.hidden},
          {"variant", std::string(to_string(c.variant))},
          {"r_ca", c.r_ca == AttentionRegularizer::AttentionEntropy ? "attention_entropy" : "none"}}},
        {"evaluation", {{"replacement_seeds", c.evaluation.replacement_seeds}, {"split", c.evaluation.split}}},
    };
}

}  // namespace retsimd
