// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

// retsimd: command-line driver for ingestion, synthetic data, training,
// generation, evaluation, the modality-contribution protocol and reports.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "retsimd/error.hpp"
#include "retsimd/pipeline.hpp"
#include "retsimd/report.hpp"
#include "retsimd/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace retsimd;

namespace {

constexpr int kUsageExit = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        const auto dots = part.find("..");
        try {
            if (dots == std::string::npos) {
                out.push_back(std::stoull(part));
            } else {
                const auto lo = std::stoull(part.substr(0, dots)), hi = std::stoull(part.substr(dots + 2));
                if (hi < lo) throw UsageError("seed range '" + part + "' is empty");
                for (auto s = lo; s <= hi; ++s) out.push_back(s);
            }
        } catch (const std::logic_error&) {
            throw UsageError("cannot parse seeds '" + text + "' (use N, A..B or a comma list)");
        }
    }
    if (out.empty()) throw UsageError("no seeds given");
    return out;
}

void write_json(const fs::path& p, const json& j) {
    fs::create_directories(p.parent_path());
    std::ofstream(p) << j.dump(2) << '\n';
}

// Data paths in a config file are relative to the file's directory.
ExperimentConfig read_config(const fs::path& path) {
    ExperimentConfig c = load_config(path);
    const fs::path base = path.parent_path();
    for (std::string* p : {&c.data.train, &c.data.validation, &c.data.test, &c.data.paired}) {
        if (!p->empty() && fs::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
    }
    return c;
}

fs::path run_root(const ExperimentConfig& c, const std::string& runs_dir) { return fs::path(runs_dir) / c.run_id; }

std::vector<fs::path> seed_dirs(const fs::path& run) {
    std::vector<fs::path> out;
    if (fs::exists(run / "result.json")) out.push_back(run);
    if (fs::is_directory(run)) {
        for (const auto& e : fs::directory_iterator(run)) {
            if (e.is_directory() && fs::exists(e.path() / "result.json")) out.push_back(e.path());
        }
    }
    std::sort(out.begin(), out.end());
    if (out.empty()) throw PipelineError("no finished runs under " + run.string() + " (run `train` first)");
    return out;
}

const Dataset& split_of(const ExperimentData& d, const std::string& split) {
    const Dataset& ds = split == "train" ? d.train : split == "validation" ? d.validation : d.test;
    if (ds.samples.empty()) throw ConfigError("the config names no data for split '" + split + "'");
    return ds;
}

Checkpoint best_checkpoint(const fs::path& seed_dir) {
    std::ifstream in(seed_dir / "result.json");
    const json r = json::parse(in);
    return load_checkpoint(seed_dir / r.at("best_checkpoint").get<std::string>());
}

int cmd_ingest(const std::string& config_path, const std::vector<std::string>& files) {
    json out = json::array();
    auto describe = [&](const Dataset& d, const std::string& path) {
        json h = json::object();
        for (const auto& [label, count] : d.class_histogram()) h[std::to_string(label)] = count;
        out.push_back({{"path", path},
                       {"split", to_string(d.split)},
                       {"samples", d.size()},
                       {"class_histogram", h},
                       {"missing_images", d.missing_images}});
    };
    if (!config_path.empty()) {
        const ExperimentConfig c = read_config(config_path);
        const ExperimentData d = load_experiment_data(c, c.seeds.front());
        if (!d.train.samples.empty()) describe(d.train, c.data.train);
        if (!d.validation.samples.empty()) describe(d.validation, c.data.validation);
        if (!d.test.samples.empty()) describe(d.test, c.data.test);
        if (!d.paired.pairs.empty()) out.push_back({{"path", c.data.paired}, {"pairs", d.paired.pairs.size()}});
    }
    for (const auto& f : files) describe(load_dataset(f, Split::Train), f);
    if (out.empty()) throw UsageError("ingest needs --config or --data");
    std::cout << out.dump(2) << '\n';
    return 0;
}

int cmd_synth(const fs::path& out_dir, SyntheticSpec spec, std::size_t n_val, std::size_t n_test, std::size_t n_paired,
              std::uint64_t seed) {
    spec.validate();
    const Dataset train = synth_dataset(spec, seed, Split::Train);
    SyntheticSpec small = spec;
    small.n_samples = n_val;
    const Dataset val = synth_dataset(small, seed + 1000, Split::Validation);
    small.n_samples = n_test;
    const Dataset test = synth_dataset(small, seed + 2000, Split::Test);
    const PairedImageTextDataset paired = synth_paired(n_paired, spec, seed + 3000);

    ExperimentConfig c;
    c.run_id = "synthetic";
    c.data.train = write_dataset(out_dir, train).filename().string();
    c.data.validation = write_dataset(out_dir, val).filename().string();
    c.data.test = write_dataset(out_dir, test).filename().string();
    c.data.paired = write_paired(out_dir, paired).filename().string();
    c.generator.leak_strength = spec.leak_strength;
    json snapshot = to_json(spec);
    snapshot["seed"] = seed;
    snapshot["n_validation"] = n_val;
    snapshot["n_test"] = n_test;
    snapshot["n_paired"] = n_paired;
    write_json(out_dir / "synth_spec.json", snapshot);
    write_json(out_dir / "config.json", to_json(c));
    std::cout << json{{"out", out_dir.string()}, {"config", (out_dir / "config.json").string()}}.dump() << '\n';
    return 0;
}

json metrics_json(const ClassificationMetrics& m) { return to_json(m); }

int cmd_train(const fs::path& config_path, const std::string& seeds_text, const std::string& runs_dir,
              const std::string& resume) {
    ExperimentConfig c = read_config(config_path);
    if (!seeds_text.empty()) c.seeds = parse_seeds(seeds_text);
    if (!resume.empty() && c.seeds.size() != 1) throw UsageError("--resume works with a single seed");
    const fs::path root = run_root(c, runs_dir);
    write_json(root / "config.json", to_json(c));

    std::vector<double> acc, f1;
    json per_seed = json::array();
    for (std::uint64_t seed : c.seeds) {
        const fs::path dir = root / ("seed_" + std::to_string(seed));
        write_json(dir / "config.json", to_json(c));
        const ExperimentData data = load_experiment_data(c, seed);
        std::optional<Checkpoint> from;
        if (!resume.empty()) from = load_checkpoint(resume);
        const RunOutcome o = run_experiment(c, data, seed, dir, false, {}, from ? &*from : nullptr);
        const TrainState& st = o.training.state;
        json r{{"seed", seed},
               {"test", metrics_json(o.test_metrics)},
               {"best_checkpoint", "ckpt_" + std::to_string(o.training.best.iteration)},
               {"best_iteration", o.training.best.iteration},
               {"best_val_micro_f1", st.best_val_micro_f1},
               {"iterations_run", st.iteration},
               {"stopped_early", st.stopped_early},
               {"aborted", st.aborted},
               {"abort_reason", st.abort_reason},
               {"regeneration_iterations", st.regeneration_iterations},
               {"generator_update_iterations", st.generator_update_iterations},
               {"loss_history", st.loss_history}};
        // The best checkpoint may predate this process (resume); make sure it is on disk.
        if (!fs::exists(dir / r["best_checkpoint"].get<std::string>())) {
            save_checkpoint(dir / r["best_checkpoint"].get<std::string>(), o.training.best);
        }
        write_json(dir / "result.json", r);
        acc.push_back(o.test_metrics.accuracy);
        f1.push_back(o.test_metrics.macro_f1);
        per_seed.push_back({{"seed", seed}, {"accuracy", o.test_metrics.accuracy}, {"macro_f1", o.test_metrics.macro_f1}});
        std::cerr << "seed " << seed << ": test accuracy " << o.test_metrics.accuracy
                  << (st.aborted ? " (aborted: " + st.abort_reason + ")" : "") << '\n';
    }
    const auto [am, as] = mean_std(acc);
    const auto [fm, fs_] = mean_std(f1);
    const json agg{{"run_id", c.run_id},
                   {"seeds", c.seeds},
                   {"test_accuracy", {{"mean", am}, {"std", as}}},
                   {"macro_f1", {{"mean", fm}, {"std", fs_}}},
                   {"per_seed", per_seed}};
    write_json(root / "aggregate.json", agg);
    std::ofstream csv(root / "aggregate.csv");
    csv << std::setprecision(10) << "metric,mean,std\naccuracy," << am << ',' << as << "\nmacro_f1," << fm << ',' << fs_
        << '\n';
    std::cout << agg.dump(2) << '\n';
    return 0;
}

ExperimentConfig config_for_run(const std::string& config_path, const fs::path& run) {
    if (!config_path.empty()) return read_config(config_path);
    if (!fs::exists(run / "config.json")) throw UsageError("no --config given and " + run.string() + " has no config.json");
    return parse_config(json::parse(std::ifstream(run / "config.json")));
}

int cmd_generate(const std::string& config_path, const std::string& run, const std::string& split) {
    const ExperimentConfig c = config_for_run(config_path, run.empty() ? fs::path(".") : fs::path(run));
    if (c.variant == DetectorVariant::NoAugmentation) throw ConfigError("variant no_augmentation has no generator");
    const ExperimentData data = load_experiment_data(c, c.seeds.front());
    const Dataset& ds = split_of(data, split);
    auto comp = make_components(c);
    ParameterSet theta = make_detector_params(c.detector_config(), c.seeds.front());
    fs::path out = run.empty() ? fs::path("generated") / c.run_id : fs::path(run);
    if (!run.empty()) {
        const Checkpoint ckpt = best_checkpoint(seed_dirs(run).front());
        theta = ckpt.detector_params;
        if (auto* g = dynamic_cast<TrainableGenerator*>(comp->generator.get())) g->params() = ckpt.generator_params;
    }
    const fs::path cache_root = cache_root_from_env().value_or(out / "cache");
    FeatureCache cache(c.segmentation.k, ds.name.empty() ? split : ds.name, cache_root);
    const ImagePathway pathway = [&](const Image& img) {
        return project_shared(comp->encoder->encode_image(img), Modality::Image, theta);
    };
    regenerate({&ds}, comp->pipeline, *comp->generator, pathway, cache, 1);
    write_json(out / "generate_config.json", to_json(c));
    std::cout << json{{"cache", cache_root.string()}, {"samples", ds.size()}}.dump() << '\n';
    return 0;
}

int cmd_evaluate(const std::string& config_path, const fs::path& run, bool ablate) {
    const ExperimentConfig c = config_for_run(config_path, run);
    json out = json::array();
    for (const auto& dir : seed_dirs(run)) {
        const std::uint64_t seed = json::parse(std::ifstream(dir / "result.json")).value("seed", c.seeds.front());
        const ExperimentData data = load_experiment_data(c, seed);
        const Dataset& ds = split_of(data, c.evaluation.split);
        const CheckpointScore s = evaluate_checkpoint(c, best_checkpoint(dir), ds, ablate);
        if (ablate) {
            write_report(dir / "contributions", *s.contributions);
            write_json(dir / "contributions" / "config.json", to_json(c));
            out.push_back({{"run", dir.string()}, {"report", to_json(*s.contributions)}});
        } else {
            json m = metrics_json(s.metrics);
            m["split"] = c.evaluation.split;
            write_json(dir / "evaluation.json", m);
            write_json(dir / "evaluation_config.json", to_json(c));
            out.push_back({{"run", dir.string()}, {"metrics", m}});
        }
    }
    std::cout << out.dump(2) << '\n';
    return 0;
}

int cmd_report(const std::vector<std::string>& runs, const std::string& out) {
    std::vector<fs::path> dirs(runs.begin(), runs.end());
    const fs::path out_dir = out.empty() ? dirs.front() / "report" : fs::path(out);
    render_report(dirs, out_dir);
    std::cout << json{{"report", out_dir.string()}}.dump() << '\n';
    return 0;
}

void print_error(const char* kind, const std::string& message) {
    std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"retsimd: multimodal misinformation detection with text-to-image augmentation"};
    app.require_subcommand(1);

    std::string config, runs_dir = "runs", seeds, resume, run, split = "test", out;
    std::vector<std::string> data_files, report_runs;

    auto* ingest = app.add_subcommand("ingest", "Validate datasets and print a summary");
    ingest->add_option("--config", config, "Experiment config (JSON)");
    ingest->add_option("--data", data_files, "JSONL dataset file(s)");

    SyntheticSpec spec;
    std::string placement = "text";
    std::size_t n_val = 100, n_test = 100, n_paired = 64;
    std::uint64_t synth_seed = 1;
    auto* synth = app.add_subcommand("synth", "Write a synthetic dataset and a starter config");
    synth->add_option("--out", out, "Output directory")->required();
    synth->add_option("--n", spec.n_samples, "Training samples")->capture_default_str();
    synth->add_option("--n-validation", n_val, "Validation samples")->capture_default_str();
    synth->add_option("--n-test", n_test, "Test samples")->capture_default_str();
    synth->add_option("--n-paired", n_paired, "Caption-image pairs")->capture_default_str();
    synth->add_option("--vocab", spec.vocab_size, "Noise vocabulary size")->capture_default_str();
    synth->add_option("--placement", placement, "Label signal placement: text, image or both")->capture_default_str();
    synth->add_option("--margin", spec.margin, "Separability margin (> 0)")->capture_default_str();
    synth->add_option("--leak", spec.leak_strength, "MockGenerator leak strength")->capture_default_str();
    synth->add_option("--text-length", spec.text_length, "Noise words per post")->capture_default_str();
    synth->add_option("--seed", synth_seed, "Seed")->capture_default_str();

    auto* train_cmd = app.add_subcommand("train", "Alternating training; one run directory per seed");
    train_cmd->add_option("--config", config, "Experiment config (JSON)")->required();
    train_cmd->add_option("--seed", seeds, "Seeds: N, A..B or a comma list (default: config seeds)");
    train_cmd->add_option("--runs-dir", runs_dir, "Parent of run directories")->capture_default_str();
    train_cmd->add_option("--resume", resume, "Checkpoint to resume from");

    auto* gen = app.add_subcommand("generate", "One-off generation pass into the feature cache");
    gen->add_option("--config", config, "Experiment config (JSON)");
    gen->add_option("--run", run, "Finished run whose best checkpoint drives the generator");
    gen->add_option("--split", split, "train, validation or test")->capture_default_str();

    auto* eval = app.add_subcommand("evaluate", "Score the best checkpoint of each seed");
    eval->add_option("--config", config, "Experiment config (default: the run's snapshot)");
    eval->add_option("--run", run, "Run directory")->required();

    auto* ablate = app.add_subcommand("ablate", "Modality-contribution report (five variants, information gains)");
    ablate->add_option("--config", config, "Experiment config (default: the run's snapshot)");
    ablate->add_option("--run", run, "Run directory")->required();

    auto* report = app.add_subcommand("report", "Tables and SVG plots from run directories");
    report->add_option("--run", report_runs, "Run directory (repeatable)")->required();
    report->add_option("--out", out, "Output directory (default: <first run>/report)");

    if (argc <= 1) {
        std::cerr << app.help();
        return kUsageExit;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsageExit;
    }

    try {
        if (*ingest) return cmd_ingest(config, data_files);
        if (*synth) {
            spec.placement = parse_placement(placement);
            return cmd_synth(out, spec, n_val, n_test, n_paired, synth_seed);
        }
        if (*train_cmd) return cmd_train(config, seeds, runs_dir, resume);
        if (*gen) return cmd_generate(config, run, split);
        if (*eval) return cmd_evaluate(config, run, false);
        if (*ablate) return cmd_evaluate(config, run, true);
        if (*report) return cmd_report(report_runs, out);
    } catch (const UsageError& e) {
        print_error("usage", e.what());
        return kUsageExit;
    } catch (const ConfigError& e) {
        print_error("config", e.what());
        return kUsageExit;
    } catch (const IngestionError& e) {
        print_error("ingestion", e.what());
        return 1;
    } catch (const ValidationError& e) {
        print_error("validation", e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error("runtime", e.what());
        return 1;
    }
    return kUsageExit;
}
