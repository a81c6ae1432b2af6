// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#include "retsimd/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "retsimd/error.hpp"

namespace retsimd {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 400;
constexpr int kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;
constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(4) << v;
    return os.str();
}

struct Frame {
    double lo, hi;
    double y(double v) const {
        const double t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
        return kTop + (1.0 - t) * (kHeight - kTop - kBottom);
    }
};

void header(std::ostringstream& os, const std::string& title, const std::string& y_label, const Frame& f) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
       << "</text>\n";
    os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kHeight - kBottom
       << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double v = f.lo + (f.hi - f.lo) * i / 4.0;
        os << "<text x=\"" << kLeft - 6 << "\" y=\"" << fmt(f.y(v) + 4) << "\" text-anchor=\"end\">" << fmt(v)
           << "</text>\n";
    }
    os << "<text transform=\"translate(16," << kHeight / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
       << escape(y_label) << "</text>\n";
}

Frame frame_for(std::vector<double> values) {
    values.push_back(0.0);
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    double lo = *mn, hi = *mx;
    if (hi - lo < 1e-12) hi = lo + 1.0;
    const double pad = 0.05 * (hi - lo);
    return {lo < 0 ? lo - pad : lo, hi + pad};
}

json read_json(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw PipelineError("cannot read " + p.string());
    return json::parse(in);
}

std::vector<json> read_jsonl(const fs::path& p) {
    std::vector<json> out;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) out.push_back(json::parse(line));
    }
    return out;
}

// Seed directories of a run, or the run itself when it holds a result.json.
std::vector<fs::path> seed_dirs(const fs::path& run) {
    std::vector<fs::path> out;
    if (fs::exists(run / "result.json")) out.push_back(run);
    if (fs::is_directory(run)) {
        for (const auto& e : fs::directory_iterator(run)) {
            if (e.is_directory() && fs::exists(e.path() / "result.json")) out.push_back(e.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

std::pair<double, double> mean_std(const std::vector<double>& values) {
    if (values.empty()) return {0.0, 0.0};
    double m = 0.0;
    for (double v : values) m += v;
    m /= static_cast<double>(values.size());
    if (values.size() < 2) return {m, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return {m, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

std::string svg_bar_chart(const std::string& title, const std::vector<std::pair<std::string, double>>& bars,
                          const std::string& y_label) {
    std::vector<double> vals;
    for (const auto& b : bars) vals.push_back(b.second);
    const Frame f = frame_for(vals);
    std::ostringstream os;
    header(os, title, y_label, f);
    const double zero = f.y(0.0);
    os << "<line x1=\"" << kLeft << "\" y1=\"" << fmt(zero) << "\" x2=\"" << kWidth - kRight << "\" y2=\"" << fmt(zero)
       << "\" stroke=\"black\"/>\n";
    const double slot = bars.empty() ? 0.0 : static_cast<double>(kWidth - kLeft - kRight) / bars.size();
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const double x = kLeft + slot * i + slot * 0.15;
        const double y = f.y(bars[i].second);
        os << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(std::min(y, zero)) << "\" width=\"" << fmt(slot * 0.7)
           << "\" height=\"" << fmt(std::abs(zero - y)) << "\" fill=\"" << kPalette[i % 6] << "\"/>\n";
        os << "<text x=\"" << fmt(x + slot * 0.35) << "\" y=\"" << fmt(std::min(y, zero) - 4)
           << "\" text-anchor=\"middle\">" << fmt(bars[i].second) << "</text>\n";
        os << "<text x=\"" << fmt(x + slot * 0.35) << "\" y=\"" << kHeight - kBottom + 18
           << "\" text-anchor=\"middle\">" << escape(bars[i].first) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string svg_line_chart(const std::string& title, const std::vector<Series>& series, const std::string& x_label,
                           const std::string& y_label) {
    std::vector<double> ys, xs;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            xs.push_back(x);
            ys.push_back(y);
        }
    }
    const Frame f = frame_for(ys);
    double x_lo = xs.empty() ? 0.0 : *std::min_element(xs.begin(), xs.end());
    double x_hi = xs.empty() ? 1.0 : *std::max_element(xs.begin(), xs.end());
    if (x_hi - x_lo < 1e-12) x_hi = x_lo + 1.0;
    auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * (kWidth - kLeft - kRight); };
    std::ostringstream os;
    header(os, title, y_label, f);
    os << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << kWidth - kRight << "\" y2=\""
       << kHeight - kBottom << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << kLeft << "\" y=\"" << kHeight - kBottom + 16 << "\">" << fmt(x_lo) << "</text>\n";
    os << "<text x=\"" << kWidth - kRight << "\" y=\"" << kHeight - kBottom + 16 << "\" text-anchor=\"end\">"
       << fmt(x_hi) << "</text>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 20 << "\" text-anchor=\"middle\">" << escape(x_label)
       << "</text>\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        os << "<polyline fill=\"none\" stroke=\"" << kPalette[i % 6] << "\" stroke-width=\"2\" points=\"";
        for (const auto& [x, y] : series[i].points) os << fmt(px(x)) << ',' << fmt(f.y(y)) << ' ';
        os << "\"/>\n";
        os << "<text x=\"" << kWidth - kRight - 4 << "\" y=\"" << kTop + 14 * (i + 1) << "\" text-anchor=\"end\" fill=\""
           << kPalette[i % 6] << "\">" << escape(series[i].name) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void render_report(const std::vector<fs::path>& run_dirs, const fs::path& out_dir) {
    if (run_dirs.empty()) throw ContractError("report: no run directories given");
    fs::create_directories(out_dir);
    json summary = json::array();
    std::ofstream csv(out_dir / "summary.csv");
    csv << std::setprecision(10)
        << "run,seeds,test_accuracy_mean,test_accuracy_std,macro_f1_mean,macro_f1_std,best_val_mean\n";
    std::vector<Series> curves;
    std::map<std::string, std::vector<std::pair<double, double>>> sensitivity;
    std::vector<std::pair<std::string, double>> gap_bars;
    std::ofstream gaps_csv;

    for (const auto& run : run_dirs) {
        const auto seeds = seed_dirs(run);
        if (seeds.empty()) throw PipelineError("report: no result.json under " + run.string());
        std::vector<double> acc, f1, val;
        std::map<std::string, std::vector<double>> gap_values;
        for (const auto& sd : seeds) {
            const json r = read_json(sd / "result.json");
            acc.push_back(r.at("test").at("accuracy").get<double>());
            f1.push_back(r.at("test").at("macro_f1").get<double>());
            val.push_back(r.value("best_val_micro_f1", 0.0));
            Series s{run.filename().string() + "/" + sd.filename().string(), {}};
            if (fs::exists(sd / "metrics.jsonl")) {
                for (const auto& m : read_jsonl(sd / "metrics.jsonl")) {
                    s.points.emplace_back(m.at("iteration").get<double>(), m.at("val_micro_f1").get<double>());
                }
            }
            curves.push_back(std::move(s));
            if (fs::exists(sd / "contributions" / "contributions.json")) {
                const json c = read_json(sd / "contributions" / "contributions.json");
                const double full = c.at("variants").at("full").at("accuracy").get<double>();
                for (const auto& [name, v] : c.at("variants").items()) {
                    if (name != "full") gap_values[name].push_back(full - v.at("accuracy").get<double>());
                }
                for (const auto& [name, g] : c.at("gains_nats").items()) gap_values[name].push_back(g.get<double>());
            }
        }
        const auto [am, as] = mean_std(acc);
        const auto [fm, fs_] = mean_std(f1);
        const auto [vm, vs] = mean_std(val);
        (void)vs;
        const std::string name = run.filename().string();
        csv << name << ',' << seeds.size() << ',' << am << ',' << as << ',' << fm << ',' << fs_ << ',' << vm << '\n';
        json entry{{"run", name},
                   {"seeds", seeds.size()},
                   {"test_accuracy", {{"mean", am}, {"std", as}}},
                   {"macro_f1", {{"mean", fm}, {"std", fs_}}}};
        if (!gap_values.empty()) {
            if (!gaps_csv.is_open()) {
                gaps_csv.open(out_dir / "gaps.csv");
                gaps_csv << std::setprecision(10) << "run,quantity,mean,std\n";
            }
            for (const auto& [q, vals] : gap_values) {
                const auto [m, sd] = mean_std(vals);
                gaps_csv << name << ',' << q << ',' << m << ',' << sd << '\n';
                entry["gaps"][q] = {{"mean", m}, {"std", sd}};
                if (q == "text_only" || q == "image_only" || q == "text_replaced" || q == "image_replaced") {
                    gap_bars.emplace_back(run_dirs.size() > 1 ? name + ":" + q : q, m);
                }
            }
        }
        summary.push_back(entry);

        const fs::path cfg_path = fs::exists(run / "config.json") ? run / "config.json" : seeds.front() / "config.json";
        if (fs::exists(cfg_path)) {
            const json cfg = read_json(cfg_path);
            const json seg = cfg.value("segmentation", json::object());
            const std::string strategy = seg.value("strategy", std::string("fixed_number"));
            const double param = strategy == "fixed_length" ? seg.value("l", 10.0)
                                 : strategy == "punctuation" ? seg.value("min_tokens", 5.0)
                                                             : seg.value("k", 5.0);
            sensitivity[strategy].emplace_back(param, am);
        }
    }
    std::ofstream(out_dir / "summary.json") << summary.dump(2) << '\n';
    std::ofstream(out_dir / "curves.svg") << svg_line_chart("Validation Micro F1", curves, "iteration", "micro F1");
    if (!gap_bars.empty()) {
        std::ofstream(out_dir / "gaps.svg") << svg_bar_chart("Accuracy gap: full minus variant", gap_bars,
                                                             "accuracy gap");
    }
    std::size_t points = 0;
    for (const auto& [k, v] : sensitivity) points += v.size();
    if (run_dirs.size() > 1 && points > 1) {
        std::ofstream sens(out_dir / "sensitivity.csv");
        sens << std::setprecision(10) << "strategy,parameter,test_accuracy_mean\n";
        std::vector<Series> lines;
        for (auto& [strategy, pts] : sensitivity) {
            std::sort(pts.begin(), pts.end());
            for (const auto& [x, y] : pts) sens << strategy << ',' << x << ',' << y << '\n';
            lines.push_back({strategy, pts});
        }
        std::ofstream(out_dir / "sensitivity.svg") << svg_line_chart("Segmentation sensitivity", lines,
                                                                     "segmentation parameter", "test accuracy");
    }
}

}  // namespace retsimd
