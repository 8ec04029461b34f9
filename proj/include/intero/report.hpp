#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "intero/ablate.hpp"
#include "intero/errors.hpp"
#include "intero/metrics.hpp"
#include "intero/record.hpp"

namespace intero {

namespace svg {

inline std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return std::string(buf) == "-0.00" ? "0.00" : buf;
}

/// Linear map from data range to pixel range.
struct Axis {
    double d0, d1, p0, p1;
    double operator()(double x) const { return d1 == d0 ? 0.5 * (p0 + p1) : p0 + (x - d0) / (d1 - d0) * (p1 - p0); }
};

class Canvas {
public:
    Canvas(int width, int height) : w_(width), h_(height) {}

    void rect(double x, double y, double w, double h, const std::string& fill, const std::string& extra = "") {
        os_ << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(std::max(w, 0.0)) << "\" height=\""
            << fmt(std::max(h, 0.0)) << "\" fill=\"" << fill << '"' << (extra.empty() ? "" : " " + extra) << "/>\n";
    }

    void line(double x1, double y1, double x2, double y2, const std::string& stroke, double width = 1.0,
              const std::string& extra = "") {
        os_ << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x2) << "\" y2=\"" << fmt(y2)
            << "\" stroke=\"" << stroke << "\" stroke-width=\"" << fmt(width) << '"' << (extra.empty() ? "" : " " + extra)
            << "/>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke, double width = 1.0) {
        if (pts.empty()) return;
        os_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << fmt(width) << "\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) os_ << (i ? " " : "") << fmt(pts[i].first) << ',' << fmt(pts[i].second);
        os_ << "\"/>\n";
    }

    void text(double x, double y, const std::string& s, int size = 12, const std::string& anchor = "start") {
        os_ << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-size=\"" << size << "\" font-family=\"sans-serif\""
            << " text-anchor=\"" << anchor << "\">" << escape(s) << "</text>\n";
    }

    void raw(const std::string& s) { os_ << s; }

    std::string str() const {
        std::ostringstream out;
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\"" << h_ << "\" viewBox=\"0 0 "
            << w_ << ' ' << h_ << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
            << os_.str() << "</svg>\n";
        return out.str();
    }

private:
    static std::string escape(const std::string& s) {
        std::string o;
        for (char c : s) {
            switch (c) {
            case '<': o += "&lt;"; break;
            case '>': o += "&gt;"; break;
            case '&': o += "&amp;"; break;
            default: o += c;
            }
        }
        return o;
    }

    int w_, h_;
    std::ostringstream os_;
};

inline const char* color(std::size_t i) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    return palette[i % 6];
}

} // namespace svg

struct RunView {
    std::filesystem::path dir;
    nlohmann::json config;
    RecordTable table;
    std::map<std::string, double> metrics;
};

inline RunView load_run(const std::filesystem::path& dir) {
    RunView v;
    v.dir = dir;
    std::ifstream in(dir / "config.json");
    if (!in) throw ConfigError("cannot open " + (dir / "config.json").string());
    v.config = nlohmann::json::parse(in);
    v.table = read_records_csv((dir / "records.csv").string());
    v.metrics = read_metrics_json((dir / "metrics.json").string());
    if (v.table.records.empty()) throw ConfigError((dir / "records.csv").string() + " has no records");
    return v;
}

namespace detail {

/// At most ~max_points evenly strided record indices (always including the last).
inline std::vector<std::size_t> stride_indices(std::size_t n, std::size_t max_points = 1500) {
    std::vector<std::size_t> idx;
    const std::size_t stride = std::max<std::size_t>(1, (n + max_points - 1) / max_points);
    for (std::size_t i = 0; i < n; i += stride) idx.push_back(i);
    if (!idx.empty() && idx.back() != n - 1) idx.push_back(n - 1);
    return idx;
}

inline std::vector<double> json_vec(const nlohmann::json& j) { return j.get<std::vector<double>>(); }

} // namespace detail

/// Internal-state trajectories with soft (green) and hard (red, outside) bands and event markers.
inline std::string plot_v_trajectory(const RunView& run) {
    const auto& recs = run.table.records;
    const auto& names = run.table.dim_names;
    const auto& bj = run.config["bounds"];
    const auto soft_lo = detail::json_vec(bj["soft_lo"]), soft_hi = detail::json_vec(bj["soft_hi"]);
    const auto hard_lo = detail::json_vec(bj["hard_lo"]), hard_hi = detail::json_vec(bj["hard_hi"]);
    const int panel_h = 180, top = 30, left = 60, width = 900;
    svg::Canvas c(width + left + 20, top + static_cast<int>(names.size()) * (panel_h + 30) + 20);
    c.text(left, 18, "Internal state trajectories (" + run.dir.filename().string() + ")", 14);
    const svg::Axis x{0.0, static_cast<double>(recs.size() - 1), static_cast<double>(left), static_cast<double>(left + width)};
    const auto idx = detail::stride_indices(recs.size());
    for (std::size_t d = 0; d < names.size(); ++d) {
        const double y0 = top + static_cast<double>(d) * (panel_h + 30);
        const double lo = hard_lo[d] - 0.25 * (hard_hi[d] - hard_lo[d]);
        const double hi = hard_hi[d] + 0.25 * (hard_hi[d] - hard_lo[d]);
        const svg::Axis y{lo, hi, y0 + panel_h, y0};
        c.rect(left, y(hi), width, y(hard_hi[d]) - y(hi), "#f4cccc", "class=\"hard-band\"");
        c.rect(left, y(hard_lo[d]), width, y(lo) - y(hard_lo[d]), "#f4cccc", "class=\"hard-band\"");
        c.rect(left, y(soft_hi[d]), width, y(soft_lo[d]) - y(soft_hi[d]), "#d9ead3", "class=\"soft-band\"");
        for (std::size_t i = 0; i < recs.size(); ++i) {
            const auto& r = recs[i];
            const bool onset = r.ev_perturbed && (i == 0 || !recs[i - 1].ev_perturbed);
            if (onset) c.line(x(double(i)), y0, x(double(i)), y0 + panel_h, "#ff7f0e", 0.6, "class=\"perturbation\"");
            if (r.ev_change_point) c.line(x(double(i)), y0, x(double(i)), y0 + panel_h, "#9467bd", 1.2, "class=\"change-point\"");
        }
        std::vector<std::pair<double, double>> pts;
        for (auto i : idx) pts.emplace_back(x(double(i)), y(recs[i].v[d]));
        c.polyline(pts, svg::color(0), 1.0);
        c.rect(left, y0, width, panel_h, "none", "stroke=\"#444\"");
        c.text(left - 6, y(hard_hi[d]) + 4, format_number(hard_hi[d]), 10, "end");
        c.text(left - 6, y(hard_lo[d]) + 4, format_number(hard_lo[d]), 10, "end");
        c.text(left + 4, y0 + 14, names[d], 12);
    }
    c.text(left + width, top + static_cast<double>(names.size()) * (panel_h + 30) + 5, "step", 11, "end");
    return c.str();
}

/// Allostatic signal g (top) and arbitration weights (bottom) over time.
inline std::string plot_g_weights(const RunView& run) {
    const auto& recs = run.table.records;
    const int left = 60, width = 900, panel_h = 180, top = 30;
    svg::Canvas c(width + left + 120, top + 2 * (panel_h + 30) + 10);
    c.text(left, 18, "Allostatic signal and arbitration weights (" + run.dir.filename().string() + ")", 14);
    const svg::Axis x{0.0, static_cast<double>(recs.size() - 1), static_cast<double>(left), static_cast<double>(left + width)};
    const auto idx = detail::stride_indices(recs.size());
    double gmax = 0.0;
    for (const auto& r : recs) gmax = std::max(gmax, r.g);
    if (gmax <= 0.0) gmax = 1.0;
    {
        const svg::Axis y{0.0, gmax, static_cast<double>(top + panel_h), static_cast<double>(top)};
        std::vector<std::pair<double, double>> pts;
        for (auto i : idx) pts.emplace_back(x(double(i)), y(recs[i].g));
        c.polyline(pts, svg::color(1));
        c.rect(left, top, width, panel_h, "none", "stroke=\"#444\"");
        c.text(left - 6, top + 10, format_number(gmax), 10, "end");
        c.text(left - 6, top + panel_h, "0", 10, "end");
        c.text(left + width + 8, top + 14, "g", 12);
    }
    {
        const double y0 = top + panel_h + 30;
        const svg::Axis y{0.0, 1.0, y0 + panel_h, y0};
        const char* labels[] = {"w_h", "w_a", "w_e"};
        for (int k = 0; k < 3; ++k) {
            std::vector<std::pair<double, double>> pts;
            for (auto i : idx) {
                const auto& r = recs[i];
                pts.emplace_back(x(double(i)), y(k == 0 ? r.w_h : k == 1 ? r.w_a : r.w_e));
            }
            c.polyline(pts, svg::color(static_cast<std::size_t>(k) + 2));
            c.text(left + width + 8, y0 + 14 + 16 * k, labels[k], 12);
        }
        c.rect(left, y0, width, panel_h, "none", "stroke=\"#444\"");
        c.text(left - 6, y0 + 10, "1", 10, "end");
        c.text(left - 6, y0 + panel_h, "0", 10, "end");
    }
    return c.str();
}

/// Reliability diagram of the external-transition model. Each bar carries its bin statistics
/// as data-* attributes (identical to the calib_bin_* entries of metrics.json).
inline std::string plot_reliability(const RunView& run, int n_bins) {
    const int left = 60, top = 40, size = 400;
    svg::Canvas c(left + size + 40, top + size + 50);
    c.text(left, 20, "Reliability diagram: top-probability successor occurred", 14);
    const svg::Axis x{0.0, 1.0, static_cast<double>(left), static_cast<double>(left + size)};
    const svg::Axis y{0.0, 1.0, static_cast<double>(top + size), static_cast<double>(top)};
    c.rect(left, top, size, size, "none", "stroke=\"#444\"");
    c.line(x(0), y(0), x(1), y(1), "#999", 1.0, "stroke-dasharray=\"4 3\"");
    if (const auto cal = calibration(run.table.records, n_bins)) {
        for (std::size_t k = 0; k < cal->bins.size(); ++k) {
            const auto& b = cal->bins[k];
            const double x0 = x(double(k) / n_bins), x1 = x(double(k + 1) / n_bins);
            const std::string attrs = "class=\"bin\" data-bin=\"" + std::to_string(k) + "\" data-count=\"" +
                                      std::to_string(b.count) + "\" data-confidence=\"" + format_number(b.confidence) +
                                      "\" data-accuracy=\"" + format_number(b.accuracy) + "\"";
            c.rect(x0 + 1, y(b.accuracy), x1 - x0 - 2, y(0) - y(b.accuracy), "#1f77b4", attrs);
        }
        c.text(left + 8, top + 16, "ECE " + format_number(cal->ece) + "  MCE " + format_number(cal->mce), 12);
    }
    c.text(left + size / 2.0, top + size + 32, "confidence", 12, "middle");
    c.text(left - 34, top + size / 2.0, "accuracy", 12, "middle");
    return c.str();
}

/// Mean safety-adjusted return per (env, mask), with +-1 std whiskers.
inline std::string plot_ablation(const AblationSummary& s) {
    const int left = 70, top = 40, bar = 28, gap = 10, height = 300;
    const int width = std::max(200, static_cast<int>(s.rows.size()) * (bar + gap) + 20);
    svg::Canvas c(left + width + 20, top + height + 90);
    c.text(left, 20, "Safety-adjusted return by ablation mask", 14);
    const std::string key = "safety_adjusted_return";
    double lo = 0.0, hi = 0.0;
    for (const auto& row : s.rows) {
        const auto it = row.cells.find(key);
        if (it == row.cells.end() || !it->second.mean) continue;
        lo = std::min(lo, *it->second.mean - *it->second.std);
        hi = std::max(hi, *it->second.mean + *it->second.std);
    }
    if (hi == lo) hi = lo + 1.0;
    const svg::Axis y{lo, hi, static_cast<double>(top + height), static_cast<double>(top)};
    c.line(left, y(0), left + width, y(0), "#444");
    for (std::size_t i = 0; i < s.rows.size(); ++i) {
        const auto& row = s.rows[i];
        const double x0 = left + 10 + static_cast<double>(i) * (bar + gap);
        const auto it = row.cells.find(key);
        if (it != row.cells.end() && it->second.mean) {
            const double m = *it->second.mean, sd = *it->second.std;
            c.rect(x0, std::min(y(m), y(0)), bar, std::abs(y(m) - y(0)), row.mask == "HAE" ? "#d62728" : "#1f77b4",
                   "data-env=\"" + row.env + "\" data-mask=\"" + row.mask + "\" data-mean=\"" + format_number(m) + "\"");
            c.line(x0 + bar / 2.0, y(m - sd), x0 + bar / 2.0, y(m + sd), "#222");
        }
        c.raw("<text x=\"" + svg::fmt(x0 + bar / 2.0) + "\" y=\"" + svg::fmt(top + height + 12) +
              "\" font-size=\"10\" font-family=\"monospace\" text-anchor=\"end\" transform=\"rotate(-60 " +
              svg::fmt(x0 + bar / 2.0) + ' ' + svg::fmt(top + height + 12) + ")\">" + row.env + ' ' + row.mask + "</text>\n");
    }
    c.text(left - 6, y(hi) + 4, format_number(hi), 10, "end");
    c.text(left - 6, y(lo) + 4, format_number(lo), 10, "end");
    return c.str();
}

namespace detail {

inline std::string cell(const AblationSummary& s, const SummaryRow& row, const std::string& metric) {
    const auto it = row.cells.find(metric);
    if (it == row.cells.end() || !it->second.mean) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g ± %.2g", *it->second.mean, *it->second.std);
    (void)s;
    return buf;
}

} // namespace detail

inline std::string plot_file(const std::string& name) { return "plots/" + name; }

/// Generates report.md and plots/ inside `root`. Returns the report path.
inline std::filesystem::path write_report(const std::filesystem::path& root) {
    const auto runs = collect_runs(root);
    std::vector<const AblationRun*> ok;
    for (const auto& r : runs) {
        if (r.ok) ok.push_back(&r);
    }
    if (ok.empty()) throw ConfigError("report: no completed runs under " + root.string());

    const AblationSummary summary = summarize_runs(runs);
    const AblationRun* rep = ok.front();
    for (const auto* r : ok) {
        if (r->mask == "HAE") {
            rep = r;
            break;
        }
    }
    const RunView view = load_run(rep->dir);
    const int n_bins = view.config["metrics"]["n_bins"].get<int>();

    std::filesystem::create_directories(root / "plots");
    auto write = [&](const std::string& name, const std::string& body) {
        std::ofstream f(root / plot_file(name), std::ios::binary);
        f << body;
    };
    write("v_trajectory.svg", plot_v_trajectory(view));
    write("g_weights.svg", plot_g_weights(view));
    write("reliability.svg", plot_reliability(view, n_bins));
    write("ablation.svg", plot_ablation(summary));

    std::ostringstream md;
    md << "# Interoceptive agent report\n\n";
    md << "Runs: " << runs.size() << " (" << ok.size() << " completed). Representative run for trajectory plots: `"
       << std::filesystem::relative(rep->dir, root).generic_string() << "`.\n\n";
    md << "Calibration target: for each step the model's top-probability successor is the prediction; "
          "confidence is that probability and a hit means it occurred. ECE/MCE use "
       << n_bins << " equal-width confidence bins. Variances use the n divisor.\n\n";

    md << "## Metrics (mean ± std over seeds)\n\n";
    const std::vector<std::string> cols{"violation_rate", "recovery_time_mean", "internal_variance_" + view.table.dim_names.front(),
                                        "ece", "drift_ece", "abstention_recall", "abstention_precision", "ig_per_cost",
                                        "coverage", "total_return", "safety_adjusted_return", "shield_rate"};
    md << "| env | mask | runs |";
    for (const auto& c : cols) md << ' ' << c << " |";
    md << "\n|---|---|---|";
    for (std::size_t i = 0; i < cols.size(); ++i) md << "---|";
    md << '\n';
    for (const auto& row : summary.rows) {
        md << "| " << row.env << " | `" << row.mask << "` | " << row.ok << (row.failed ? " (+" + std::to_string(row.failed) + " failed)" : "") << " |";
        for (const auto& c : cols) md << ' ' << detail::cell(summary, row, c) << " |";
        md << '\n';
    }

    md << "\n## Operational criteria\n\n";
    md << "| criterion | metric | value (mean over runs per row) |\n|---|---|---|\n";
    for (const auto& row : summary.rows) {
        const std::string id = row.env + " `" + row.mask + "`";
        md << "| internal state estimation (" << id << ") | drift-model ECE | " << detail::cell(summary, row, "drift_ece") << " |\n";
        md << "| viability regulation (" << id << ") | violation rate / recovery time | "
           << detail::cell(summary, row, "violation_rate") << " / " << detail::cell(summary, row, "recovery_time_mean") << " |\n";
        md << "| uncertainty-sensitive modulation (" << id << ") | corr(g, tau_effective) | "
           << detail::cell(summary, row, "g_tau_correlation") << " |\n";
        md << "| internally modulated goal adjustment (" << id << ") | abstention rate / shield rate | "
           << detail::cell(summary, row, "abstention_rate") << " / " << detail::cell(summary, row, "shield_rate") << " |\n";
    }

    md << "\n## Integration: full mask vs reduced masks (safety-adjusted return)\n\n";
    bool any_pairs = false;
    std::map<std::string, std::vector<std::string>> failures;
    md << "| env | reduced mask | full mean | reduced mean | seed-paired win fraction | pairs | full dominates |\n"
          "|---|---|---|---|---|---|---|\n";
    for (const auto& d : summary.dominance) {
        if (d.pairs == 0) {
            md << "| " << d.env << " | `" << d.reduced_mask << "` | NA | NA | NA | 0 | NA |\n";
            continue;
        }
        any_pairs = true;
        md << "| " << d.env << " | `" << d.reduced_mask << "` | " << format_number(d.full_mean) << " | "
           << format_number(d.reduced_mean) << " | " << format_number(d.win_fraction) << " | " << d.pairs << " | "
           << (d.dominates ? "yes" : "**no**") << " |\n";
        if (!d.dominates) failures[d.env].push_back(d.reduced_mask);
    }
    md << '\n';
    if (!any_pairs) {
        md << "No seed-paired full/reduced comparisons are available in these runs (run `intero ablate` to produce them).\n";
    } else {
        std::vector<std::string> envs;
        for (const auto& d : summary.dominance) {
            if (d.pairs > 0 && std::find(envs.begin(), envs.end(), d.env) == envs.end()) envs.push_back(d.env);
        }
        for (const auto& env : envs) {
            const auto it = failures.find(env);
            if (it == failures.end()) {
                md << "- **" << env << "**: the full architecture's mean safety-adjusted return exceeds every reduced variant.\n";
            } else {
                md << "- **" << env << "**: dominance FAILS against ";
                for (std::size_t i = 0; i < it->second.size(); ++i) md << (i ? ", " : "") << '`' << it->second[i] << '`';
                md << ". The integration hypothesis is not supported against these variants on this configuration.\n";
            }
        }
    }

    md << "\n## Shield activity\n\nThe shield is active in every variant, so shield rates are reported rather than ablated:\n\n";
    for (const auto& row : summary.rows) {
        md << "- " << row.env << " `" << row.mask << "`: shield rate " << detail::cell(summary, row, "shield_rate") << '\n';
    }

    md << "\n## Plots\n\n";
    for (const char* p : {"v_trajectory.svg", "g_weights.svg", "reliability.svg", "ablation.svg"}) {
        md << "- [" << p << "](" << plot_file(p) << ")\n";
    }

    const auto path = root / "report.md";
    std::ofstream f(path, std::ios::binary);
    f << md.str();
    return path;
}

} // namespace intero
