#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "intero/errors.hpp"

namespace intero {

/// Fixed 9-significant-digit rendering used by every persisted number.
inline std::string format_number(double x) {
    if (x == 0.0) return "0"; // folds -0
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

/// Round-trips x through its persisted form so in-memory values equal parsed ones.
inline double quantize(double x) { return std::strtod(format_number(x).c_str(), nullptr); }

/// One decision step of a run. Field order is the CSV column order.
struct RunRecord {
    long long step = 0;   // global step across episodes
    int episode = 0;
    int t = 0;            // step within the episode
    int state = 0;        // external state at decision time
    int action = 0;
    double r_task = 0.0;
    double r_shaped = 0.0;
    std::vector<double> v; // internal state at decision time
    double c_h = 0.0;
    double margin = 0.0;
    double g = 0.0;
    double w_h = 0.0, w_a = 0.0, w_e = 0.0;
    bool shielded = false;
    bool abstained = false;
    double ig_ext = 0.0, ig_int = 0.0, r_e = 0.0;
    bool ev_perturbed = false, ev_change_point = false, ev_shift_window = false;
    double p_realized = 0.0; // predictive probability of the successor that occurred
    double p_top = 0.0;      // model's top predictive probability
    bool top_hit = false;    // the top-probability successor occurred
    double g_feat_boundary = 0.0, g_feat_entropy = 0.0, g_feat_pe = 0.0, g_feat_violation = 0.0;
    double tau_effective = 0.0;
    double action_cost = 0.0;
    bool shield_fault = false;
    int region = 0;
    std::vector<double> int_conf; // per-dimension top probability of the drift-outcome model
    std::vector<bool> int_hit;    // per-dimension: top drift outcome occurred

    /// Rounds every real field to its persisted precision.
    void quantize_all() {
        for (double* x : {&r_task, &r_shaped, &c_h, &margin, &g, &w_h, &w_a, &w_e, &ig_ext, &ig_int, &r_e, &p_realized,
                          &p_top, &g_feat_boundary, &g_feat_entropy, &g_feat_pe, &g_feat_violation, &tau_effective,
                          &action_cost}) {
            *x = quantize(*x);
        }
        for (double& x : v) x = quantize(x);
        for (double& x : int_conf) x = quantize(x);
    }

    /// Name of the first non-finite field, or empty.
    std::string first_non_finite() const {
        const std::pair<const char*, double> fields[] = {
            {"r_task", r_task}, {"r_shaped", r_shaped}, {"c_h", c_h}, {"margin", margin}, {"g", g}, {"w_h", w_h},
            {"w_a", w_a}, {"w_e", w_e}, {"ig_ext", ig_ext}, {"ig_int", ig_int}, {"r_e", r_e},
            {"p_realized", p_realized}, {"p_top", p_top}, {"tau_effective", tau_effective}};
        for (const auto& [name, x] : fields) {
            if (!std::isfinite(x)) return name;
        }
        for (double x : v) {
            if (!std::isfinite(x)) return "v";
        }
        return {};
    }
};

inline std::vector<std::string> record_header(const std::vector<std::string>& dim_names) {
    std::vector<std::string> h{"step", "episode", "t", "state", "action", "r_task", "r_shaped"};
    for (const auto& n : dim_names) h.push_back("v_" + n);
    for (const char* c : {"c_h", "margin", "g", "w_h", "w_a", "w_e", "shielded", "abstained", "ig_ext", "ig_int", "r_e",
                          "ev_perturbed", "ev_change_point", "ev_shift_window", "p_realized", "p_top", "top_hit",
                          "g_feat_boundary", "g_feat_entropy", "g_feat_pe", "g_feat_violation", "tau_effective",
                          "action_cost", "shield_fault", "region"}) {
        h.emplace_back(c);
    }
    for (const auto& n : dim_names) h.push_back("int_conf_" + n);
    for (const auto& n : dim_names) h.push_back("int_hit_" + n);
    return h;
}

inline void write_records_csv(std::ostream& out, const std::vector<RunRecord>& records,
                              const std::vector<std::string>& dim_names) {
    const auto header = record_header(dim_names);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    auto num = [](double x) { return format_number(x); };
    for (const auto& r : records) {
        out << r.step << ',' << r.episode << ',' << r.t << ',' << r.state << ',' << r.action << ',' << num(r.r_task)
            << ',' << num(r.r_shaped);
        for (double x : r.v) out << ',' << num(x);
        out << ',' << num(r.c_h) << ',' << num(r.margin) << ',' << num(r.g) << ',' << num(r.w_h) << ',' << num(r.w_a)
            << ',' << num(r.w_e) << ',' << int(r.shielded) << ',' << int(r.abstained) << ',' << num(r.ig_ext) << ','
            << num(r.ig_int) << ',' << num(r.r_e) << ',' << int(r.ev_perturbed) << ',' << int(r.ev_change_point) << ','
            << int(r.ev_shift_window) << ',' << num(r.p_realized) << ',' << num(r.p_top) << ',' << int(r.top_hit) << ','
            << num(r.g_feat_boundary) << ',' << num(r.g_feat_entropy) << ',' << num(r.g_feat_pe) << ','
            << num(r.g_feat_violation) << ',' << num(r.tau_effective) << ',' << num(r.action_cost) << ','
            << int(r.shield_fault) << ',' << r.region;
        for (double x : r.int_conf) out << ',' << num(x);
        for (bool b : r.int_hit) out << ',' << int(b);
        out << '\n';
    }
}

struct RecordTable {
    std::vector<std::string> dim_names;
    std::vector<RunRecord> records;
};

/// Parses a records.csv written by write_records_csv.
inline RecordTable read_records_csv(std::istream& in) {
    RecordTable table;
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("records.csv: empty file");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    for (const auto& h : header) {
        if (h.rfind("v_", 0) == 0) table.dim_names.push_back(h.substr(2));
    }
    if (header != record_header(table.dim_names)) throw ConfigError("records.csv: unexpected header");
    const std::size_t n = table.dim_names.size();

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != header.size()) {
            throw ConfigError("records.csv line " + std::to_string(line_no) + ": wrong column count");
        }
        std::size_t i = 0;
        auto d = [&] { return std::strtod(cells[i++].c_str(), nullptr); };
        auto ll = [&] { return std::strtoll(cells[i++].c_str(), nullptr, 10); };
        auto b = [&] { return cells[i++] == "1"; };
        RunRecord r;
        r.step = ll();
        r.episode = static_cast<int>(ll());
        r.t = static_cast<int>(ll());
        r.state = static_cast<int>(ll());
        r.action = static_cast<int>(ll());
        r.r_task = d();
        r.r_shaped = d();
        r.v.resize(n);
        for (auto& x : r.v) x = d();
        r.c_h = d();
        r.margin = d();
        r.g = d();
        r.w_h = d();
        r.w_a = d();
        r.w_e = d();
        r.shielded = b();
        r.abstained = b();
        r.ig_ext = d();
        r.ig_int = d();
        r.r_e = d();
        r.ev_perturbed = b();
        r.ev_change_point = b();
        r.ev_shift_window = b();
        r.p_realized = d();
        r.p_top = d();
        r.top_hit = b();
        r.g_feat_boundary = d();
        r.g_feat_entropy = d();
        r.g_feat_pe = d();
        r.g_feat_violation = d();
        r.tau_effective = d();
        r.action_cost = d();
        r.shield_fault = b();
        r.region = static_cast<int>(ll());
        r.int_conf.resize(n);
        for (auto& x : r.int_conf) x = d();
        r.int_hit.resize(n);
        for (std::size_t k = 0; k < n; ++k) r.int_hit[k] = b();
        table.records.push_back(std::move(r));
    }
    return table;
}

inline RecordTable read_records_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    return read_records_csv(in);
}

} // namespace intero
