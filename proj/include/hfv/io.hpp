// CSV ingestion and emission, flat key=value configuration, and JSON report
// serialization for the command-line front end.
#pragma once

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hfv/jump_tests.hpp"
#include "hfv/mc.hpp"
#include "hfv/rough.hpp"
#include "hfv/simulate.hpp"
#include "hfv/volatility.hpp"

namespace hfv {

// 17 significant digits: lossless text round-trip for 64-bit floats
inline std::string format_g17(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ============================================================================
// CSV
// ============================================================================

inline void write_observations_csv(const std::string& path, const ObservationSeries& obs) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "time,value\n";
    for (std::size_t i = 0; i < obs.times.size(); ++i)
        f << format_g17(obs.times[i]) << "," << format_g17(obs.y[i]) << "\n";
    if (!f) throw std::runtime_error("write failed: " + path);
}

inline void write_latent_csv(const std::string& path, const PathSample& p) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "time,value,sigma,jump_flag\n";
    std::vector<int> flag(p.x.size(), 0);
    const double dt = p.grid.dt();
    for (const auto& [t, sz] : p.jumps) {
        auto idx = static_cast<std::size_t>(std::ceil(t / dt - 1e-12));
        if (idx < flag.size()) flag[idx] = 1;  // increment ending here carries the jump
    }
    for (std::size_t i = 0; i < p.x.size(); ++i)
        f << format_g17(p.grid.time(i)) << "," << format_g17(p.x[i]) << ","
          << format_g17(p.sigma[i]) << "," << flag[i] << "\n";
    if (!f) throw std::runtime_error("write failed: " + path);
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') { out.push_back(cur); cur.clear(); }
        else if (c != '\r') cur.push_back(c);
    }
    out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& s, std::size_t line_no) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw std::runtime_error("parse error at line " + std::to_string(line_no) +
                                 ": not a number: '" + s + "'");
    return v;
}

}  // namespace detail

// Reads the time,value schema (extra columns ignored); strictly increasing
// times enforced. Errors name the offending line.
inline ObservationSeries read_series_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(f, line))
        throw std::runtime_error("parse error at line 1: empty file");
    auto header = detail::split_csv_line(line);
    if (header.size() < 2 || header[0] != "time" || header[1] != "value")
        throw std::runtime_error("parse error at line 1: expected header time,value");
    ObservationSeries obs;
    std::size_t line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cols = detail::split_csv_line(line);
        if (cols.size() < 2)
            throw std::runtime_error("parse error at line " + std::to_string(line_no) +
                                     ": expected at least 2 columns");
        const double t = detail::parse_double(cols[0], line_no);
        const double v = detail::parse_double(cols[1], line_no);
        if (!obs.times.empty() && !(t > obs.times.back()))
            throw std::runtime_error("parse error at line " + std::to_string(line_no) +
                                     ": times not strictly increasing");
        obs.times.push_back(t);
        obs.y.push_back(v);
    }
    if (obs.times.size() < 2)
        throw std::runtime_error("parse error at line " + std::to_string(line_no) +
                                 ": need at least two rows");
    return obs;
}

// Rejects series whose grid spacing varies; the offending row is named.
inline void require_equidistant(const ObservationSeries& obs, double rel_tol = 1e-9) {
    const double dt = (obs.times.back() - obs.times.front()) /
                      static_cast<double>(obs.times.size() - 1);
    for (std::size_t i = 0; i + 1 < obs.times.size(); ++i) {
        if (std::fabs(obs.times[i + 1] - obs.times[i] - dt) > rel_tol * std::max(dt, 1e-12))
            throw std::runtime_error("non-equidistant grid at line " + std::to_string(i + 3) +
                                     ": estimators require equal spacing");
    }
}

// Volatility series CSV: two columns, second is the volatility value; a
// numeric first column supplies the spacing, a date-like one means delta = 1.
inline VolSeries read_vol_csv(const std::string& path, bool squared = false) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(f, line))
        throw std::runtime_error("parse error at line 1: empty file");
    std::vector<double> vals;
    std::vector<double> idx;
    bool numeric_index = true;
    std::size_t line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cols = detail::split_csv_line(line);
        if (cols.size() < 2)
            throw std::runtime_error("parse error at line " + std::to_string(line_no) +
                                     ": expected 2 columns");
        char* end = nullptr;
        const double t = std::strtod(cols[0].c_str(), &end);
        if (end == cols[0].c_str() || *end != '\0') numeric_index = false;
        else idx.push_back(t);
        vals.push_back(detail::parse_double(cols[1], line_no));
    }
    double delta = 1.0;
    if (numeric_index && idx.size() == vals.size() && idx.size() > 1)
        delta = (idx.back() - idx.front()) / static_cast<double>(idx.size() - 1);
    if (!(delta > 0.0)) delta = 1.0;
    return VolSeries(std::move(vals), delta, squared);
}

// ============================================================================
// Flat key=value configuration
// ============================================================================

struct RunConfig {
    std::string subcommand;
    std::string input;
    std::string out = ".";
    std::uint64_t master_seed = 1;
    std::size_t n = 3600;
    std::size_t reps = 100000;
    double alpha = 0.05;
    bool full = false;
    bool exit_on_reject = false;
    std::map<std::string, std::string> extra;  // model / study parameters
};

inline const std::set<std::string>& allowed_config_keys() {
    static const std::set<std::string> keys = {
        "seed",       "n",          "reps",        "alpha",      "full",
        "input",      "out",        "exit_on_reject",
        // model parameters
        "model",      "sigma",      "horizon",     "kappa",      "theta",
        "xi",         "rho",        "v0",          "mu",         "hurst",
        "nu",         "base_vol",
        // jumps
        "jump_intensity", "jump_scale", "jumps",
        // noise
        "noise",      "noise_rate", "noise_side",
        // estimators and tests
        "trunc_tau",  "trunc_cu",   "spot_alpha",  "spot_time",  "h_inv",
        "k_n",        "tau",        "gap_order",   "gap_tail",   "test",
        // studies
        "study",      "statistic",  "theta0",      "max_lag",    "q_grid",
    };
    return keys;
}

inline void set_config_value(RunConfig& cfg, const std::string& key, const std::string& val) {
    if (!allowed_config_keys().count(key))
        throw std::runtime_error("unknown configuration key: " + key);
    if (key == "seed") cfg.master_seed = std::strtoull(val.c_str(), nullptr, 10);
    else if (key == "n") cfg.n = std::strtoull(val.c_str(), nullptr, 10);
    else if (key == "reps") cfg.reps = std::strtoull(val.c_str(), nullptr, 10);
    else if (key == "alpha") cfg.alpha = std::strtod(val.c_str(), nullptr);
    else if (key == "full") cfg.full = (val == "1" || val == "true");
    else if (key == "input") cfg.input = val;
    else if (key == "out") cfg.out = val;
    else if (key == "exit_on_reject") cfg.exit_on_reject = (val == "1" || val == "true");
    else cfg.extra[key] = val;
}

// key=value per line; blank lines and #-comments allowed; keys validated
inline void load_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        std::string s;
        for (char c : line)
            if (c != '\r') s.push_back(c);
        if (s.empty() || s[0] == '#') continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config parse error at line " + std::to_string(line_no) +
                                     ": expected key=value");
        const std::string key = s.substr(0, eq);
        const std::string val = s.substr(eq + 1);
        try {
            set_config_value(cfg, key, val);
        } catch (const std::runtime_error& e) {
            throw std::runtime_error("config line " + std::to_string(line_no) + ": " +
                                     e.what());
        }
    }
}

inline double extra_or(const RunConfig& cfg, const std::string& key, double fallback) {
    const auto it = cfg.extra.find(key);
    if (it == cfg.extra.end()) return fallback;
    return std::strtod(it->second.c_str(), nullptr);
}

inline std::string extra_or(const RunConfig& cfg, const std::string& key,
                            const std::string& fallback) {
    const auto it = cfg.extra.find(key);
    return it == cfg.extra.end() ? fallback : it->second;
}

// ============================================================================
// JSON reports
// ============================================================================

inline nlohmann::json config_json(const RunConfig& cfg) {
    nlohmann::json j{{"subcommand", cfg.subcommand}, {"input", cfg.input},
                     {"out", cfg.out},               {"seed", cfg.master_seed},
                     {"n", cfg.n},                   {"reps", cfg.reps},
                     {"alpha", cfg.alpha},           {"full", cfg.full},
                     {"exit_on_reject", cfg.exit_on_reject}};
    for (const auto& [k, v] : cfg.extra) j["params"][k] = v;
    return j;
}

inline nlohmann::json to_json(const TestReport& r) {
    nlohmann::json j{{"test_id", r.test_id},
                     {"statistic", r.statistic},
                     {"critical_value", r.critical_value},
                     {"p_value", r.p_value},
                     {"alpha", r.alpha},
                     {"reject", r.reject}};
    if (r.a_inv) j["a_inv"] = *r.a_inv;
    if (r.b_n) j["b_n"] = *r.b_n;
    j["detected"] = nlohmann::json::array();
    for (const Detection& d : r.detected)
        j["detected"].push_back({{"index", d.index}, {"time", d.time}, {"size", d.size}});
    return j;
}

inline nlohmann::json to_json(const McSummary& s) {
    nlohmann::json j{{"experiment_id", s.experiment_id},
                     {"replications", s.replications},
                     {"percentile_grid", s.percentile_grid},
                     {"empirical", s.empirical},
                     {"theoretical", s.theoretical},
                     {"bin_edges", s.bin_edges},
                     {"counts", s.counts},
                     {"wall_seconds", s.wall_seconds},
                     {"seed_lineage", s.seed_lineage}};
    j["moments"] = nlohmann::json::array();
    for (const MomentEstimate& m : s.moments)
        j["moments"].push_back({{"label", m.label},
                                {"value", m.value},
                                {"std_error", m.std_error},
                                {"theory", m.theory}});
    return j;
}

inline nlohmann::json to_json(const RoughnessFit& f) {
    return {{"q_grid", f.q_grid},   {"max_lag", f.max_lag},
            {"zeta", f.zeta},       {"intercept", f.intercept},
            {"r2", f.r2},           {"h_hat", f.h_hat},
            {"h_free", f.h_free},   {"h_free_intercept", f.h_free_intercept},
            {"in_range", f.in_range}};
}

inline nlohmann::json to_json(const SpotEstimate& e) {
    return {{"s", e.s}, {"value", e.value}, {"k_n", e.k_n},
            {"alpha_used", e.alpha_used}, {"raw", e.raw}};
}

inline void write_ledger_json(const std::string& path, const PathSample& p) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& [t, sz] : p.jumps) j.push_back({{"time", t}, {"size", sz}});
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << j.dump(2) << "\n";
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << j.dump(2) << "\n";
    if (!f) throw std::runtime_error("write failed: " + path);
}

// plot-ready CSVs: quantile pairs and histogram bins
inline void write_qq_csv(const std::string& path, const McSummary& s) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "p,empirical,theoretical\n";
    for (std::size_t i = 0; i < s.percentile_grid.size(); ++i)
        f << format_g17(s.percentile_grid[i]) << "," << format_g17(s.empirical[i]) << ","
          << format_g17(s.theoretical[i]) << "\n";
}

inline void write_hist_csv(const std::string& path, const McSummary& s) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "bin_lo,bin_hi,count\n";
    for (std::size_t i = 0; i < s.counts.size(); ++i)
        f << format_g17(s.bin_edges[i]) << "," << format_g17(s.bin_edges[i + 1]) << ","
          << s.counts[i] << "\n";
}

inline void write_m_table_csv(const std::string& path, const RoughnessFit& f) {
    std::ofstream o(path);
    if (!o) throw std::runtime_error("cannot open for writing: " + path);
    o << "q,lag,m\n";
    for (std::size_t qi = 0; qi < f.q_grid.size(); ++qi)
        for (std::size_t l = 1; l <= f.max_lag; ++l)
            o << format_g17(f.q_grid[qi]) << "," << l << ","
              << format_g17(f.m_table[qi][l - 1]) << "\n";
}

}  // namespace hfv
