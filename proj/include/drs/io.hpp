// Serialization: tables, estimate reports, study configs and study CSVs.
#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "drs/core.hpp"
#include "drs/estimators.hpp"
#include "drs/sim.hpp"

namespace drs::io {

using json = nlohmann::json;

/// Fixed-point rendering with `digits` decimals; "nan" for non-finite values.
inline std::string fixed(double v, int digits = 4) {
    if (!std::isfinite(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// DualRecordTable

inline json table_to_json(const DualRecordTable& t) {
    return {{"x11", t.x11()}, {"x10", t.x10()}, {"x01", t.x01()}};
}

inline DualRecordTable table_from_json(const json& j) {
    if (!j.is_object()) throw DomainError("table JSON must be an object");
    auto count = [&](const char* key) -> count_t {
        if (!j.contains(key)) throw DomainError(std::string("table JSON missing '") + key + "'");
        const auto& v = j.at(key);
        if (!v.is_number_integer()) throw DomainError(std::string("table field '") + key + "' must be an integer");
        return v.get<count_t>();
    };
    return {count("x11"), count("x10"), count("x01")};
}

inline std::string table_to_csv(const DualRecordTable& t) {
    return "x11,x10,x01\n" + std::to_string(t.x11()) + "," + std::to_string(t.x10()) + "," +
           std::to_string(t.x01()) + "\n";
}

namespace detail {
inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, sep)) out.push_back(trim(cell));
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

inline count_t parse_count(const std::string& s) {
    count_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        throw DomainError("not an integer count: '" + s + "'");
    return v;
}
}  // namespace detail

/// Reads the first data row of a CSV with header `x11,x10,x01` (any column order).
inline DualRecordTable table_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        line = detail::trim(line);
        if (line.empty()) continue;
        if (header.empty()) {
            header = detail::split(line, ',');
            continue;
        }
        const auto cells = detail::split(line, ',');
        if (cells.size() != header.size()) throw DomainError("table CSV row has the wrong number of fields");
        count_t v[3] = {-1, -1, -1};
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == "x11") v[0] = detail::parse_count(cells[i]);
            else if (header[i] == "x10") v[1] = detail::parse_count(cells[i]);
            else if (header[i] == "x01") v[2] = detail::parse_count(cells[i]);
        }
        if (v[0] < 0 || v[1] < 0 || v[2] < 0)
            throw DomainError("table CSV needs columns x11, x10 and x01 with non-negative values");
        return {v[0], v[1], v[2]};
    }
    throw DomainError("table CSV has no data row");
}

/// Dispatches on content: a leading '{' means JSON, anything else CSV.
inline DualRecordTable load_table(const std::string& path) {
    const std::string text = read_file(path);
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        try {
            return table_from_json(json::parse(text));
        } catch (const json::exception& e) {
            throw DomainError(std::string("invalid table JSON: ") + e.what());
        }
    }
    return table_from_csv(text);
}

// ---------------------------------------------------------------------------
// EstimateReport

inline json report_to_json(const EstimateReport& r) {
    json j;
    j["method"] = r.method;
    j["n_hat"] = r.n_hat;
    auto opt = [&](const char* key, const auto& v) {
        if (v) j[key] = *v;
        else j[key] = nullptr;
    };
    opt("n_hat_integer", r.n_hat_integer);
    opt("p1_hat", r.p1_hat);
    opt("p_hat", r.p_hat);
    opt("c_hat", r.c_hat);
    opt("phi_hat", r.phi_hat);
    opt("se", r.se);
    opt("ci_low", r.ci_low);
    opt("ci_high", r.ci_high);
    opt("delta_used", r.delta_used);
    j["degenerate"] = r.degenerate;
    j["notes"] = r.notes;
    return j;
}

inline EstimateReport report_from_json(const json& j) {
    EstimateReport r;
    r.method = j.at("method").get<std::string>();
    r.n_hat = j.at("n_hat").get<double>();
    auto opt = [&](const char* key, auto& field) {
        using T = typename std::decay_t<decltype(field)>::value_type;
        if (j.contains(key) && !j.at(key).is_null()) field = j.at(key).get<T>();
    };
    opt("n_hat_integer", r.n_hat_integer);
    opt("p1_hat", r.p1_hat);
    opt("p_hat", r.p_hat);
    opt("c_hat", r.c_hat);
    opt("phi_hat", r.phi_hat);
    opt("se", r.se);
    opt("ci_low", r.ci_low);
    opt("ci_high", r.ci_high);
    opt("delta_used", r.delta_used);
    r.degenerate = j.value("degenerate", false);
    if (j.contains("notes")) r.notes = j.at("notes").get<std::vector<std::string>>();
    return r;
}

inline bool same_report(const EstimateReport& a, const EstimateReport& b) {
    return a.method == b.method && a.n_hat == b.n_hat && a.n_hat_integer == b.n_hat_integer &&
           a.p1_hat == b.p1_hat && a.p_hat == b.p_hat && a.c_hat == b.c_hat && a.phi_hat == b.phi_hat &&
           a.se == b.se && a.ci_low == b.ci_low && a.ci_high == b.ci_high && a.delta_used == b.delta_used &&
           a.degenerate == b.degenerate && a.notes == b.notes;
}

inline std::string report_to_text(const EstimateReport& r, const DualRecordTable& t) {
    std::ostringstream o;
    o << "table      x11=" << t.x11() << " x10=" << t.x10() << " x01=" << t.x01() << " (x0=" << t.x0()
      << ")\n";
    o << "method     " << r.method << "\n";
    o << "N_hat      " << fixed(r.n_hat, 3);
    if (r.n_hat_integer) o << "  (integer " << *r.n_hat_integer << ")";
    o << "\n";
    if (r.delta_used) o << "delta      " << fixed(*r.delta_used, 6) << "\n";
    if (r.p1_hat) o << "p1_hat     " << fixed(*r.p1_hat, 4) << "\n";
    if (r.p_hat) o << "p_hat      " << fixed(*r.p_hat, 4) << "\n";
    if (r.c_hat) o << "c_hat      " << fixed(*r.c_hat, 4) << "\n";
    if (r.phi_hat) o << "phi_hat    " << fixed(*r.phi_hat, 4) << "\n";
    if (r.se) o << "se         " << fixed(*r.se, 3) << "\n";
    if (r.ci_low && r.ci_high) o << "95% CI     (" << fixed(*r.ci_low, 2) << ", " << fixed(*r.ci_high, 2) << ")\n";
    if (r.degenerate) o << "warning    estimate sits on the lower bound x0 + 1 (degenerate)\n";
    for (const auto& n : r.notes) o << "note       " << n << "\n";
    return o.str();
}

// ---------------------------------------------------------------------------
// StudyConfig

inline StudyConfig config_from_json(const json& j) {
    StudyConfig c;
    try {
        for (const auto& p : j.at("populations")) {
            PopulationSpec s;
            s.label = p.at("label").get<std::string>();
            s.n = p.at("N").get<count_t>();
            s.p1_dot = p.at("p1").get<double>();
            s.p_dot1 = p.at("p_dot1").get<double>();
            s.phi = p.at("phi").get<double>();
            c.populations.push_back(s);
        }
        for (const auto& e : j.at("estimators")) c.estimators.push_back(EstimatorSpec::parse(e.get<std::string>()));
        c.replicates = j.at("replicates").get<int>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.delta_mode = parse_delta_mode(j.value("delta_mode", std::string("oracle")));
    } catch (const json::exception& e) {
        throw DomainError(std::string("invalid study config: ") + e.what());
    }
    c.validate();
    return c;
}

inline json config_to_json(const StudyConfig& c) {
    json pops = json::array();
    for (const auto& p : c.populations)
        pops.push_back({{"label", p.label}, {"N", p.n}, {"p1", p.p1_dot}, {"p_dot1", p.p_dot1}, {"phi", p.phi}});
    json ests = json::array();
    for (const auto& e : c.estimators) ests.push_back(e.label());
    return {{"populations", pops},
            {"estimators", ests},
            {"replicates", c.replicates},
            {"seed", c.seed},
            {"delta_mode", std::string(to_string(c.delta_mode))}};
}

// ---------------------------------------------------------------------------
// Study CSVs

inline std::string summary_csv(const std::vector<StudySummary>& rows) {
    std::string out = "population,estimator,mean,se,rmse,ci_low,ci_high,failures,delta_used,valid\n";
    for (const auto& s : rows) {
        out += s.population + "," + s.estimator + "," + fixed(s.mean) + "," + fixed(s.sd) + "," +
               fixed(s.rmse) + "," + fixed(s.ci_low) + "," + fixed(s.ci_high) + "," +
               std::to_string(s.failures) + "," + (s.mean_delta ? fixed(*s.mean_delta, 8) : std::string()) +
               "," + (s.valid ? "1" : "0") + "\n";
    }
    return out;
}

inline std::string bands_csv(const std::vector<BandRow>& rows) {
    std::string out = "population,estimator,N,phi,feasible,mean,se,rel_mean,rel_lcl,rel_ucl,failures\n";
    for (const auto& b : rows) {
        out += b.population + "," + b.estimator + "," + std::to_string(b.n_true) + "," + fixed(b.phi, 2) + "," +
               (b.feasible ? "1" : "0") + "," + fixed(b.mean) + "," + fixed(b.sd) + "," + fixed(b.rel_mean, 6) +
               "," + fixed(b.lcl, 6) + "," + fixed(b.ucl, 6) + "," + std::to_string(b.failures) + "\n";
    }
    return out;
}

inline std::string scaling_csv(const std::vector<ScalingSeries>& series) {
    std::string out = "population,estimator,N,ln_N,sd,ln_sd,alpha\n";
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.n.size(); ++i)
            out += s.population + "," + s.estimator + "," + std::to_string(s.n[i]) + "," +
                   fixed(std::log(static_cast<double>(s.n[i])), 6) + "," + fixed(s.sd[i]) + "," +
                   fixed(std::log(s.sd[i]), 6) + "," + fixed(s.alpha, 6) + "\n";
    return out;
}

}  // namespace drs::io
