// Reproduction targets: the population table, the two summary tables and
// the four figure datasets, as CSV text (optionally a minimal SVG plot).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "drs/io.hpp"
#include "drs/sim.hpp"

namespace drs::reproduce {

/// One published summary cell: mean(s.e.), RMSE and interval.
struct PublishedCell {
    std::string population;
    std::string row;  // "dse", "lee", "adpl:0.75", "adpl:1.25", "adpl:1.75"
    double mean;
    double se;
    double rmse;
    double ci_low;
    double ci_high;
};

/// Published summaries for P1-P8 (N = 500, 200 replicates). The "lee" rows
/// come from a Gibbs-sampling Bayes estimator that is not implemented here.
inline const std::vector<PublishedCell>& published_cells() {
    static const std::vector<PublishedCell> cells = {
        {"P1", "dse", 450, 14.10, 51.54, 425, 480},       {"P2", "dse", 460, 11.23, 41.32, 438, 481},
        {"P3", "dse", 480, 7.07, 20.55, 465, 493},        {"P4", "dse", 469, 12.01, 32.55, 444, 491},
        {"P1", "lee", 468, 20.56, 37.94, 398, 561},       {"P2", "lee", 483, 18.45, 24.97, 426, 560},
        {"P3", "lee", 485, 6.61, 16.97, 460, 513},        {"P4", "lee", 471, 8.11, 30.61, 422, 542},
        {"P1", "adpl:0.75", 486, 12.15, 18.86, 461, 507}, {"P2", "adpl:0.75", 513, 10.61, 17.01, 491, 532},
        {"P3", "adpl:0.75", 539, 7.15, 39.82, 525, 552},  {"P4", "adpl:0.75", 499, 9.74, 9.61, 578, 516},
        {"P1", "adpl:1.25", 461, 11.47, 40.32, 439, 480}, {"P2", "adpl:1.25", 488, 10.01, 15.54, 467, 506},
        {"P3", "adpl:1.25", 515, 6.78, 16.32, 501, 527},  {"P4", "adpl:1.25", 476, 9.27, 25.68, 456, 493},
        {"P1", "adpl:1.75", 449, 11.13, 51.64, 428, 469}, {"P2", "adpl:1.75", 476, 9.77, 25.85, 455, 493},
        {"P3", "adpl:1.75", 504, 6.60, 7.71, 491, 516},   {"P4", "adpl:1.75", 466, 9.02, 35.23, 446, 482},
        {"P5", "dse", 563, 23.15, 67.21, 523, 615},       {"P6", "dse", 550, 14.94, 52.48, 524, 578},
        {"P7", "dse", 526, 8.08, 27.09, 510, 541},        {"P8", "dse", 538, 14.26, 40.44, 513, 565},
        {"P5", "lee", 474, 20.80, 35.58, 431, 566},       {"P6", "lee", 512, 15.76, 19.83, 461, 575},
        {"P7", "lee", 516, 6.17, 18.71, 486, 553},        {"P8", "lee", 517, 13.02, 21.75, 451, 615},
        {"P5", "adpl:0.75", 533, 9.53, 34.57, 513, 552},  {"P6", "adpl:0.75", 562, 7.44, 63.05, 547, 577},
        {"P7", "adpl:0.75", 574, 5.70, 74.25, 563, 584},  {"P8", "adpl:0.75", 536, 8.15, 36.88, 521, 551},
        {"P5", "adpl:1.25", 505, 9.40, 10.72, 487, 524},  {"P6", "adpl:1.25", 534, 6.98, 35.23, 519, 547},
        {"P7", "adpl:1.25", 548, 5.21, 48.40, 537, 557},  {"P8", "adpl:1.25", 510, 7.75, 13.01, 497, 525},
        {"P5", "adpl:1.75", 492, 9.18, 12.45, 474, 510},  {"P6", "adpl:1.75", 521, 6.75, 22.04, 506, 534},
        {"P7", "adpl:1.75", 535, 5.00, 35.88, 525, 545},  {"P8", "adpl:1.75", 499, 7.52, 9.65, 485, 512},
    };
    return cells;
}

inline const PublishedCell& published(std::string_view population, std::string_view row) {
    for (const auto& c : published_cells())
        if (c.population == population && c.row == row) return c;
    throw DomainError("no published cell for " + std::string(population) + "/" + std::string(row));
}

/// Published E(x0) column.
inline const std::map<std::string, int>& published_expected_x0() {
    static const std::map<std::string, int> m = {{"P1", 394}, {"P2", 422}, {"P3", 458}, {"P4", 420},
                                                 {"P5", 430}, {"P6", 459}, {"P7", 483}, {"P8", 446}};
    return m;
}

inline const std::vector<double>& table_k_values() {
    static const std::vector<double> k = {0.75, 1.25, 1.75};
    return k;
}

inline std::vector<EstimatorSpec> table_estimators() {
    std::vector<EstimatorSpec> e{EstimatorSpec::parse("dse")};
    for (double k : table_k_values()) e.push_back({Method::adpl_mtb, DeltaPolicy::scaled(k)});
    return e;
}

struct Options {
    std::uint64_t seed = 20170101;
    int replicates = 200;
    int workers = 1;
    DeltaMode delta_mode = DeltaMode::oracle;  // figure targets only
};

// ---------------------------------------------------------------------------
// Targets

inline std::string table2_csv() {
    std::string out = "population,phi,p1,p_dot1,p,c,expected_x0,expected_x0_rounded\n";
    for (const auto& pop : table2_populations()) {
        const auto params = pop.params();
        const double ex0 = expected_distinct(params);
        out += pop.label + "," + io::fixed(pop.phi, 2) + "," + io::fixed(pop.p1_dot, 2) + "," +
               io::fixed(pop.p_dot1, 2) + "," + io::fixed(params.p(), 6) + "," + io::fixed(params.c(), 6) + "," +
               io::fixed(ex0, 4) + "," + std::to_string(std::llround(ex0)) + "\n";
    }
    return out;
}

/// Runs DSE and the three AdPL policies under both delta modes, so that any
/// divergence between them is visible in the output.
inline std::vector<StudySummary> table_study(const std::vector<PopulationSpec>& pops, const Options& opt) {
    std::vector<StudySummary> rows;
    for (DeltaMode mode : {DeltaMode::oracle, DeltaMode::candidate}) {
        StudyConfig cfg;
        cfg.populations = pops;
        cfg.estimators = table_estimators();
        if (mode == DeltaMode::candidate) cfg.estimators.erase(cfg.estimators.begin());
        cfg.replicates = opt.replicates;
        cfg.seed = opt.seed;
        cfg.delta_mode = mode;
        cfg.workers = opt.workers;
        for (auto s : run_study(cfg)) {
            if (s.estimator != "dse") s.estimator += "[" + std::string(to_string(mode)) + "]";
            rows.push_back(std::move(s));
        }
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const StudySummary& a, const StudySummary& b) { return a.population < b.population; });
    return rows;
}

inline std::string table_csv(const std::vector<PopulationSpec>& pops, const Options& opt) {
    std::string out = io::summary_csv(table_study(pops, opt));
    for (const auto& pop : pops) {
        const auto& c = published(pop.label, "lee");
        out += pop.label + ",lee-bayes (published reference)," + io::fixed(c.mean) + "," + io::fixed(c.se) + "," +
               io::fixed(c.rmse) + "," + io::fixed(c.ci_low) + "," + io::fixed(c.ci_high) + ",,,\n";
    }
    return out;
}

inline std::vector<PopulationSpec> table3_populations() {
    auto p = table2_populations();
    return {p.begin(), p.begin() + 4};
}

inline std::vector<PopulationSpec> table4_populations() {
    auto p = table2_populations();
    return {p.begin() + 4, p.end()};
}

inline std::vector<ScalingSeries> fig1_data(const Options& opt) {
    return se_scaling_study(s_populations(), default_n_grid(), opt.replicates, opt.seed, figure_estimators(),
                            opt.delta_mode, opt.workers);
}

inline std::vector<BandRow> fig23_data(const std::vector<PopulationSpec>& family, const Options& opt) {
    return coverage_bands(family, default_n_grid(), opt.replicates, opt.seed, figure_estimators(), opt.delta_mode,
                          opt.workers);
}

inline std::vector<BandRow> fig4_data(const Options& opt) {
    return robustness_sweep(robustness_situations(), default_phi_grid(), 500, opt.replicates, opt.seed,
                            figure_estimators(), opt.delta_mode, opt.workers);
}

// ---------------------------------------------------------------------------
// Minimal SVG line plots

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

inline std::string svg_plot(const std::vector<Series>& series, const std::string& title, const std::string& xlabel,
                            const std::string& ylabel) {
    constexpr double W = 720, H = 480, L = 70, R = 180, T = 40, B = 50;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    if (!(x1 > x0)) x1 = x0 + 1;
    if (!(y1 > y0)) y1 = y0 + 1;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
    static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
    std::string o = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"480\" "
                    "font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o += "<text x=\"" + io::fixed(W / 2, 1) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + title + "</text>\n";
    o += "<line x1=\"" + io::fixed(L, 1) + "\" y1=\"" + io::fixed(H - B, 1) + "\" x2=\"" + io::fixed(W - R, 1) +
         "\" y2=\"" + io::fixed(H - B, 1) + "\" stroke=\"black\"/>\n";
    o += "<line x1=\"" + io::fixed(L, 1) + "\" y1=\"" + io::fixed(T, 1) + "\" x2=\"" + io::fixed(L, 1) + "\" y2=\"" +
         io::fixed(H - B, 1) + "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
        o += "<text x=\"" + io::fixed(px(xv), 1) + "\" y=\"" + io::fixed(H - B + 16, 1) +
             "\" text-anchor=\"middle\">" + io::fixed(xv, 2) + "</text>\n";
        o += "<text x=\"" + io::fixed(L - 6, 1) + "\" y=\"" + io::fixed(py(yv) + 4, 1) + "\" text-anchor=\"end\">" +
             io::fixed(yv, 3) + "</text>\n";
    }
    o += "<text x=\"" + io::fixed((L + W - R) / 2, 1) + "\" y=\"" + io::fixed(H - 10, 1) +
         "\" text-anchor=\"middle\">" + xlabel + "</text>\n";
    o += "<text x=\"14\" y=\"" + io::fixed((T + H - B) / 2, 1) + "\" transform=\"rotate(-90 14 " +
         io::fixed((T + H - B) / 2, 1) + ")\" text-anchor=\"middle\">" + ylabel + "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* col = colours[k % 8];
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i])) continue;
            pts += io::fixed(px(s.x[i]), 1) + "," + io::fixed(py(s.y[i]), 1) + " ";
        }
        o += "<polyline fill=\"none\" stroke=\"" + std::string(col) + "\" stroke-width=\"1.5\"" +
             (s.label.find("adpl") != std::string::npos ? " stroke-dasharray=\"4 3\"" : "") + " points=\"" + pts +
             "\"/>\n";
        o += "<text x=\"" + io::fixed(W - R + 8, 1) + "\" y=\"" + io::fixed(T + 14.0 * (k + 1), 1) + "\" fill=\"" +
             col + "\">" + s.label + "</text>\n";
    }
    o += "</svg>\n";
    return o;
}

inline std::vector<Series> scaling_series(const std::vector<ScalingSeries>& data) {
    std::vector<Series> out;
    for (const auto& s : data) {
        Series p{s.population + " " + s.estimator, {}, {}};
        for (std::size_t i = 0; i < s.n.size(); ++i) {
            p.x.push_back(std::log(static_cast<double>(s.n[i])));
            p.y.push_back(std::log(s.sd[i]));
        }
        out.push_back(std::move(p));
    }
    return out;
}

/// Lower and upper relative band of each (population, estimator) against N or phi.
inline std::vector<Series> band_series(const std::vector<BandRow>& rows, bool against_phi) {
    std::map<std::string, std::pair<Series, Series>> by;
    std::vector<std::string> order;
    for (const auto& b : rows) {
        const std::string key = b.population + " " + b.estimator;
        if (!by.count(key)) {
            order.push_back(key);
            by[key] = {Series{key + " LCL", {}, {}}, Series{key + " UCL", {}, {}}};
        }
        const double x = against_phi ? b.phi : static_cast<double>(b.n_true);
        by[key].first.x.push_back(x);
        by[key].first.y.push_back(b.lcl);
        by[key].second.x.push_back(x);
        by[key].second.y.push_back(b.ucl);
    }
    std::vector<Series> out;
    for (const auto& k : order) {
        out.push_back(by[k].first);
        out.push_back(by[k].second);
    }
    return out;
}

inline const std::vector<std::string>& targets() {
    static const std::vector<std::string> t = {"table2", "table3", "table4", "fig1", "fig2", "fig3", "fig4"};
    return t;
}

struct Output {
    std::string csv;
    std::string svg;  // empty for tables
};

inline Output run_target(std::string_view target, const Options& opt) {
    if (target == "table2") return {table2_csv(), {}};
    if (target == "table3") return {table_csv(table3_populations(), opt), {}};
    if (target == "table4") return {table_csv(table4_populations(), opt), {}};
    if (target == "fig1") {
        const auto d = fig1_data(opt);
        return {io::scaling_csv(d), svg_plot(scaling_series(d), "ln s.d. against ln N", "ln N", "ln s.d.")};
    }
    if (target == "fig2" || target == "fig3") {
        const auto d = fig23_data(target == "fig2" ? table3_populations() : table4_populations(), opt);
        return {io::bands_csv(d), svg_plot(band_series(d, false), "relative 95% band", "N", "N_hat / N")};
    }
    if (target == "fig4") {
        const auto d = fig4_data(opt);
        return {io::bands_csv(d), svg_plot(band_series(d, true), "relative 95% band, N = 500", "phi", "N_hat / N")};
    }
    throw DomainError("unknown target '" + std::string(target) +
                      "' (expected table2, table3, table4, fig1, fig2, fig3 or fig4)");
}

}  // namespace drs::reproduce
