// Deterministic Monte Carlo studies of the estimators under model M_tb.
//
// Replicate r of population i draws from stream_key(seed, {i, r}), so every
// table, and therefore every summary, is a pure function of the seed.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "drs/core.hpp"
#include "drs/estimators.hpp"
#include "drs/random.hpp"
#include "drs/stats.hpp"

namespace drs {

struct PopulationSpec {
    std::string label;
    count_t n = 500;
    double p1_dot = 0.5;
    double p_dot1 = 0.5;
    double phi = 1.0;

    double p() const { return p_from_marginals(p1_dot, p_dot1, phi); }
    MtbParams params() const { return {n, p1_dot, p(), phi}; }
    bool feasible() const {
        try {
            (void)params();
            return true;
        } catch (const DomainError&) {
            return false;
        }
    }
    PopulationSpec with_n(count_t size) const {
        PopulationSpec s = *this;
        s.n = size;
        return s;
    }
    PopulationSpec with_phi(double value) const {
        PopulationSpec s = *this;
        s.phi = value;
        return s;
    }
};

/// The eight N = 500 study populations: recapture prone (phi = 1.25) P1-P4,
/// recapture averse (phi = 0.8) P5-P8.
inline std::vector<PopulationSpec> table2_populations() {
    return {
        {"P1", 500, 0.50, 0.65, 1.25}, {"P2", 500, 0.60, 0.70, 1.25},
        {"P3", 500, 0.80, 0.70, 1.25}, {"P4", 500, 0.70, 0.55, 1.25},
        {"P5", 500, 0.50, 0.65, 0.80}, {"P6", 500, 0.60, 0.70, 0.80},
        {"P7", 500, 0.80, 0.70, 0.80}, {"P8", 500, 0.70, 0.55, 0.80},
    };
}

/// Standard-error scaling family: S1-S4 coincide with P2, P4, P6 and P8.
inline std::vector<PopulationSpec> s_populations() {
    const auto p = table2_populations();
    std::vector<PopulationSpec> s{p[1], p[3], p[5], p[7]};
    for (std::size_t i = 0; i < s.size(); ++i) s[i].label = "S" + std::to_string(i + 1);
    return s;
}

/// The four (p1., p.1) capture-probability situations of the phi sweep.
inline std::vector<PopulationSpec> robustness_situations() {
    return {{"A", 500, 0.50, 0.65, 1.0},
            {"B", 500, 0.60, 0.70, 1.0},
            {"C", 500, 0.80, 0.70, 1.0},
            {"D", 500, 0.70, 0.55, 1.0}};
}

/// Multinomial draw {x11, x10, x01, x00} for one replicate stream.
inline std::array<count_t, 4> sample_cells(const PopulationSpec& spec, std::uint64_t key) {
    CounterEngine eng(key);
    return draw_cells(eng, spec.n, cell_probs_mtb(spec.params()));
}

/// Observed table for one replicate stream; an empty draw is an estimation failure.
inline DualRecordTable sample_table(const PopulationSpec& spec, std::uint64_t key) {
    const auto x = sample_cells(spec, key);
    if (x[0] + x[1] + x[2] == 0)
        throw EstimationError(EstimationFailure::undefined, "sampled table is empty (x0 = 0)");
    return {x[0], x[1], x[2]};
}

enum class DeltaMode { candidate, oracle };

inline std::string_view to_string(DeltaMode m) { return m == DeltaMode::oracle ? "oracle" : "candidate"; }

inline DeltaMode parse_delta_mode(std::string_view s) {
    if (s == "oracle") return DeltaMode::oracle;
    if (s == "candidate") return DeltaMode::candidate;
    throw DomainError("delta mode must be 'candidate' or 'oracle', got '" + std::string(s) + "'");
}

/// In oracle mode an N-dependent delta policy is frozen at the true N.
inline EstimatorSpec resolve_spec(const EstimatorSpec& spec, DeltaMode mode, count_t n_true,
                                  const DualRecordTable& t) {
    if (mode == DeltaMode::candidate || !spec.delta || spec.delta->is_fixed()) return spec;
    EstimatorSpec s = spec;
    s.delta = spec.delta->at(static_cast<double>(n_true), t);
    return s;
}

struct StudyConfig {
    std::vector<PopulationSpec> populations;
    std::vector<EstimatorSpec> estimators;
    int replicates = 200;
    std::uint64_t seed = 20170101;
    DeltaMode delta_mode = DeltaMode::oracle;
    int workers = 1;

    void validate() const {
        if (replicates < 2) throw DomainError("StudyConfig: replicates must be >= 2");
        if (populations.empty()) throw DomainError("StudyConfig: no populations");
        if (estimators.empty()) throw DomainError("StudyConfig: no estimators");
        if (workers < 1) throw DomainError("StudyConfig: workers must be >= 1");
        for (const auto& p : populations) (void)p.params();
        for (const auto& e : estimators) e.validate();
    }
};

struct StudySummary {
    std::string population;
    std::string estimator;
    count_t n_true = 0;
    double mean = std::numeric_limits<double>::quiet_NaN();
    double sd = std::numeric_limits<double>::quiet_NaN();
    double rmse = std::numeric_limits<double>::quiet_NaN();
    double ci_low = std::numeric_limits<double>::quiet_NaN();
    double ci_high = std::numeric_limits<double>::quiet_NaN();
    int replicates = 0;
    int failures = 0;
    bool valid = false;  // false when more than 10% of replicates failed
    std::optional<double> mean_delta;
    std::vector<double> estimates;  // successful replicates, in replicate order
};

namespace detail {

struct ReplicateOutcome {
    double n_hat = std::numeric_limits<double>::quiet_NaN();
    double delta = std::numeric_limits<double>::quiet_NaN();
};

inline std::vector<ReplicateOutcome> run_replicate(const StudyConfig& cfg, std::size_t pop_index, int r) {
    const auto& pop = cfg.populations[pop_index];
    std::vector<ReplicateOutcome> out(cfg.estimators.size());
    const auto x = sample_cells(pop, stream_key(cfg.seed, {pop_index, static_cast<std::uint64_t>(r)}));
    if (x[0] + x[1] + x[2] == 0) return out;
    const DualRecordTable t(x[0], x[1], x[2]);
    for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
        try {
            const auto rep = estimate(resolve_spec(cfg.estimators[e], cfg.delta_mode, pop.n, t), t);
            out[e].n_hat = rep.n_hat;
            if (rep.delta_used) out[e].delta = *rep.delta_used;
        } catch (const EstimationError&) {
        }
    }
    return out;
}

}  // namespace detail

/// Applies every estimator to every replicate table and summarizes per
/// (population, estimator). Output order: populations outer, estimators inner.
inline std::vector<StudySummary> run_study(const StudyConfig& cfg) {
    cfg.validate();
    const std::size_t np = cfg.populations.size(), ne = cfg.estimators.size();
    const auto reps = static_cast<std::size_t>(cfg.replicates);
    std::vector<std::vector<detail::ReplicateOutcome>> outcomes(np * reps);

    const std::size_t total = np * reps;
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j)
            outcomes[j] = detail::run_replicate(cfg, j / reps, static_cast<int>(j % reps));
    };
    const auto nthreads = std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), total);
    if (nthreads <= 1) {
        work(0, total);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (total + nthreads - 1) / nthreads;
        for (std::size_t w = 0; w < nthreads; ++w)
            pool.emplace_back(work, std::min(total, w * chunk), std::min(total, (w + 1) * chunk));
        for (auto& th : pool) th.join();
    }

    std::vector<StudySummary> summaries;
    summaries.reserve(np * ne);
    for (std::size_t i = 0; i < np; ++i) {
        for (std::size_t e = 0; e < ne; ++e) {
            StudySummary s;
            s.population = cfg.populations[i].label;
            s.estimator = cfg.estimators[e].label();
            s.n_true = cfg.populations[i].n;
            s.replicates = cfg.replicates;
            std::vector<double> deltas;
            for (std::size_t r = 0; r < reps; ++r) {
                const auto& o = outcomes[i * reps + r][e];
                if (std::isnan(o.n_hat)) {
                    ++s.failures;
                    continue;
                }
                s.estimates.push_back(o.n_hat);
                if (!std::isnan(o.delta)) deltas.push_back(o.delta);
            }
            s.valid = s.failures * 10 <= cfg.replicates && s.estimates.size() >= 2;
            if (s.estimates.size() >= 2) {
                s.mean = stats::mean(s.estimates);
                s.sd = stats::sd(s.estimates);
                s.rmse = stats::rmse(s.estimates, static_cast<double>(s.n_true));
                s.ci_low = stats::quantile(s.estimates, 0.025);
                s.ci_high = stats::quantile(s.estimates, 0.975);
            }
            if (!deltas.empty()) s.mean_delta = stats::mean(deltas);
            summaries.push_back(std::move(s));
        }
    }
    return summaries;
}

// ---------------------------------------------------------------------------
// Derived studies

/// Estimators plotted in the figure studies: the DSE and AdPL with delta = 1 - 1.25/N.
inline std::vector<EstimatorSpec> figure_estimators() {
    return {EstimatorSpec::parse("dse"), EstimatorSpec::parse("adpl-mtb:scaled:1.25")};
}

struct ScalingSeries {
    std::string population;
    std::string estimator;
    std::vector<count_t> n;
    std::vector<double> sd;
    double alpha = std::numeric_limits<double>::quiet_NaN();  // OLS slope of ln sd on ln N
};

/// sd of each estimator across replicates at every N, and the fitted
/// exponent alpha in sd ~ N^alpha.
inline std::vector<ScalingSeries> se_scaling_study(const std::vector<PopulationSpec>& family,
                                                   const std::vector<count_t>& n_grid, int replicates,
                                                   std::uint64_t seed,
                                                   const std::vector<EstimatorSpec>& estimators,
                                                   DeltaMode mode = DeltaMode::oracle, int workers = 1) {
    for (std::size_t i = 1; i < n_grid.size(); ++i)
        if (n_grid[i] <= n_grid[i - 1]) throw DomainError("se_scaling_study: N grid must be strictly increasing");
    std::vector<ScalingSeries> out;
    for (const auto& pop : family)
        for (const auto& e : estimators) out.push_back({pop.label, e.label(), {}, {}, {}});
    for (count_t n : n_grid) {
        StudyConfig cfg;
        for (const auto& pop : family) cfg.populations.push_back(pop.with_n(n));
        cfg.estimators = estimators;
        cfg.replicates = replicates;
        cfg.seed = stream_key(seed, {static_cast<std::uint64_t>(n)});
        cfg.delta_mode = mode;
        cfg.workers = workers;
        const auto sums = run_study(cfg);
        for (std::size_t k = 0; k < sums.size(); ++k) {
            out[k].n.push_back(n);
            out[k].sd.push_back(sums[k].sd);
        }
    }
    for (auto& s : out) {
        std::vector<double> lx, ly;
        for (std::size_t i = 0; i < s.n.size(); ++i) {
            lx.push_back(std::log(static_cast<double>(s.n[i])));
            ly.push_back(std::log(s.sd[i]));
        }
        if (lx.size() >= 2) s.alpha = stats::ols_slope(lx, ly);
    }
    return out;
}

/// Relative confidence band of the replicate mean: (mean -/+ 1.96 sd) / N.
struct BandRow {
    std::string population;
    std::string estimator;
    count_t n_true = 0;
    double phi = 1.0;
    bool feasible = true;
    double mean = std::numeric_limits<double>::quiet_NaN();
    double sd = std::numeric_limits<double>::quiet_NaN();
    double rel_mean = std::numeric_limits<double>::quiet_NaN();
    double lcl = std::numeric_limits<double>::quiet_NaN();
    double ucl = std::numeric_limits<double>::quiet_NaN();
    int failures = 0;
};

inline BandRow band_from_summary(const StudySummary& s, double phi) {
    BandRow b;
    b.population = s.population;
    b.estimator = s.estimator;
    b.n_true = s.n_true;
    b.phi = phi;
    b.mean = s.mean;
    b.sd = s.sd;
    b.failures = s.failures;
    const auto n = static_cast<double>(s.n_true);
    b.rel_mean = s.mean / n;
    b.lcl = (s.mean - 1.96 * s.sd) / n;
    b.ucl = (s.mean + 1.96 * s.sd) / n;
    return b;
}

inline std::vector<BandRow> coverage_bands(const std::vector<PopulationSpec>& family,
                                           const std::vector<count_t>& n_grid, int replicates,
                                           std::uint64_t seed, const std::vector<EstimatorSpec>& estimators,
                                           DeltaMode mode = DeltaMode::oracle, int workers = 1) {
    std::vector<BandRow> out;
    for (count_t n : n_grid) {
        StudyConfig cfg;
        for (const auto& pop : family) cfg.populations.push_back(pop.with_n(n));
        cfg.estimators = estimators;
        cfg.replicates = replicates;
        cfg.seed = stream_key(seed, {static_cast<std::uint64_t>(n)});
        cfg.delta_mode = mode;
        cfg.workers = workers;
        for (const auto& s : run_study(cfg)) {
            const auto& pop = *std::find_if(family.begin(), family.end(),
                                            [&](const PopulationSpec& p) { return p.label == s.population; });
            out.push_back(band_from_summary(s, pop.phi));
        }
    }
    return out;
}

/// Replicate bands of each estimator over a phi grid at fixed N. Grid
/// points with an infeasible population (p or phi*p outside (0,1)) are
/// returned with feasible = false and no statistics.
inline std::vector<BandRow> robustness_sweep(const std::vector<PopulationSpec>& situations,
                                             const std::vector<double>& phi_grid, count_t n, int replicates,
                                             std::uint64_t seed, const std::vector<EstimatorSpec>& estimators,
                                             DeltaMode mode = DeltaMode::oracle, int workers = 1) {
    std::vector<BandRow> out;
    for (std::size_t si = 0; si < situations.size(); ++si) {
        for (std::size_t gi = 0; gi < phi_grid.size(); ++gi) {
            const auto pop = situations[si].with_n(n).with_phi(phi_grid[gi]);
            if (!pop.feasible()) {
                for (const auto& e : estimators) {
                    BandRow b;
                    b.population = pop.label;
                    b.estimator = e.label();
                    b.n_true = n;
                    b.phi = pop.phi;
                    b.feasible = false;
                    out.push_back(b);
                }
                continue;
            }
            StudyConfig cfg;
            cfg.populations = {pop};
            cfg.estimators = estimators;
            cfg.replicates = replicates;
            cfg.seed = stream_key(seed, {si, gi});
            cfg.delta_mode = mode;
            cfg.workers = workers;
            for (const auto& s : run_study(cfg)) out.push_back(band_from_summary(s, pop.phi));
        }
    }
    return out;
}

/// phi from 0.5 to 3.0 in steps of 0.25.
inline std::vector<double> default_phi_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 10; ++i) g.push_back(0.5 + 0.25 * i);
    return g;
}

/// N = 100, 200, ..., 1000.
inline std::vector<count_t> default_n_grid() {
    std::vector<count_t> g;
    for (count_t n = 100; n <= 1000; n += 100) g.push_back(n);
    return g;
}

}  // namespace drs
