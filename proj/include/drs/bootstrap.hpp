// Parametric bootstrap standard errors for single-table estimates.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "drs/estimators.hpp"
#include "drs/random.hpp"
#include "drs/stats.hpp"

namespace drs {

struct BootstrapResult {
    std::vector<double> estimates;
    count_t failures = 0;
    double se = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

/// Cell probabilities of the fitted model at the point estimate.
///
/// Under M_tb the conditional MLEs reproduce the observed cells exactly, so
/// p_ij = x_ij / N. Under M_t the fitted cells are products of the margins.
inline CellProbabilities fitted_cells(const EstimatorSpec& spec, const EstimateReport& fit,
                                      const DualRecordTable& t) {
    const double n = fit.n_hat;
    if (!(n >= static_cast<double>(t.x0())) || n <= 0.0)
        throw DomainError("fitted_cells: estimate below the observed count");
    const bool behavioural = spec.method == Method::adpl_mtb || spec.method == Method::pl_mtb;
    CellProbabilities c{};
    if (behavioural) {
        c.p11 = static_cast<double>(t.x11()) / n;
        c.p10 = static_cast<double>(t.x10()) / n;
        c.p01 = static_cast<double>(t.x01()) / n;
    } else {
        const double a = static_cast<double>(t.x1_dot()) / n;
        const double b = static_cast<double>(t.x_dot1()) / n;
        c.p11 = a * b;
        c.p10 = a * (1.0 - b);
        c.p01 = (1.0 - a) * b;
    }
    c.p00 = std::max(0.0, 1.0 - c.p11 - c.p10 - c.p01);
    return c;
}

/// Re-estimates with the same spec on B tables drawn from the fitted model.
/// Replicate b uses stream_key(seed, {tag, b}); failed replicates are dropped.
inline BootstrapResult parametric_bootstrap(const EstimatorSpec& spec, const EstimateReport& fit,
                                            const DualRecordTable& t, int replicates,
                                            std::uint64_t seed, std::uint64_t tag = 0xb007) {
    if (replicates < 2) throw DomainError("parametric_bootstrap: need at least 2 replicates");
    const auto cells = fitted_cells(spec, fit, t);
    const auto n = static_cast<count_t>(std::llround(fit.n_hat));
    BootstrapResult out;
    out.estimates.reserve(static_cast<std::size_t>(replicates));
    for (int b = 0; b < replicates; ++b) {
        CounterEngine eng(stream_key(seed, {tag, static_cast<std::uint64_t>(b)}));
        const auto x = draw_cells(eng, n, cells);
        if (x[0] + x[1] + x[2] == 0) {
            ++out.failures;
            continue;
        }
        try {
            out.estimates.push_back(estimate(spec, DualRecordTable(x[0], x[1], x[2])).n_hat);
        } catch (const EstimationError&) {
            ++out.failures;
        }
    }
    if (out.estimates.size() < 2)
        throw EstimationError(EstimationFailure::undefined, "bootstrap: fewer than two usable replicates");
    out.se = stats::sd(out.estimates);
    out.ci_low = stats::quantile(out.estimates, 0.025);
    out.ci_high = stats::quantile(out.estimates, 0.975);
    return out;
}

/// Runs the bootstrap and stores se and interval in the report.
inline void attach_bootstrap(EstimateReport& report, const EstimatorSpec& spec, const DualRecordTable& t,
                             int replicates, std::uint64_t seed) {
    const auto boot = parametric_bootstrap(spec, report, t, replicates, seed);
    report.se = boot.se;
    report.ci_low = std::min(boot.ci_low, report.n_hat);
    report.ci_high = std::max(boot.ci_high, report.n_hat);
    if (boot.ci_low > report.n_hat || boot.ci_high < report.n_hat)
        report.notes.push_back("bootstrap percentile interval did not cover the estimate; widened to include it");
    if (boot.failures > 0)
        report.notes.push_back("bootstrap: " + std::to_string(boot.failures) + " of " +
                               std::to_string(replicates) + " replicates failed and were dropped");
}

}  // namespace drs
