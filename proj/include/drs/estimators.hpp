// Point estimators of N, nuisance recovery, delta policies, and the
// large-sample bias/variance approximations for the dual-system estimator.
#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "drs/core.hpp"
#include "drs/likelihood.hpp"

namespace drs {

// ---------------------------------------------------------------------------
// Delta policies

namespace detail {

inline double parse_decimal(std::string_view text, const char* what) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || first == last)
        throw DomainError(std::string(what) + ": cannot parse number '" + std::string(text) + "'");
    return value;
}

inline std::string format_shortest(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

}  // namespace detail

/// Rule producing the AdPL adjustment coefficient delta.
///
///   fixed:v      delta = v
///   scaled:k     delta(N) = 1 - k / N
///   recapture:k  delta(N, table) = 1 - k (1 - c_hat) / N, c_hat = x11 / x1.
class DeltaPolicy {
  public:
    struct Fixed {
        double value;
    };
    struct Scaled {
        double k;
    };
    struct RecaptureScaled {
        double k;
    };
    using Variant = std::variant<Fixed, Scaled, RecaptureScaled>;

    static DeltaPolicy fixed(double value) {
        if (!std::isfinite(value)) throw DomainError("DeltaPolicy: fixed value must be finite");
        return DeltaPolicy(Fixed{value});
    }
    static DeltaPolicy scaled(double k) {
        check_k(k);
        return DeltaPolicy(Scaled{k});
    }
    static DeltaPolicy recapture(double k) {
        check_k(k);
        return DeltaPolicy(RecaptureScaled{k});
    }

    /// Parses `fixed:<v>`, `scaled:<k>` or `recapture:<k>`.
    static DeltaPolicy parse(std::string_view text) {
        const auto colon = text.find(':');
        if (colon == std::string_view::npos)
            throw DomainError("DeltaPolicy: expected '<kind>:<number>', got '" + std::string(text) + "'");
        const auto kind = text.substr(0, colon);
        const double v = detail::parse_decimal(text.substr(colon + 1), "DeltaPolicy");
        if (kind == "fixed") return fixed(v);
        if (kind == "scaled") return scaled(v);
        if (kind == "recapture") return recapture(v);
        throw DomainError("DeltaPolicy: unknown kind '" + std::string(kind) + "'");
    }

    std::string to_string() const {
        return std::visit(
            [](const auto& v) -> std::string {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, Fixed>) return "fixed:" + detail::format_shortest(v.value);
                else if constexpr (std::is_same_v<T, Scaled>) return "scaled:" + detail::format_shortest(v.k);
                else return "recapture:" + detail::format_shortest(v.k);
            },
            policy_);
    }

    const Variant& variant() const noexcept { return policy_; }
    bool is_fixed() const noexcept { return std::holds_alternative<Fixed>(policy_); }

    /// delta at candidate population size n for this table.
    double evaluate(double n, const DualRecordTable& t) const {
        return std::visit(
            [&](const auto& v) -> double {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, Fixed>) return v.value;
                else if constexpr (std::is_same_v<T, Scaled>) return 1.0 - v.k / n;
                else return 1.0 - v.k * (1.0 - recapture_rate(t)) / n;
            },
            policy_);
    }

    /// Freezes an N-dependent policy at a known population size.
    DeltaPolicy at(double n, const DualRecordTable& t) const { return fixed(evaluate(n, t)); }

    static double recapture_rate(const DualRecordTable& t) {
        if (t.x1_dot() == 0)
            throw EstimationError(EstimationFailure::undefined, "recapture rate undefined: x1. = 0");
        return static_cast<double>(t.x11()) / static_cast<double>(t.x1_dot());
    }

    friend bool operator==(const DeltaPolicy& a, const DeltaPolicy& b) { return a.to_string() == b.to_string(); }

  private:
    explicit DeltaPolicy(Variant v) : policy_(v) {}
    static void check_k(double k) {
        if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("DeltaPolicy: k must be a positive finite number");
    }
    Variant policy_;
};

// ---------------------------------------------------------------------------
// Integer grid search

struct GridSpec {
    count_t lower = 1;
    count_t cap = 1000;
    double growth = 2.0;
    count_t ceiling = 100'000'000;
};

inline double dse_value(const DualRecordTable& t) {
    if (t.x11() == 0) throw EstimationError(EstimationFailure::undefined, "DSE undefined: x11 = 0");
    return static_cast<double>(t.x1_dot()) * static_cast<double>(t.x_dot1()) /
           static_cast<double>(t.x11());
}

/// lower = x0 + 1, cap = max(10 * DSE, x0 + 1000).
inline GridSpec default_grid(const DualRecordTable& t) {
    GridSpec g;
    g.lower = t.x0() + 1;
    g.cap = t.x0() + 1000;
    if (t.x11() > 0) g.cap = std::max(g.cap, static_cast<count_t>(std::ceil(10.0 * dse_value(t))));
    return g;
}

/// Integer argmax of l over [lower, ...] given the increments step(n) = l(n+1) - l(n).
///
/// Scans to grid.cap; while the maximum sits on the cap the cap is grown
/// geometrically. A maximum on grid.ceiling raises no_finite_maximum. Ties
/// resolve to the smallest n.
template <class Step>
count_t grid_argmax(Step&& step, count_t lower, const GridSpec& grid) {
    if (grid.cap <= lower) throw DomainError("grid_argmax: cap must exceed lower bound");
    count_t cap = std::min(grid.cap, grid.ceiling);
    count_t best_n = lower;
    double best = 0.0, sum = 0.0, comp = 0.0;
    count_t n = lower;
    for (;;) {
        for (; n < cap; ++n) {
            const double s = step(n);
            const double t = sum + s;  // Neumaier summation
            comp += std::abs(sum) >= std::abs(s) ? (sum - t) + s : (s - t) + sum;
            sum = t;
            const double value = sum + comp;
            if (value > best) {
                best = value;
                best_n = n + 1;
            }
        }
        if (best_n < cap) return best_n;
        if (cap >= grid.ceiling)
            throw EstimationError(EstimationFailure::no_finite_maximum,
                                  "likelihood still increasing at N = " + std::to_string(cap) +
                                      "; no finite maximum detected");
        const auto grown = static_cast<count_t>(std::ceil(static_cast<double>(cap) * grid.growth));
        cap = std::min(grid.ceiling, std::max(cap + 1, grown));
    }
}

// ---------------------------------------------------------------------------
// Nuisance recovery and closed forms

struct Nuisance {
    double p1;
    double p;
    double c;
    double phi;  // +inf when p = 0
};

/// Conditional MLEs of (p1., p, c) at fixed N for model M_tb, and phi = c / p.
inline Nuisance recover_nuisance(count_t n_hat, const DualRecordTable& t) {
    if (t.x1_dot() == 0)
        throw EstimationError(EstimationFailure::undefined, "recover_nuisance: x1. = 0, c undefined");
    if (n_hat <= t.x1_dot())
        throw EstimationError(EstimationFailure::undefined, "recover_nuisance: N must exceed x1.");
    Nuisance r{};
    r.p1 = static_cast<double>(t.x1_dot()) / static_cast<double>(n_hat);
    r.p = static_cast<double>(t.x01()) / static_cast<double>(n_hat - t.x1_dot());
    r.c = static_cast<double>(t.x11()) / static_cast<double>(t.x1_dot());
    r.phi = r.p > 0.0 ? r.c / r.p : std::numeric_limits<double>::infinity();
    return r;
}

/// Literal closed-form profile-likelihood rule for M_t:
/// r = x1. x.1 / x11; r integral -> r - 1, else the better of [r] - 1 and [r].
/// This is not always the kernel argmax; mle_profile_mt reports the argmax.
inline count_t profile_mt_closed_form(const DualRecordTable& t) {
    if (t.x11() == 0) throw EstimationError(EstimationFailure::undefined, "profile MLE undefined: x11 = 0");
    const count_t num = t.x1_dot() * t.x_dot1();
    const count_t fl = num / t.x11();
    if (num % t.x11() == 0) return std::max(t.x0(), fl - 1);
    if (fl - 1 < t.x0()) return fl;
    return log_profile_mt(static_cast<double>(fl), t) > log_profile_mt(static_cast<double>(fl - 1), t)
               ? fl
               : fl - 1;
}

/// Literal closed-form modified-profile rule for M_t: r integral -> r - 1, else [r].
inline count_t mpl_mt_closed_form(const DualRecordTable& t) {
    if (t.x11() == 0) throw EstimationError(EstimationFailure::undefined, "MPL estimate undefined: x11 = 0");
    const count_t num = t.x1_dot() * t.x_dot1();
    const count_t fl = num / t.x11();
    return num % t.x11() == 0 ? std::max(t.x0(), fl - 1) : fl;
}

namespace detail {

/// Smallest N at which the M_t modified profile likelihood is finite.
inline count_t mpl_mt_lower(const DualRecordTable& t) {
    return (t.x1_dot() == t.x0() || t.x_dot1() == t.x0()) ? t.x0() + 1 : t.x0();
}

/// Hill-climbs an integer log-likelihood from seed using its increments.
template <class Step>
count_t local_argmax(Step&& step, count_t seed, count_t lower) {
    count_t n = std::max(seed, lower);
    while (step(n) > 0.0) ++n;
    while (n > lower && step(n - 1) <= 0.0) --n;
    return n;
}

inline void fill_mt_nuisance(EstimateReport& r, double n, const DualRecordTable& t) {
    r.p1_hat = static_cast<double>(t.x1_dot()) / n;
    r.p_hat = static_cast<double>(t.x_dot1()) / n;
    r.c_hat = r.p_hat;
    r.phi_hat = 1.0;
}

inline void fill_mtb_nuisance(EstimateReport& r, count_t n, const DualRecordTable& t) {
    const Nuisance nu = recover_nuisance(n, t);
    r.p1_hat = nu.p1;
    r.p_hat = nu.p;
    r.c_hat = nu.c;
    if (std::isfinite(nu.phi)) r.phi_hat = nu.phi;
    else r.notes.push_back("phi_hat undefined: p_hat = 0 (x01 = 0)");
}

/// var_dse_under_mtb evaluated at a real-valued N without parameter validation.
inline double var_dse_formula(double n, double p1, double p, double phi) {
    return n * (1.0 / phi) * (1.0 - p1) * (1.0 - phi * p) / (p1 * phi * p);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Bias and variance of the DSE under M_tb

/// E(xy/z) to second order from means and the full covariance matrix of (x, y, z).
inline double ratio_moment_approx(const std::array<double, 3>& means,
                                  const std::array<std::array<double, 3>, 3>& cov) {
    const double ex = means[0], ey = means[1], ez = means[2];
    if (ez == 0.0) throw DomainError("ratio_moment_approx: E(z) must be non-zero");
    return ex * ey / ez *
           (1.0 + cov[0][1] / (ex * ey) - cov[0][2] / (ex * ez) - cov[1][2] / (ey * ez) +
            cov[2][2] / (ez * ez));
}

struct RatioMoments {
    std::array<double, 3> means;
    std::array<std::array<double, 3>, 3> cov;
};

/// Multinomial moments of (x1., x.1, x11) under M_tb.
inline RatioMoments dse_ratio_moments(const MtbParams& params) {
    const auto cells = cell_probs_mtb(params);
    const double n = static_cast<double>(params.n());
    const double a = cells.p1_dot(), b = cells.p_dot1(), z = cells.p11;
    RatioMoments m{};
    m.means = {n * a, n * b, n * z};
    m.cov[0] = {n * a * (1 - a), n * (z - a * b), n * z * (1 - a)};
    m.cov[1] = {m.cov[0][1], n * b * (1 - b), n * z * (1 - b)};
    m.cov[2] = {m.cov[0][2], m.cov[1][2], n * z * (1 - z)};
    return m;
}

inline double bias_dse_under_mtb(const MtbParams& params) {
    const double n = static_cast<double>(params.n());
    const double p1 = params.p1_dot(), phi = params.phi(), c = params.c();
    return n * (1.0 - p1) * (1.0 - phi) / phi + (1.0 / phi) * (1.0 - p1) * (1.0 - c) / (p1 * c);
}

inline double var_dse_under_mtb(const MtbParams& params) {
    return detail::var_dse_formula(static_cast<double>(params.n()), params.p1_dot(), params.p(),
                                   params.phi());
}

/// First-order (delta-method) variance of the DSE under M_tb from the exact
/// multinomial covariance of (x11, x10, x01). Coincides with
/// var_dse_under_mtb at phi = 1.
inline double var_dse_delta_method(const MtbParams& params) {
    const auto cells = cell_probs_mtb(params);
    const double n = static_cast<double>(params.n());
    const std::array<double, 3> p{cells.p11, cells.p10, cells.p01};
    const double x11 = n * p[0], x1 = n * cells.p1_dot(), xd = n * cells.p_dot1();
    const std::array<double, 3> grad{(x1 + xd) / x11 - x1 * xd / (x11 * x11), xd / x11, x1 / x11};
    double v = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            v += grad[i] * grad[j] * n * ((i == j ? p[i] : 0.0) - p[i] * p[j]);
    return v;
}

// ---------------------------------------------------------------------------
// Estimators

/// Dual-system (Lincoln-Petersen) estimator x1. x.1 / x11.
inline EstimateReport dse(const DualRecordTable& t) {
    EstimateReport r;
    r.method = "dse";
    r.n_hat = dse_value(t);
    r.n_hat_integer = static_cast<count_t>(std::floor(r.n_hat));
    detail::fill_mt_nuisance(r, r.n_hat, t);
    r.se = std::sqrt(std::max(0.0, detail::var_dse_formula(r.n_hat, *r.p1_hat, *r.p_hat, 1.0)));
    return r;
}

inline EstimateReport mle_profile_mt(const DualRecordTable& t) {
    const count_t closed = profile_mt_closed_form(t);
    const count_t n = detail::local_argmax([&](count_t k) { return log_profile_mt_step(k, t); },
                                           closed, t.x0());
    EstimateReport r;
    r.method = "pl-mt";
    r.n_hat = static_cast<double>(n);
    r.n_hat_integer = n;
    detail::fill_mt_nuisance(r, r.n_hat, t);
    if (n != closed)
        r.notes.push_back("closed-form rule gives " + std::to_string(closed) +
                          "; exact kernel argmax is " + std::to_string(n));
    return r;
}

inline EstimateReport mle_mpl_mt(const DualRecordTable& t) {
    const count_t closed = mpl_mt_closed_form(t);
    const count_t lower = detail::mpl_mt_lower(t);
    const count_t n = detail::local_argmax([&](count_t k) { return log_mpl_mt_step(k, t); },
                                           closed, lower);
    EstimateReport r;
    r.method = "mpl-mt";
    r.n_hat = static_cast<double>(n);
    r.n_hat_integer = n;
    detail::fill_mt_nuisance(r, r.n_hat, t);
    if (n != closed)
        r.notes.push_back("closed-form rule gives " + std::to_string(closed) +
                          "; exact kernel argmax is " + std::to_string(n));
    return r;
}

/// The M_tb profile likelihood decreases on N > x0, so its maximizer is x0 + 1.
inline EstimateReport mle_profile_mtb(const DualRecordTable& t) {
    EstimateReport r;
    r.method = "pl-mtb";
    const count_t n = t.x0() + 1;
    r.n_hat = static_cast<double>(n);
    r.n_hat_integer = n;
    r.degenerate = true;
    r.notes.push_back("profile likelihood of M_tb is decreasing in N; estimate is the lower bound x0 + 1");
    if (t.x1_dot() > 0) detail::fill_mtb_nuisance(r, n, t);
    return r;
}

struct AdjustedSolution {
    count_t n;
    double delta;
    int iterations;
    bool cycled;
};

namespace detail {

/// Maximizes an adjusted profile likelihood whose delta may depend on N.
///
/// For N-dependent policies delta is resolved self-consistently: iterate
/// N <- argmax l(.; delta(N)) from the DSE until N repeats.
template <class StepForDelta>
AdjustedSolution solve_adjusted(const DualRecordTable& t, const DeltaPolicy& policy,
                                const GridSpec& grid, StepForDelta&& step_for) {
    auto argmax_at = [&](double delta) {
        if (!std::isfinite(delta))
            throw EstimationError(EstimationFailure::infeasible_delta, "delta is not finite");
        return grid_argmax([&](count_t k) { return step_for(k, delta); }, grid.lower, grid);
    };
    if (policy.is_fixed()) {
        const double delta = policy.evaluate(0.0, t);
        return {argmax_at(delta), delta, 1, false};
    }

    count_t n = t.x11() > 0 ? static_cast<count_t>(std::llround(dse_value(t))) : 2 * t.x0();
    n = std::max(n, grid.lower);
    std::vector<count_t> visited{n};
    for (int iter = 1; iter <= 200; ++iter) {
        const double delta = policy.evaluate(static_cast<double>(n), t);
        if (!(delta < 1.0))
            throw EstimationError(EstimationFailure::infeasible_delta,
                                  "delta policy " + policy.to_string() + " gives delta = " +
                                      format_shortest(delta) + " >= 1");
        const count_t next = argmax_at(delta);
        if (next == n) return {n, delta, iter, false};
        if (const auto it = std::find(visited.begin(), visited.end(), next); it != visited.end()) {
            const count_t pick = *std::min_element(it, visited.end());
            return {pick, policy.evaluate(static_cast<double>(pick), t), iter, true};
        }
        visited.push_back(next);
        n = next;
    }
    throw EstimationError(EstimationFailure::no_finite_maximum,
                          "self-consistent delta iteration did not settle");
}

inline void annotate_adjusted(EstimateReport& r, const AdjustedSolution& s, const DeltaPolicy& policy,
                              count_t lower) {
    r.n_hat = static_cast<double>(s.n);
    r.n_hat_integer = s.n;
    r.delta_used = s.delta;
    if (s.n == lower) {
        r.degenerate = true;
        r.notes.push_back("maximum at the lower bound; delta is below the collapse threshold");
    }
    if (!policy.is_fixed() && s.cycled)
        r.notes.push_back("self-consistent delta iteration cycled; smallest cycle member reported");
}

}  // namespace detail

/// Adjusted profile likelihood estimate of N under M_tb.
///
/// Fixed delta >= 1 has no finite maximizer and is rejected before searching.
inline EstimateReport mle_adpl_mtb(const DualRecordTable& t, const DeltaPolicy& policy,
                                   std::optional<GridSpec> grid_opt = std::nullopt) {
    if (t.x1_dot() == 0)
        throw EstimationError(EstimationFailure::undefined, "AdPL for M_tb undefined: x1. = 0");
    if (const auto* f = std::get_if<DeltaPolicy::Fixed>(&policy.variant()); f && !(f->value < 1.0))
        throw EstimationError(EstimationFailure::no_finite_maximum,
                              "adjusted profile likelihood of M_tb is increasing for delta >= 1 (delta = " +
                                  detail::format_shortest(f->value) + ")");
    GridSpec grid = grid_opt.value_or(default_grid(t));
    grid.lower = std::max(grid.lower, t.x0() + 1);
    if (grid.cap <= grid.lower) grid.cap = grid.lower + 1;
    const auto sol = detail::solve_adjusted(
        t, policy, grid, [&](count_t k, double delta) { return log_adpl_mtb_step(k, t, delta); });

    EstimateReport r;
    r.method = "adpl-mtb:" + policy.to_string();
    detail::annotate_adjusted(r, sol, policy, grid.lower);
    detail::fill_mtb_nuisance(r, sol.n, t);
    return r;
}

/// Adjusted profile likelihood estimate of N under M_t.
inline EstimateReport mle_adpl_mt(const DualRecordTable& t, const DeltaPolicy& policy,
                                  std::optional<GridSpec> grid_opt = std::nullopt) {
    GridSpec grid = grid_opt.value_or(default_grid(t));
    grid.lower = detail::mpl_mt_lower(t);
    if (grid.cap <= grid.lower) grid.cap = grid.lower + 1;
    const auto sol = detail::solve_adjusted(
        t, policy, grid, [&](count_t k, double delta) { return log_adpl_mt_step(k, t, delta); });

    EstimateReport r;
    r.method = "adpl-mt:" + policy.to_string();
    detail::annotate_adjusted(r, sol, policy, grid.lower);
    detail::fill_mt_nuisance(r, r.n_hat, t);
    return r;
}

// ---------------------------------------------------------------------------
// Method dispatch

enum class Method { dse, pl_mt, mpl_mt, pl_mtb, adpl_mtb, adpl_mt };

inline std::string_view method_name(Method m) {
    switch (m) {
    case Method::dse: return "dse";
    case Method::pl_mt: return "pl-mt";
    case Method::mpl_mt: return "mpl-mt";
    case Method::pl_mtb: return "pl-mtb";
    case Method::adpl_mtb: return "adpl-mtb";
    case Method::adpl_mt: return "adpl-mt";
    }
    return "?";
}

inline Method parse_method(std::string_view name) {
    for (Method m : {Method::dse, Method::pl_mt, Method::mpl_mt, Method::pl_mtb, Method::adpl_mtb,
                     Method::adpl_mt})
        if (method_name(m) == name) return m;
    throw DomainError("unknown method '" + std::string(name) +
                      "' (expected dse, pl-mt, mpl-mt, pl-mtb, adpl-mtb or adpl-mt)");
}

inline bool method_uses_delta(Method m) { return m == Method::adpl_mtb || m == Method::adpl_mt; }

/// A method plus, for the adjusted methods, its delta policy.
/// Text form: `<method>` or `<method>:<policy>`, e.g. `adpl-mtb:scaled:1.25`.
struct EstimatorSpec {
    Method method = Method::dse;
    std::optional<DeltaPolicy> delta;

    static EstimatorSpec parse(std::string_view text) {
        const auto colon = text.find(':');
        EstimatorSpec s;
        s.method = parse_method(text.substr(0, colon));
        if (colon != std::string_view::npos) s.delta = DeltaPolicy::parse(text.substr(colon + 1));
        s.validate();
        return s;
    }

    void validate() const {
        if (method_uses_delta(method) && !delta)
            throw DomainError(std::string(method_name(method)) + " requires a delta policy");
        if (!method_uses_delta(method) && delta)
            throw DomainError(std::string(method_name(method)) + " does not take a delta policy");
    }

    std::string label() const {
        std::string s(method_name(method));
        if (delta) s += ":" + delta->to_string();
        return s;
    }
};

inline EstimateReport estimate(const EstimatorSpec& spec, const DualRecordTable& t,
                               std::optional<GridSpec> grid = std::nullopt) {
    spec.validate();
    switch (spec.method) {
    case Method::dse: return dse(t);
    case Method::pl_mt: return mle_profile_mt(t);
    case Method::mpl_mt: return mle_mpl_mt(t);
    case Method::pl_mtb: return mle_profile_mtb(t);
    case Method::adpl_mtb: return mle_adpl_mtb(t, *spec.delta, grid);
    case Method::adpl_mt: return mle_adpl_mt(t, *spec.delta, grid);
    }
    throw DomainError("estimate: unknown method");
}

}  // namespace drs
