// Log-likelihood and pseudo-log-likelihood kernels for models M_t and M_tb.
//
// Every kernel is the natural log of a likelihood of N, up to an additive
// constant that does not depend on N. Factorial ratios N!/(N-x0)! are
// evaluated as lgamma(N+1) - lgamma(N-x0+1), and y*ln(y) is taken as 0 at
// y = 0.
//
// The *_step functions return l(N+1) - l(N) at integer N. They are derived
// in closed form so that increments far below the rounding unit of l(N)
// itself (the M_tb modified profile likelihood climbs by O(N^-3)) keep
// their sign; grid maximizers and monotonicity checks use them.
#pragma once

#include <cmath>
#include <limits>
#include <string>

#include <boost/math/special_functions/digamma.hpp>

#include "drs/core.hpp"

namespace drs {

namespace detail {

inline double xlogx(double y) { return y == 0.0 ? 0.0 : y * std::log(y); }

inline double log_falling(double n, double x0) {
    return std::lgamma(n + 1.0) - std::lgamma(n - x0 + 1.0);
}

inline void require(bool ok, const char* what) {
    if (!ok) throw DomainError(what);
}

/// x*log1p(1/x) - 1, with the limit -1 at x = 0.
inline double xlog1p_inv_m1(double x) {
    if (x == 0.0) return -1.0;
    if (x < 32.0) return x * std::log1p(1.0 / x) - 1.0;
    // sum_{k>=1} (-1)^k / ((k+1) x^k)
    const double u = 1.0 / x;
    double term = 1.0, sum = 0.0;
    for (int k = 1; k <= 24; ++k) {
        term *= -u;
        sum += term / (k + 1);
    }
    return sum;
}

/// x*log1p(1/x) - 1 + log1p(1/x)/2 for x >= 1. Behaves like 1/(12 x^2).
inline double mpl_tail(double x) {
    if (x < 32.0) return x * std::log1p(1.0 / x) - 1.0 + 0.5 * std::log1p(1.0 / x);
    // sum_{k>=2} (-1)^k (k-1) / (2k(k+1)) x^-k
    const double u = 1.0 / x;
    double power = u, sum = 0.0;
    for (int k = 2; k <= 26; ++k) {
        power *= u;
        const double coef = static_cast<double>(k - 1) / (2.0 * k * (k + 1));
        sum += (k % 2 == 0 ? coef : -coef) * power;
    }
    return sum;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Full likelihoods

/// Log of the M_t binomial-product likelihood L_t(N, p1., p.1).
inline double loglik_mt_full(const MtParams& params, const DualRecordTable& t) {
    const double n = static_cast<double>(params.n());
    detail::require(n >= static_cast<double>(t.x0()), "loglik_mt_full: N < x0");
    const double a = params.p1_dot(), b = params.p_dot1();
    const double x1 = static_cast<double>(t.x1_dot()), xd = static_cast<double>(t.x_dot1());
    return detail::log_falling(n, static_cast<double>(t.x0())) + x1 * std::log(a) +
           xd * std::log(b) + (n - x1) * std::log1p(-a) + (n - xd) * std::log1p(-b);
}

/// Log of the M_tb likelihood in the (N, p1., p, c) parametrization.
inline double loglik_mtb_recapture(double n, double p1_dot, double p, double c,
                                   const DualRecordTable& t) {
    const double x0 = static_cast<double>(t.x0());
    detail::require(std::isfinite(n) && n > x0, "loglik_mtb_recapture: requires N > x0");
    detail::require(detail::open_unit(p1_dot) && detail::open_unit(p) && detail::open_unit(c),
                    "loglik_mtb_recapture: probabilities must lie in (0,1)");
    const double x1 = static_cast<double>(t.x1_dot());
    return detail::log_falling(n, x0) + static_cast<double>(t.x11()) * std::log(c) +
           x1 * std::log(p1_dot) + static_cast<double>(t.x01()) * std::log(p) +
           (n - x1) * std::log1p(-p1_dot) + (n - x0) * std::log1p(-p) +
           static_cast<double>(t.x10()) * std::log1p(-c);
}

/// Log of the M_tb likelihood in the (N, p1., p, phi) parametrization.
inline double loglik_mtb_behavioral(double n, double p1_dot, double p, double phi,
                                    const DualRecordTable& t) {
    const double x0 = static_cast<double>(t.x0());
    detail::require(std::isfinite(n) && n > x0, "loglik_mtb_behavioral: requires N > x0");
    detail::require(detail::open_unit(p1_dot) && detail::open_unit(p) && phi > 0.0 &&
                        phi * p < 1.0,
                    "loglik_mtb_behavioral: invalid (p1., p, phi)");
    const double x1 = static_cast<double>(t.x1_dot());
    return detail::log_falling(n, x0) + static_cast<double>(t.x11()) * std::log(phi) +
           x1 * std::log(p1_dot) + static_cast<double>(t.x_dot1()) * std::log(p) +
           (n - x1) * std::log1p(-p1_dot) + (n - x0) * std::log1p(-p) +
           static_cast<double>(t.x10()) * std::log1p(-phi * p);
}

inline double loglik_mtb_full(const MtbParams& params, const DualRecordTable& t) {
    return loglik_mtb_behavioral(static_cast<double>(params.n()), params.p1_dot(), params.p(),
                                 params.phi(), t);
}

// ---------------------------------------------------------------------------
// Profile and pseudo-likelihood kernels

inline double log_profile_mt(double n, const DualRecordTable& t) {
    const double x0 = static_cast<double>(t.x0());
    detail::require(std::isfinite(n) && n >= x0, "log_profile_mt: requires N >= x0");
    return detail::log_falling(n, x0) + detail::xlogx(n - static_cast<double>(t.x1_dot())) +
           detail::xlogx(n - static_cast<double>(t.x_dot1())) - 2.0 * n * std::log(n);
}

inline double log_profile_mtb(double n, const DualRecordTable& t) {
    const double x0 = static_cast<double>(t.x0());
    detail::require(std::isfinite(n) && n > x0, "log_profile_mtb: requires N > x0");
    return detail::log_falling(n, x0) + (n - x0) * std::log(n - x0) - n * std::log(n);
}

/// Modified profile likelihood of M_t (identical to its Severini approximation).
/// Equals -infinity at N = x1. or N = x.1.
inline double log_mpl_mt(double n, const DualRecordTable& t) {
    const double a = n - static_cast<double>(t.x1_dot());
    const double b = n - static_cast<double>(t.x_dot1());
    const double pl = log_profile_mt(n, t);
    if (a == 0.0 || b == 0.0) return -std::numeric_limits<double>::infinity();
    return pl + 0.5 * std::log(a) + 0.5 * std::log(b) - std::log(n);
}

inline double log_mpl_mtb(double n, const DualRecordTable& t) {
    const double x0 = static_cast<double>(t.x0());
    return log_profile_mtb(n, t) + 0.5 * std::log1p(-x0 / n);
}

/// Adjusted profile likelihood of M_tb with adjustment coefficient delta.
inline double log_adpl_mtb(double n, const DualRecordTable& t, double delta) {
    const double x0 = static_cast<double>(t.x0());
    const double x1 = static_cast<double>(t.x1_dot());
    detail::require(std::isfinite(n) && n > x0 && n > x1, "log_adpl_mtb: requires N > x0");
    detail::require(std::isfinite(delta), "log_adpl_mtb: delta must be finite");
    return detail::log_falling(n, x0) + (delta - n - 1.5) * std::log(n) +
           (delta - 1.0) * std::log(n - x1) + (n - x0 + 0.5) * std::log(n - x0);
}

inline double log_adpl_mt(double n, const DualRecordTable& t, double delta) {
    detail::require(std::isfinite(delta), "log_adpl_mt: delta must be finite");
    return log_mpl_mt(n, t) + 2.0 * (delta - 1.0) * std::log(n);
}

// ---------------------------------------------------------------------------
// First differences l(N+1) - l(N) at integer N

inline double log_profile_mt_step(count_t n, const DualRecordTable& t) {
    detail::require(n >= t.x0(), "log_profile_mt_step: requires N >= x0");
    const double a = static_cast<double>(n - t.x1_dot());
    const double b = static_cast<double>(n - t.x_dot1());
    const double m = static_cast<double>(n - t.x0());
    const double nn = static_cast<double>(n);
    // (A+1)(B+1) - (M+1)(N+1) = x1. x.1 - (N+1) x11
    const double num = static_cast<double>(t.x1_dot() * t.x_dot1() - (n + 1) * t.x11());
    return std::log1p(num / ((m + 1.0) * (nn + 1.0))) + detail::xlog1p_inv_m1(a) +
           detail::xlog1p_inv_m1(b) - 2.0 * detail::xlog1p_inv_m1(nn);
}

inline double log_mpl_mt_step(count_t n, const DualRecordTable& t) {
    const double a = static_cast<double>(n - t.x1_dot());
    const double b = static_cast<double>(n - t.x_dot1());
    const double pl = log_profile_mt_step(n, t);
    if (a == 0.0 || b == 0.0) return std::numeric_limits<double>::infinity();
    return pl + 0.5 * std::log1p(1.0 / a) + 0.5 * std::log1p(1.0 / b) -
           std::log1p(1.0 / static_cast<double>(n));
}

inline double log_profile_mtb_step(count_t n, const DualRecordTable& t) {
    detail::require(n > t.x0(), "log_profile_mtb_step: requires N > x0");
    return detail::xlog1p_inv_m1(static_cast<double>(n - t.x0())) -
           detail::xlog1p_inv_m1(static_cast<double>(n));
}

inline double log_mpl_mtb_step(count_t n, const DualRecordTable& t) {
    detail::require(n > t.x0(), "log_mpl_mtb_step: requires N > x0");
    return detail::mpl_tail(static_cast<double>(n - t.x0())) -
           detail::mpl_tail(static_cast<double>(n));
}

inline double log_adpl_mtb_step(count_t n, const DualRecordTable& t, double delta) {
    const double nn = static_cast<double>(n);
    return log_mpl_mtb_step(n, t) +
           (delta - 1.0) * (std::log1p(1.0 / nn) +
                            std::log1p(1.0 / static_cast<double>(n - t.x1_dot())));
}

inline double log_adpl_mt_step(count_t n, const DualRecordTable& t, double delta) {
    return log_mpl_mt_step(n, t) +
           2.0 * (delta - 1.0) * std::log1p(1.0 / static_cast<double>(n));
}

/// d/dN of log_adpl_mtb treating N as real (digamma form). Diagnostic only.
inline double adpl_mtb_score(double n, const DualRecordTable& t, double delta) {
    const double x0 = static_cast<double>(t.x0());
    const double x1 = static_cast<double>(t.x1_dot());
    detail::require(std::isfinite(n) && n > x0, "adpl_mtb_score: requires N > x0");
    using boost::math::digamma;
    return digamma(n + 1.0) - digamma(n - x0 + 1.0) - std::log(n) + (delta - 1.5 - n) / n +
           (delta - 1.0) / (n - x1) + std::log(n - x0) + (n - x0 + 0.5) / (n - x0);
}

}  // namespace drs
