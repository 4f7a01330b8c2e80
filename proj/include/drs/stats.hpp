// Small descriptive statistics used by the simulation and bootstrap code.
#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "drs/core.hpp"

namespace drs::stats {

inline double mean(std::span<const double> xs) {
    if (xs.empty()) throw DomainError("mean: empty sample");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

/// Sample standard deviation (denominator n - 1).
inline double sd(std::span<const double> xs) {
    if (xs.size() < 2) throw DomainError("sd: need at least two values");
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

inline double rmse(std::span<const double> xs, double truth) {
    if (xs.empty()) throw DomainError("rmse: empty sample");
    double ss = 0.0;
    for (double x : xs) ss += (x - truth) * (x - truth);
    return std::sqrt(ss / static_cast<double>(xs.size()));
}

/// Empirical quantile with linear interpolation between order statistics
/// (position (n - 1) * prob in the sorted sample).
inline double quantile(std::span<const double> xs, double prob) {
    if (xs.empty()) throw DomainError("quantile: empty sample");
    if (!(prob >= 0.0 && prob <= 1.0)) throw DomainError("quantile: prob outside [0,1]");
    std::vector<double> sorted(xs.begin(), xs.end());
    std::sort(sorted.begin(), sorted.end());
    const double pos = prob * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

/// Ordinary least-squares slope of y on x.
inline double ols_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("ols_slope: need >= 2 paired points");
    const double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw DomainError("ols_slope: x has no spread");
    return sxy / sxx;
}

}  // namespace drs::stats
