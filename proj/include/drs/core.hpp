// Dual-record system domain types and cell-probability bookkeeping.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace drs {

using count_t = std::int64_t;

/// Raised when an argument lies outside the domain of a function or type.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

enum class EstimationFailure {
    undefined,         // estimator has no value for this table (e.g. x11 = 0)
    infeasible_delta,  // delta policy produced an unusable adjustment coefficient
    no_finite_maximum  // likelihood still increasing at the grid ceiling
};

inline const char* to_string(EstimationFailure kind) {
    switch (kind) {
    case EstimationFailure::undefined: return "undefined";
    case EstimationFailure::infeasible_delta: return "infeasible-delta";
    case EstimationFailure::no_finite_maximum: return "no-finite-maximum";
    }
    return "unknown";
}

class EstimationError : public std::runtime_error {
  public:
    EstimationError(EstimationFailure kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    EstimationFailure kind() const noexcept { return kind_; }

  private:
    EstimationFailure kind_;
};

/// Observed 2x2 incomplete contingency table of a dual-record system.
///
/// x11 is caught by both lists, x10 by list 1 only and x01 by list 2 only.
/// The missed-by-both cell x00 is unobservable.
class DualRecordTable {
  public:
    DualRecordTable(count_t x11, count_t x10, count_t x01)
        : x11_(x11), x10_(x10), x01_(x01) {
        if (x11 < 0 || x10 < 0 || x01 < 0)
            throw DomainError("DualRecordTable: counts must be non-negative");
        if (x11 + x10 + x01 == 0)
            throw DomainError("DualRecordTable: all-zero table has no information");
    }

    count_t x11() const noexcept { return x11_; }
    count_t x10() const noexcept { return x10_; }
    count_t x01() const noexcept { return x01_; }
    count_t x1_dot() const noexcept { return x11_ + x10_; }
    count_t x_dot1() const noexcept { return x11_ + x01_; }
    count_t x0() const noexcept { return x11_ + x10_ + x01_; }

    friend bool operator==(const DualRecordTable&, const DualRecordTable&) = default;

  private:
    count_t x11_;
    count_t x10_;
    count_t x01_;
};

namespace detail {
inline bool open_unit(double p) { return p > 0.0 && p < 1.0; }
}  // namespace detail

/// Independence model M_t: list capture probabilities p1. and p.1.
class MtParams {
  public:
    MtParams(count_t n, double p1_dot, double p_dot1) : n_(n), p1_dot_(p1_dot), p_dot1_(p_dot1) {
        if (n < 1) throw DomainError("MtParams: N must be >= 1");
        if (!detail::open_unit(p1_dot) || !detail::open_unit(p_dot1))
            throw DomainError("MtParams: capture probabilities must lie in (0,1)");
    }
    count_t n() const noexcept { return n_; }
    double p1_dot() const noexcept { return p1_dot_; }
    double p_dot1() const noexcept { return p_dot1_; }

  private:
    count_t n_;
    double p1_dot_;
    double p_dot1_;
};

/// Behavioural-response model M_tb.
///
/// p is the list-2 capture probability of an individual missed by list 1,
/// phi the behavioural effect, and c = phi * p the recapture probability.
class MtbParams {
  public:
    MtbParams(count_t n, double p1_dot, double p, double phi)
        : n_(n), p1_dot_(p1_dot), p_(p), phi_(phi) {
        if (n < 1) throw DomainError("MtbParams: N must be >= 1");
        if (!detail::open_unit(p1_dot)) throw DomainError("MtbParams: p1. must lie in (0,1)");
        if (!detail::open_unit(p)) throw DomainError("MtbParams: p must lie in (0,1)");
        if (!(phi > 0.0) || !std::isfinite(phi)) throw DomainError("MtbParams: phi must be positive");
        if (!(phi * p < 1.0)) throw DomainError("MtbParams: recapture probability phi*p must be < 1");
    }
    count_t n() const noexcept { return n_; }
    double p1_dot() const noexcept { return p1_dot_; }
    double p() const noexcept { return p_; }
    double phi() const noexcept { return phi_; }
    double c() const noexcept { return phi_ * p_; }

    MtbParams with_n(count_t n) const { return {n, p1_dot_, p_, phi_}; }

  private:
    count_t n_;
    double p1_dot_;
    double p_;
    double phi_;
};

struct CellProbabilities {
    double p11;
    double p10;
    double p01;
    double p00;

    double p1_dot() const noexcept { return p11 + p10; }
    double p_dot1() const noexcept { return p11 + p01; }
    double p0_dot() const noexcept { return p01 + p00; }
};

inline CellProbabilities cell_probs_mtb(const MtbParams& params) {
    const double p1 = params.p1_dot();
    const double c = params.c();
    const double p = params.p();
    return {p1 * c, p1 * (1.0 - c), (1.0 - p1) * p, (1.0 - p1) * (1.0 - p)};
}

inline CellProbabilities cell_probs_mt(const MtParams& params) {
    const double a = params.p1_dot();
    const double b = params.p_dot1();
    return {a * b, a * (1.0 - b), (1.0 - a) * b, (1.0 - a) * (1.0 - b)};
}

/// Generative p for a population given by its marginals (p1., p.1) and phi.
///
/// Solves p.1 = p1. * phi * p + (1 - p1.) * p.
inline double p_from_marginals(double p1_dot, double p_dot1, double phi) {
    if (!detail::open_unit(p1_dot) || !detail::open_unit(p_dot1))
        throw DomainError("p_from_marginals: marginals must lie in (0,1)");
    if (!(phi > 0.0) || !std::isfinite(phi))
        throw DomainError("p_from_marginals: phi must be positive");
    const double p = p_dot1 / (1.0 - p1_dot + phi * p1_dot);
    if (!detail::open_unit(p) || !(phi * p < 1.0))
        throw DomainError("p_from_marginals: infeasible population (p or phi*p outside (0,1))");
    return p;
}

/// E(x0) = N (1 - p00).
inline double expected_distinct(const MtbParams& params) {
    return static_cast<double>(params.n()) * (1.0 - cell_probs_mtb(params).p00);
}

/// Single-dataset estimation output.
struct EstimateReport {
    std::string method;
    double n_hat = 0.0;
    std::optional<count_t> n_hat_integer;
    std::optional<double> p1_hat;
    std::optional<double> p_hat;
    std::optional<double> c_hat;
    std::optional<double> phi_hat;
    std::optional<double> se;
    std::optional<double> ci_low;
    std::optional<double> ci_high;
    std::optional<double> delta_used;
    bool degenerate = false;  // estimate sits on the domain lower bound
    std::vector<std::string> notes;
};

}  // namespace drs
