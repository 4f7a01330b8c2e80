#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include <boost/multiprecision/cpp_int.hpp>

#include "drs/estimators.hpp"
#include "drs/likelihood.hpp"
#include "generators.hpp"

using namespace drs;
using boost::multiprecision::cpp_int;

namespace {

/// log N!/(N-x0)! summed term by term.
double log_falling_sum(count_t n, count_t x0) {
    double s = 0.0;
    for (count_t i = 0; i < x0; ++i) s += std::log(static_cast<double>(n - i));
    return s;
}

double xlx(double v) { return v == 0.0 ? 0.0 : v * std::log(v); }

/// Profile kernel of M_t rebuilt from the summed falling factorial.
double profile_mt_by_sum(count_t n, const DualRecordTable& t) {
    const double nn = static_cast<double>(n);
    return log_falling_sum(n, t.x0()) + xlx(nn - t.x1_dot()) + xlx(nn - t.x_dot1()) - 2.0 * xlx(nn);
}

double adpl_mtb_by_sum(count_t n, const DualRecordTable& t, double d) {
    const double nn = static_cast<double>(n), m = nn - t.x0();
    return log_falling_sum(n, t.x0()) + (d - nn - 1.5) * std::log(nn) + (d - 1) * std::log(nn - t.x1_dot()) +
           (m + 0.5) * std::log(m);
}

cpp_int ipow(count_t base, count_t e) {
    if (e == 0) return 1;
    return boost::multiprecision::pow(cpp_int(base), static_cast<unsigned>(e));
}

/// Exact sign of L^P(N+1) - L^P(N) for the M_t profile likelihood.
int exact_profile_mt_sign(count_t n, const DualRecordTable& t, bool squared_mpl = false) {
    const count_t a = n - t.x1_dot(), b = n - t.x_dot1(), m = n - t.x0();
    cpp_int lhs = cpp_int(n + 1) * ipow(a + 1, a + 1) * ipow(b + 1, b + 1) * ipow(n, 2 * n);
    cpp_int rhs = cpp_int(m + 1) * ipow(a, a) * ipow(b, b) * ipow(n + 1, 2 * n + 2);
    if (squared_mpl) {
        // [L^MP(N+1)/L^MP(N)]^2 = [L^P ratio]^2 (A+1)(B+1) N^2 / (A B (N+1)^2)
        lhs = lhs * lhs * cpp_int(a + 1) * cpp_int(b + 1) * cpp_int(n) * cpp_int(n);
        rhs = rhs * rhs * cpp_int(a) * cpp_int(b) * cpp_int(n + 1) * cpp_int(n + 1);
    }
    return lhs > rhs ? 1 : (lhs < rhs ? -1 : 0);
}

}  // namespace

// ---------------------------------------------------------------------------
// Full likelihoods

TEST(FullLikelihood, MtProfilesToKernelPlusConstant) {
    gen::Gen g(10);
    for (int i = 0; i < 100; ++i) {
        const auto t = g.table(1, 100);
        const double k = xlx(static_cast<double>(t.x1_dot())) + xlx(static_cast<double>(t.x_dot1()));
        for (count_t n = t.x0() + 1; n < t.x0() + 400; n += 37) {
            const double nn = static_cast<double>(n);
            const MtParams mle(n, t.x1_dot() / nn, t.x_dot1() / nn);
            EXPECT_NEAR(loglik_mt_full(mle, t) - log_profile_mt(nn, t), k, 1e-8 * std::abs(k) + 1e-8);
        }
    }
}

TEST(FullLikelihood, MtConditionalMleBeatsProbabilityGrid) {
    const DualRecordTable t(50, 30, 20);
    const MtParams mle(200, 80.0 / 200, 70.0 / 200);
    const double best = loglik_mt_full(mle, t);
    for (int i = 1; i <= 50; ++i)
        for (int j = 1; j <= 50; ++j)
            EXPECT_LE(loglik_mt_full({200, i / 51.0, j / 51.0}, t), best + 1e-12);
}

TEST(FullLikelihood, MtLocalOptimality) {
    const DualRecordTable t(50, 30, 20);
    const double at = loglik_mt_full({112, 80.0 / 112, 70.0 / 112}, t);
    EXPECT_TRUE(std::isfinite(at));
    EXPECT_LT(loglik_mt_full({112, 80.0 / 112 + 0.01, 70.0 / 112}, t), at);
    EXPECT_LT(loglik_mt_full({112, 80.0 / 112 - 0.01, 70.0 / 112}, t), at);
}

TEST(FullLikelihood, MtRejectsNBelowObserved) {
    EXPECT_THROW(loglik_mt_full({99, 0.5, 0.5}, DualRecordTable(50, 30, 20)), DomainError);
}

TEST(FullLikelihood, MtbParametrizationsAgree) {
    gen::Gen g(11);
    for (int i = 0; i < 100; ++i) {
        const auto t = g.table(0, 80);
        const auto p = g.mtb(t.x0() + 1, t.x0() + 500);
        EXPECT_NEAR(loglik_mtb_recapture(static_cast<double>(p.n()), p.p1_dot(), p.p(), p.c(), t),
                    loglik_mtb_full(p, t), 1e-10 * (1.0 + std::abs(loglik_mtb_full(p, t))));
    }
}

TEST(FullLikelihood, MtbProfilesToKernelPlusConstant) {
    gen::Gen g(12);
    for (int i = 0; i < 100; ++i) {
        const auto t = g.table(1, 100);
        const double x1 = static_cast<double>(t.x1_dot());
        double constant = std::numeric_limits<double>::quiet_NaN();
        for (count_t n = t.x0() + 1; n < t.x0() + 500; n += 41) {
            const double nn = static_cast<double>(n);
            const double v = loglik_mtb_recapture(nn, x1 / nn, t.x01() / (nn - x1), t.x11() / x1, t) -
                             log_profile_mtb(nn, t);
            if (std::isnan(constant)) constant = v;
            EXPECT_NEAR(v, constant, 1e-8 * (1.0 + std::abs(constant)));
        }
    }
}

TEST(FullLikelihood, MtbProfileInvariantAcrossParametrizations) {
    // Maximizing the (p1., p, phi) form over a grid approaches the kernel
    // obtained from the (p1., p, c) conditional MLEs.
    const DualRecordTable t(50, 30, 20);
    for (count_t n : {120, 200}) {
        const double nn = static_cast<double>(n), x1 = 80.0;
        const double exact = loglik_mtb_recapture(nn, x1 / nn, 20.0 / (nn - x1), 50.0 / x1, t);
        double best = -std::numeric_limits<double>::infinity();
        for (int i = 1; i < 100; ++i)
            for (int j = 1; j < 100; ++j)
                for (int k = 1; k < 100; ++k) {
                    const double p1 = i / 100.0, p = j / 100.0, c = k / 100.0;
                    best = std::max(best, loglik_mtb_behavioral(nn, p1, p, c / p, t));
                }
        EXPECT_LE(best, exact + 1e-9);
        EXPECT_GE(best, exact - 0.05);
    }
}

TEST(FullLikelihood, MtbProfileDecreasesBetweenTwoSizes) {
    const DualRecordTable t(50, 30, 20);
    EXPECT_GT(log_profile_mtb(101, t), log_profile_mtb(200, t));
}

// ---------------------------------------------------------------------------
// Kernels against independent evaluation

TEST(Kernels, ProfileMtMatchesSummedFactorials) {
    gen::Gen g(13);
    for (int i = 0; i < 200; ++i) {
        const auto t = g.table(0, 60);
        for (count_t n = t.x0(); n < t.x0() + 300; n += 13)
            EXPECT_NEAR(log_profile_mt(static_cast<double>(n), t), profile_mt_by_sum(n, t),
                        1e-9 * (1.0 + std::abs(profile_mt_by_sum(n, t))));
    }
}

TEST(Kernels, AdplMtbMatchesSummedFactorials) {
    gen::Gen g(14);
    for (int i = 0; i < 200; ++i) {
        const auto t = g.table(0, 60);
        const double d = g.real(-1.0, 1.5);
        for (count_t n = t.x0() + 1; n < t.x0() + 300; n += 17)
            EXPECT_NEAR(log_adpl_mtb(static_cast<double>(n), t, d), adpl_mtb_by_sum(n, t, d),
                        1e-9 * (1.0 + std::abs(adpl_mtb_by_sum(n, t, d))));
    }
}

TEST(Kernels, ProfileMtbDependsOnlyOnObservedTotal) {
    const DualRecordTable a(50, 30, 20), b(40, 35, 25);
    for (double n = 101; n < 2000; n += 97) EXPECT_DOUBLE_EQ(log_profile_mtb(n, a), log_profile_mtb(n, b));
}

TEST(Kernels, MplMtbIdentity) {
    gen::Gen g(15);
    for (int i = 0; i < 1000; ++i) {
        const auto t = g.table(0, 200);
        const double n = t.x0() + g.real(0.5, 5000.0);
        EXPECT_NEAR(log_mpl_mtb(n, t) - log_profile_mtb(n, t), 0.5 * std::log(1.0 - t.x0() / n), 1e-12);
    }
}

TEST(Kernels, MplMtCorrectionIsConstantShift) {
    gen::Gen g(16);
    for (int i = 0; i < 200; ++i) {
        const auto t = g.table(1, 200);
        for (double n = t.x0() + 1.0; n < t.x0() + 3000; n += 211) {
            const double corr = 0.5 * std::log(n - t.x1_dot()) + 0.5 * std::log(n - t.x_dot1()) - std::log(n);
            EXPECT_NEAR(log_mpl_mt(n, t) - log_profile_mt(n, t) - corr, 0.0, 1e-10);
        }
    }
}

TEST(Kernels, MplMtIsMinusInfinityAtMarginBoundary) {
    const DualRecordTable t(5, 5, 0);  // x.1 = 5, x1. = 10 = x0
    EXPECT_EQ(log_mpl_mt(10.0, t), -std::numeric_limits<double>::infinity());
}

TEST(Kernels, AdplMtbIdentities) {
    gen::Gen g(17);
    for (int i = 0; i < 500; ++i) {
        const auto t = g.table(0, 200);
        const double n = t.x0() + g.real(0.5, 3000.0), d = g.real(-1.0, 2.0);
        const double rhs = log_mpl_mtb(n, t) + 2.0 * (d - 1.0) * std::log(n) +
                           (d - 1.0) * std::log1p(-static_cast<double>(t.x1_dot()) / n);
        EXPECT_NEAR(log_adpl_mtb(n, t, d), rhs, 1e-10 * (1.0 + std::abs(rhs)));
        EXPECT_NEAR(log_adpl_mtb(n, t, 1.0), log_mpl_mtb(n, t), 1e-10 * (1.0 + std::abs(rhs)));
    }
}

TEST(Kernels, AdplMtAtUnitDeltaIsMpl) {
    const DualRecordTable t(50, 30, 20);
    for (double n = 100; n < 1000; n += 7) EXPECT_DOUBLE_EQ(log_adpl_mt(n, t, 1.0), log_mpl_mt(n, t));
}

TEST(Kernels, DomainErrors) {
    const DualRecordTable t(50, 30, 20);
    EXPECT_THROW(log_profile_mt(99.0, t), DomainError);
    EXPECT_THROW(log_profile_mtb(100.0, t), DomainError);
    EXPECT_THROW(log_adpl_mtb(100.0, t, 0.5), DomainError);
    EXPECT_THROW(log_adpl_mtb(150.0, t, std::nan("")), DomainError);
}

// ---------------------------------------------------------------------------
// First differences

TEST(Steps, AgreeWithKernelDifferencesWhereResolvable) {
    gen::Gen g(18);
    for (int i = 0; i < 200; ++i) {
        const auto t = g.table(1, 100);
        const double d = g.real(0.0, 1.2);
        for (count_t n = t.x0() + 1; n < t.x0() + 200; n += 7) {
            const double nn = static_cast<double>(n);
            const double tol = 1e-9 * (1.0 + std::abs(log_profile_mt(nn, t)));
            EXPECT_NEAR(log_profile_mt_step(n, t), log_profile_mt(nn + 1, t) - log_profile_mt(nn, t), tol);
            EXPECT_NEAR(log_mpl_mt_step(n, t), log_mpl_mt(nn + 1, t) - log_mpl_mt(nn, t), tol);
            EXPECT_NEAR(log_profile_mtb_step(n, t), log_profile_mtb(nn + 1, t) - log_profile_mtb(nn, t), tol);
            EXPECT_NEAR(log_mpl_mtb_step(n, t), log_mpl_mtb(nn + 1, t) - log_mpl_mtb(nn, t), tol);
            EXPECT_NEAR(log_adpl_mtb_step(n, t, d), log_adpl_mtb(nn + 1, t, d) - log_adpl_mtb(nn, t, d), tol);
            EXPECT_NEAR(log_adpl_mt_step(n, t, d), log_adpl_mt(nn + 1, t, d) - log_adpl_mt(nn, t, d), tol);
        }
    }
}

TEST(Steps, ProfileMtSignMatchesExactArithmetic) {
    gen::Gen g(19);
    int compared = 0;
    for (int i = 0; i < 60; ++i) {
        const auto t = g.table(1, 12);
        for (count_t n = t.x0(); n < t.x0() + 120; ++n) {
            const int exact = exact_profile_mt_sign(n, t);
            if (exact == 0) continue;
            EXPECT_EQ(log_profile_mt_step(n, t) > 0.0 ? 1 : -1, exact) << "N=" << n;
            ++compared;
        }
    }
    EXPECT_GT(compared, 5000);
}

TEST(Steps, MplMtSignMatchesExactArithmetic) {
    gen::Gen g(20);
    for (int i = 0; i < 60; ++i) {
        const auto t = g.table(1, 12);
        for (count_t n = t.x0(); n < t.x0() + 120; ++n) {
            if (n == t.x1_dot() || n == t.x_dot1()) continue;  // ratio from a hard zero
            const int exact = exact_profile_mt_sign(n, t, true);
            if (exact == 0) continue;
            EXPECT_EQ(log_mpl_mt_step(n, t) > 0.0 ? 1 : -1, exact) << "N=" << n;
        }
    }
}

TEST(Steps, ProfileMtRisesBelowOracleArgmax) {
    const DualRecordTable t(50, 30, 20);
    for (count_t n = 100; n < 111; ++n) EXPECT_GT(log_profile_mt_step(n, t), 0.0) << n;
    EXPECT_LT(log_profile_mt_step(111, t), 0.0);
}

TEST(Steps, MplMtbPositiveAndCubicDecay) {
    const DualRecordTable t(50, 30, 20);
    double prev = 0.0;
    for (count_t n : {1000, 10000, 100000}) {
        const double s = log_mpl_mtb_step(n, t);
        EXPECT_GT(s, 0.0);
        // h(M) - h(N) ~ (1/12)(M^-2 - N^-2) ~ x0 / (6 N^3)
        EXPECT_NEAR(s * std::pow(static_cast<double>(n), 3), 100.0 / 6.0, 100.0 / 6.0 * 0.35);
        if (prev > 0.0) { EXPECT_LT(s, prev); }
        prev = s;
    }
}

TEST(Steps, MonotonicityCertificatesOnRandomTables) {
    gen::Gen g(21);
    for (int i = 0; i < 100; ++i) {
        const auto t = g.table(1, 200);
        int bad_pl = 0, bad_mpl = 0;
        for (count_t n = t.x0() + 1; n < 100000; ++n) {
            bad_pl += log_profile_mtb_step(n, t) >= 0.0;
            bad_mpl += log_mpl_mtb_step(n, t) <= 0.0;
        }
        EXPECT_EQ(bad_pl, 0);
        EXPECT_EQ(bad_mpl, 0);
    }
}

// The modified profile of M_t decays like N^-x11, so the N^{2(delta-1)} factor
// wins only once delta > 1 + x11/2.
TEST(Steps, AdplMtTailFollowsX11Threshold) {
    const DualRecordTable t(50, 30, 20);
    for (count_t n = 10000; n < 1000000; ++n) {
        ASSERT_GT(log_adpl_mt_step(n, t, 27.0), 0.0) << n;
        ASSERT_LT(log_adpl_mt_step(n, t, 2.0), 0.0) << n;
    }
}

TEST(Steps, AdplMtbAtUnitDeltaNeverTurnsDown) {
    const DualRecordTable t(50, 30, 20);
    for (count_t n = 101; n < 1000000; ++n) ASSERT_GT(log_adpl_mtb_step(n, t, 1.0), 0.0) << n;
}

// ---------------------------------------------------------------------------
// Ordering and score

TEST(Ordering, ProfileArgmaxNeverExceedsModifiedArgmax) {
    for (const auto& t : gen::random_tables()) {
        const auto pl = *mle_profile_mt(t).n_hat_integer;
        const auto mpl = *mle_mpl_mt(t).n_hat_integer;
        EXPECT_LE(pl, mpl);
    }
}

TEST(Ordering, ModifiedStepDominatesProfileStep) {
    gen::Gen g(22);
    for (int i = 0; i < 100; ++i) {
        const auto t = g.table(1, 200);
        for (count_t n = t.x0(); n <= 2000; ++n) EXPECT_GE(log_mpl_mt_step(n, t), log_profile_mt_step(n, t));
    }
}

TEST(Score, MatchesCentralDifference) {
    gen::Gen g(23);
    for (int i = 0; i < 200; ++i) {
        const auto t = g.table(1, 100);
        const double d = g.real(0.0, 1.0);
        const double n = t.x0() + g.real(2.0, 500.0), h = 1e-4;
        const double fd = (log_adpl_mtb(n + h, t, d) - log_adpl_mtb(n - h, t, d)) / (2 * h);
        EXPECT_NEAR(adpl_mtb_score(n, t, d), fd, 1e-5 * (1.0 + std::abs(log_adpl_mtb(n, t, d))));
    }
}
