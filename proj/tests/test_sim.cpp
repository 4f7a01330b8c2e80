#include <gtest/gtest.h>

#include <cmath>

#include "drs/io.hpp"
#include "drs/random.hpp"
#include "drs/sim.hpp"

using namespace drs;

TEST(Random, StreamKeysAreDistinctAndStable) {
    EXPECT_EQ(stream_key(42, {7}), stream_key(42, {7}));
    EXPECT_NE(stream_key(42, {7}), stream_key(42, {8}));
    EXPECT_NE(stream_key(42, {1, 2}), stream_key(42, {2, 1}));
    CounterEngine a(stream_key(1, {})), b(stream_key(1, {}));
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(Random, BinomialEdgeCases) {
    CounterEngine e(1);
    EXPECT_EQ(draw_binomial(e, 10, 0.0), 0);
    EXPECT_EQ(draw_binomial(e, 10, 1.0), 10);
    EXPECT_EQ(draw_binomial(e, 0, 0.5), 0);
}

TEST(Random, MultinomialCellMomentsWithinFourSigma) {
    const auto cells = cell_probs_mtb({500, 0.5, 0.57778, 1.25});
    const std::array<double, 4> p{cells.p11, cells.p10, cells.p01, cells.p00};
    const int reps = 100000;
    std::array<double, 4> sum{};
    for (int r = 0; r < reps; ++r) {
        CounterEngine e(stream_key(3, {static_cast<std::uint64_t>(r)}));
        const auto x = draw_cells(e, 500, cells);
        EXPECT_EQ(x[0] + x[1] + x[2] + x[3], 500);
        for (int k = 0; k < 4; ++k) sum[k] += static_cast<double>(x[k]);
    }
    for (int k = 0; k < 4; ++k) {
        const double mean = sum[k] / reps, expect = 500 * p[k];
        const double se = std::sqrt(500 * p[k] * (1 - p[k]) / reps);
        EXPECT_NEAR(mean, expect, 4 * se) << k;
    }
}

TEST(SampleTable, NearCompleteCapture) {
    const PopulationSpec pop{"full", 500, 0.999, 0.999, 1.0};
    for (std::uint64_t s = 0; s < 50; ++s) EXPECT_GE(sample_table(pop, stream_key(42, {s})).x0(), 490);
}

TEST(SampleTable, Deterministic) {
    const auto pop = table2_populations()[0];
    EXPECT_EQ(sample_table(pop, stream_key(42, {7})), sample_table(pop, stream_key(42, {7})));
}

TEST(SampleTable, ObservedTotalMatchesExpectation) {
    for (const auto& pop : table2_populations()) {
        const int reps = 100000;
        double s = 0.0, ss = 0.0;
        for (int r = 0; r < reps; ++r) {
            const double x0 = static_cast<double>(sample_table(pop, stream_key(9, {static_cast<std::uint64_t>(r)})).x0());
            s += x0;
            ss += x0 * x0;
        }
        const double mean = s / reps, sd = std::sqrt(ss / reps - mean * mean);
        // 4.5 sigma keeps the family-wise false alarm rate over eight populations below 1e-4
        EXPECT_NEAR(mean, expected_distinct(pop.params()), 4.5 * sd / std::sqrt(double(reps))) << pop.label;
    }
}

TEST(Populations, FamiliesAndFeasibility) {
    const auto p = table2_populations();
    ASSERT_EQ(p.size(), 8u);
    for (const auto& x : p) EXPECT_TRUE(x.feasible());
    const auto s = s_populations();
    EXPECT_EQ(s[0].p1_dot, 0.6);
    EXPECT_EQ(s[3].phi, 0.8);
    EXPECT_FALSE(robustness_situations()[2].with_phi(0.5).feasible());
}

namespace {
StudyConfig small_config() {
    StudyConfig c;
    c.populations = {table2_populations()[0], table2_populations()[6]};
    c.estimators = {EstimatorSpec::parse("dse"), EstimatorSpec::parse("adpl-mtb:scaled:1.25")};
    c.replicates = 60;
    c.seed = 123;
    return c;
}
}  // namespace

TEST(Study, ByteIdenticalAcrossWorkerCounts) {
    auto c = small_config();
    const auto one = io::summary_csv(run_study(c));
    c.workers = 3;
    EXPECT_EQ(io::summary_csv(run_study(c)), one);
    c.workers = 7;
    EXPECT_EQ(io::summary_csv(run_study(c)), one);
}

TEST(Study, RmseDecomposition) {
    for (const auto& s : run_study(small_config())) {
        const double r = static_cast<double>(s.estimates.size());
        const double bias = s.mean - static_cast<double>(s.n_true);
        const double rhs = bias * bias + s.sd * s.sd * (r - 1) / r;
        EXPECT_NEAR(s.rmse * s.rmse, rhs, 1e-9 * rhs);
    }
}

TEST(Study, OracleModeFreezesDeltaAtTruth) {
    auto c = small_config();
    c.delta_mode = DeltaMode::oracle;
    const auto rows = run_study(c);
    EXPECT_NEAR(*rows[1].mean_delta, 1.0 - 1.25 / 500, 1e-12);
    c.delta_mode = DeltaMode::candidate;
    EXPECT_NE(*run_study(c)[1].mean_delta, 1.0 - 1.25 / 500);
}

TEST(Study, FailuresCountedAndFlagged) {
    StudyConfig c;
    c.populations = {{"sparse", 30, 0.05, 0.05, 1.0}};
    c.estimators = {EstimatorSpec::parse("dse")};
    c.replicates = 100;
    const auto s = run_study(c)[0];
    EXPECT_GT(s.failures, 10);
    EXPECT_FALSE(s.valid);
    EXPECT_EQ(s.failures + static_cast<int>(s.estimates.size()), 100);
}

TEST(Study, ConfigValidation) {
    auto c = small_config();
    c.replicates = 1;
    EXPECT_THROW(run_study(c), DomainError);
    c = small_config();
    c.populations.push_back({"bad", 100, 0.8, 0.7, 0.5});
    EXPECT_THROW(run_study(c), DomainError);
}

TEST(Study, PublishedDseMeanAtDefaultSeed) {
    StudyConfig c;
    c.populations = {table2_populations()[0], table2_populations()[4]};
    c.estimators = {EstimatorSpec::parse("dse")};
    const auto rows = run_study(c);
    EXPECT_NEAR(rows[0].mean, 450.0, 3.0);
    EXPECT_NEAR(rows[1].mean, 563.0, 4.9);
}

TEST(Bands, WidthIdentity) {
    const auto rows = coverage_bands({table2_populations()[1]}, {200, 400}, 50, 1, figure_estimators());
    ASSERT_EQ(rows.size(), 4u);
    for (const auto& b : rows)
        EXPECT_NEAR(b.ucl - b.lcl, 3.92 * b.sd / static_cast<double>(b.n_true), 1e-12);
}

TEST(Sweep, InfeasiblePointsReportedNotRun) {
    const auto rows = robustness_sweep({robustness_situations()[2]}, {0.5, 1.0}, 500, 20, 1,
                                       {EstimatorSpec::parse("dse")});
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_FALSE(rows[0].feasible);
    EXPECT_TRUE(std::isnan(rows[0].mean));
    EXPECT_TRUE(rows[1].feasible);
}

TEST(Scaling, SlopeOfExactPowerLaw) {
    const auto rows = se_scaling_study({s_populations()[0]}, {200, 400, 800}, 100, 2, {EstimatorSpec::parse("dse")});
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].sd.size(), 3u);
    EXPECT_GT(rows[0].alpha, 0.2);
    EXPECT_LT(rows[0].alpha, 0.8);
    EXPECT_THROW(se_scaling_study({s_populations()[0]}, {400, 200}, 10, 2, {EstimatorSpec::parse("dse")}),
                 DomainError);
}
