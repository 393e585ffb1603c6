#include "nmtlab/error.hpp"
#include "nmtlab/rng.hpp"
#include "nmtlab/stats.hpp"

#include "oracles/beta_closed_form.hpp"
#include "oracles/mww_enumerate.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace nmtlab;
using namespace nmtlab::stats;
using testing_support::group_bleu;

TEST(Mww, LstmGroup2BelowGroup3) {
    const auto r = mww_one_sided(group_bleu(2, false), group_bleu(3, false), Alternative::x_less);
    EXPECT_EQ(r.u_statistic, 0.0);
    EXPECT_TRUE(r.exact);
    EXPECT_DOUBLE_EQ(r.p_value, 1.0 / 36.0);
    EXPECT_NEAR(r.p_value, 0.028, 0.0005);
}

TEST(Mww, LstmGroup1BelowGroup2) {
    const auto r = mww_one_sided(group_bleu(1, false), group_bleu(2, false), Alternative::x_less);
    EXPECT_EQ(r.u_statistic, 9.0);
    EXPECT_DOUBLE_EQ(r.p_value, 24.0 / 28.0);
}

TEST(Mww, TransformerColumns) {
    const auto g23 = mww_one_sided(group_bleu(2, true), group_bleu(3, true), Alternative::x_less);
    EXPECT_NEAR(g23.p_value, 0.028, 0.0005);
    const auto g13 = mww_one_sided(group_bleu(1, true), group_bleu(3, true), Alternative::x_less);
    EXPECT_NEAR(g13.p_value, 0.051, 0.01);
    // the published value here is 0.086; the table data give the LSTM value
    const auto g12 = mww_one_sided(group_bleu(1, true), group_bleu(2, true), Alternative::x_less);
    EXPECT_DOUBLE_EQ(g12.p_value, 24.0 / 28.0);
}

TEST(Mww, SinglePair) {
    const std::vector<double> x{1}, y{2};
    const auto r = mww_one_sided(x, y, Alternative::x_less);
    EXPECT_EQ(r.u_statistic, 0.0);
    EXPECT_DOUBLE_EQ(r.p_value, 0.5);
}

TEST(Mww, EmptyGroup) {
    const std::vector<double> x{}, y{1};
    EXPECT_THROW(mww_one_sided(x, y, Alternative::x_less), DomainError);
}

TEST(Mww, TiesUseNormalApproximation) {
    const std::vector<double> x{1, 2, 2, 3}, y{2, 3, 4, 5};
    const auto r = mww_one_sided(x, y, Alternative::x_less);
    EXPECT_FALSE(r.exact);
    // one strict win (3 > 2) and three ties (2,2 against 2; 3 against 3)
    EXPECT_DOUBLE_EQ(r.u_statistic, 1.0 + 0.5 * 3);
}

TEST(Mww, LargeSamplesUseNormalApproximation) {
    std::vector<double> x, y;
    for (int i = 0; i < 15; ++i) {
        x.push_back(2 * i);
        y.push_back(2 * i + 1);
    }
    const auto r = mww_one_sided(x, y, Alternative::x_less);
    EXPECT_FALSE(r.exact);
    EXPECT_GT(r.p_value, 0.0);
    EXPECT_LE(r.p_value, 1.0);
}

TEST(MwwProperty, NullCountsMatchEnumeration) {
    for (unsigned n = 1; n <= 7; ++n)
        for (unsigned m = 1; n + m <= 8; ++m) EXPECT_EQ(mww_null_counts(n, m), oracle::mww_counts(n, m)) << n << "," << m;
}

TEST(MwwProperty, CountsSumToBinomial) {
    for (std::size_t n = 1; n <= 12; ++n)
        for (std::size_t m = 1; n + m <= kExactLimit; ++m) {
            std::uint64_t sum = 0;
            for (auto c : mww_null_counts(n, m)) sum += c;
            double choose = std::round(std::exp(std::lgamma(n + m + 1.0) - std::lgamma(n + 1.0) - std::lgamma(m + 1.0)));
            ASSERT_EQ(static_cast<double>(sum), choose);
        }
}

TEST(MwwProperty, PValuesMatchEnumeration) {
    std::vector<double> x, y;
    for (unsigned total = 2; total <= 8; ++total) {
        for (std::uint32_t mask = 0; mask < (1u << total); ++mask) {
            const unsigned n = static_cast<unsigned>(__builtin_popcount(mask));
            if (n == 0 || n == total) continue;
            const auto counts = oracle::mww_counts(n, total - n);
            std::uint64_t all = 0;
            for (auto c : counts) all += c;
            oracle::split_ranks(mask, total, x, y);
            const auto less = mww_one_sided(x, y, Alternative::x_less);
            const auto greater = mww_one_sided(x, y, Alternative::x_greater);
            const auto u = static_cast<std::size_t>(less.u_statistic);
            std::uint64_t lo = 0, hi = 0;
            for (std::size_t k = 0; k < counts.size(); ++k) (k <= u ? lo : hi) += counts[k];
            hi += counts[u];
            ASSERT_EQ(less.p_value, static_cast<double>(lo) / static_cast<double>(all));
            ASSERT_EQ(greater.p_value, static_cast<double>(hi) / static_cast<double>(all));
            // the two tails overlap in the observed value
            ASSERT_NEAR(less.p_value + greater.p_value,
                        1.0 + static_cast<double>(counts[u]) / static_cast<double>(all), 1e-15);
        }
    }
}

TEST(MwwProperty, MaximalUHasPOne) {
    const std::vector<double> x{5, 6, 7}, y{1, 2};
    EXPECT_EQ(mww_one_sided(x, y, Alternative::x_less).p_value, 1.0);
}

TEST(MwwProperty, InvariantUnderMonotoneMaps) {
    Rng rng(1);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> x(1 + rng.below(8)), y(1 + rng.below(8));
        for (auto& v : x) v = rng.uniform(-3, 3);
        for (auto& v : y) v = rng.uniform(-3, 3);
        auto fx = x, fy = y;
        for (auto& v : fx) v = std::exp(2 * v) + 7;
        for (auto& v : fy) v = std::exp(2 * v) + 7;
        const auto a = mww_one_sided(x, y, Alternative::x_less);
        const auto b = mww_one_sided(fx, fy, Alternative::x_less);
        ASSERT_EQ(a.u_statistic, b.u_statistic);
        ASSERT_EQ(a.p_value, b.p_value);
    }
}

TEST(Pearson, TableColumns) {
    const auto c = testing_support::language_columns();
    const auto lstm = pearson(c.levenshtein, c.lstm);
    EXPECT_NEAR(lstm.r, -0.47, 0.01);
    EXPECT_NEAR(lstm.p_value, 0.08, 0.01);
    const auto tf = pearson(c.levenshtein, c.transformer);
    EXPECT_NEAR(tf.r, -0.47, 0.01);
    EXPECT_NEAR(tf.p_value, 0.08, 0.01);
}

TEST(Pearson, PerfectLine) {
    const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
    const auto r = pearson(x, y);
    EXPECT_NEAR(r.r, 1.0, 1e-15);
    EXPECT_LT(r.p_value, 1e-12);
}

TEST(Pearson, Errors) {
    const std::vector<double> x{1, 2, 3}, c{2, 2, 2}, two{1, 2};
    EXPECT_THROW(pearson(x, c), DomainError);
    EXPECT_THROW(pearson(two, two), DomainError);
}

TEST(PearsonProperty, AffineInvariance) {
    Rng rng(2);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> x(3 + rng.below(20)), y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = rng.normal();
            y[i] = x[i] + rng.normal();
        }
        const double r = pearson(x, y).r;
        ASSERT_LE(std::abs(r), 1.0 + 1e-12);
        auto ax = x, ny = y;
        for (auto& v : ax) v = 3 * v - 4;
        for (auto& v : ny) v = -2 * v + 1;
        ASSERT_NEAR(pearson(ax, y).r, r, 1e-12);
        ASSERT_NEAR(pearson(x, ny).r, -r, 1e-12);
    }
}

TEST(TTest, Examples) {
    const std::vector<double> sym{-1, 1}, d{1, 2, 3};
    const auto a = one_sample_t(sym, 0.0);
    EXPECT_EQ(a.t, 0.0);
    EXPECT_DOUBLE_EQ(a.p_value, 1.0);
    const auto b = one_sample_t(d, 0.0);
    EXPECT_NEAR(b.t, 2.0 * std::sqrt(3.0), 1e-12);
    EXPECT_EQ(b.dof, 2u);
    // two dof: closed-form CDF
    EXPECT_NEAR(b.p_value, 2.0 * (1.0 - oracle::t2_cdf(b.t)), 1e-12);
    EXPECT_NEAR(b.p_value, 0.0742, 1e-4);
}

TEST(TTest, Errors) {
    const std::vector<double> one{1}, flat{2, 2, 2};
    EXPECT_THROW(one_sample_t(one), DomainError);
    EXPECT_THROW(one_sample_t(flat), DomainError);
}

TEST(Ols, Examples) {
    const std::vector<double> x{0, 1, 2, 5}, y{-2, 1, 4, 13};
    const auto f = ols_fit(x, y);
    EXPECT_NEAR(f.slope, 3.0, 1e-12);
    EXPECT_NEAR(f.intercept, -2.0, 1e-12);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
    const std::vector<double> x2{1, 4}, y2{2, -1};
    const auto g = ols_fit(x2, y2);
    EXPECT_NEAR(g.slope, -1.0, 1e-15);
    EXPECT_NEAR(g.r_squared, 1.0, 1e-15);
    const std::vector<double> c{1, 1};
    EXPECT_THROW(ols_fit(c, y2), DomainError);
}

TEST(Ols, TestSetSizeShowsNoSignificantTrend) {
    const auto c = testing_support::language_columns();
    const auto f = ols_fit(c.n_test, c.lstm);
    EXPECT_LT(f.slope, 0.0);
    EXPECT_GT(pearson(c.n_test, c.lstm).p_value, 0.05);
    EXPECT_NEAR(f.r_squared, std::pow(pearson(c.n_test, c.lstm).r, 2), 1e-12);
}

TEST(OlsProperty, ResidualsOrthogonalToX) {
    Rng rng(3);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> x(2 + rng.below(30)), y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = rng.uniform(-5, 5);
            y[i] = 2 * x[i] + rng.normal();
        }
        const auto f = ols_fit(x, y);
        double dot = 0, sum = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double res = y[i] - (f.intercept + f.slope * x[i]);
            dot += res * x[i];
            sum += res;
        }
        ASSERT_NEAR(dot, 0.0, 1e-9);
        ASSERT_NEAR(sum, 0.0, 1e-9);
        ASSERT_GE(f.r_squared, 0.0);
        ASSERT_LE(f.r_squared, 1.0);
    }
}

TEST(IncompleteBeta, ClosedForms) {
    EXPECT_NEAR(incomplete_beta(1, 1, 0.5), 0.5, 1e-15);
    EXPECT_NEAR(incomplete_beta(2, 3, 0.25), 0.26171875, 1e-12);
    EXPECT_NEAR(oracle::beta23_cdf(0.25), 0.26171875, 1e-15);
    for (double x = 0.0; x <= 1.0; x += 0.05) EXPECT_NEAR(incomplete_beta(2, 3, x), oracle::beta23_cdf(x), 1e-10);
    EXPECT_EQ(incomplete_beta(2, 3, 0.0), 0.0);
    EXPECT_EQ(incomplete_beta(2, 3, 1.0), 1.0);
}

TEST(IncompleteBeta, IntegerParametersMatchBinomialSum) {
    for (int a = 1; a <= 12; ++a)
        for (int b = 1; b <= 12; ++b)
            for (double x : {0.01, 0.1, 0.3, 0.5, 0.62, 0.9, 0.99})
                ASSERT_NEAR(incomplete_beta(a, b, x), oracle::incomplete_beta_int(a, b, x), 1e-10) << a << "," << b;
}

TEST(IncompleteBetaProperty, Reflection) {
    Rng rng(4);
    for (int t = 0; t < 500; ++t) {
        const double a = rng.uniform(0.1, 40), b = rng.uniform(0.1, 40), x = rng.uniform();
        ASSERT_NEAR(incomplete_beta(a, b, x) + incomplete_beta(b, a, 1 - x), 1.0, 1e-10);
    }
}

TEST(IncompleteBeta, Domain) {
    EXPECT_THROW(incomplete_beta(0, 1, 0.5), DomainError);
    EXPECT_THROW(incomplete_beta(1, 1, 1.5), DomainError);
}

TEST(StudentT, Values) {
    EXPECT_EQ(student_t_cdf(0.0, 7), 0.5);
    EXPECT_NEAR(student_t_cdf(1.0, 1), 0.75, 1e-12);
    for (double t : {-30.0, -2.5, -0.3, 0.7, 4.0}) {
        EXPECT_NEAR(student_t_cdf(t, 1), oracle::cauchy_cdf(t), 1e-9);
        EXPECT_NEAR(student_t_cdf(t, 2), oracle::t2_cdf(t), 1e-9);
    }
    EXPECT_NEAR(student_t_two_sided(-1.92, 13), 0.077, 5e-4);
}

TEST(StudentT, LargeDofApproachesNormal) {
    EXPECT_NEAR(student_t_cdf(1.96, 1e7), normal_cdf(1.96), 1e-6);
    EXPECT_NEAR(normal_cdf(0.0), 0.5, 1e-15);
}
