#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nmtlab::stats {

enum class Alternative { x_less, x_greater };

struct MwwResult {
    double u_statistic = 0.0;  // #{x > y} + 0.5 #{x == y}
    double p_value = 1.0;
    std::size_t n = 0;  // |x|
    std::size_t m = 0;  // |y|
    bool exact = false;
};

struct CorrResult {
    double r = 0.0;
    double p_value = 1.0;  // two-sided
    std::size_t n = 0;
};

struct TTestResult {
    double mean_diff = 0.0;
    double t = 0.0;
    double p_value = 1.0;  // two-sided
    std::size_t dof = 0;
};

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

// Largest n + m handled by the exact null distribution.
inline constexpr std::size_t kExactLimit = 25;

// One-sided Mann-Whitney-Wilcoxon test. For x_less, p = P(U* <= U) under the
// exact permutation null when there are no ties and n + m <= kExactLimit;
// otherwise a tie-corrected normal approximation with continuity correction.
// x_greater uses the upper tail P(U* >= U).
MwwResult mww_one_sided(std::span<const double> x, std::span<const double> y, Alternative alt);

// Number of the C(n+m, n) orderings that give each U in 0..n*m.
std::vector<std::uint64_t> mww_null_counts(std::size_t n, std::size_t m);

CorrResult pearson(std::span<const double> x, std::span<const double> y);
TTestResult one_sample_t(std::span<const double> sample, double mu0 = 0.0);
FitResult ols_fit(std::span<const double> x, std::span<const double> y);

// Regularized incomplete beta I_x(a, b), continued fraction with the
// symmetry switch at x > (a + 1) / (a + b + 2).
double incomplete_beta(double a, double b, double x);

double student_t_cdf(double t, double dof);
// P(|T| >= |t|)
double student_t_two_sided(double t, double dof);
double normal_cdf(double z);

} // namespace nmtlab::stats
