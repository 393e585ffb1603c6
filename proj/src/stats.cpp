#include "nmtlab/stats.hpp"

#include "nmtlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace nmtlab::stats {

namespace {

double mean(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Lentz's method for the continued fraction of I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 10000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;

        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    return h;
}

} // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete_beta: a and b must be positive");
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete_beta: x must lie in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;

    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                             b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
    if (!(dof > 0.0)) throw DomainError("student_t_cdf: dof must be positive");
    if (t == 0.0) return 0.5;
    if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
    const double tail = 0.5 * incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t));
    return t > 0 ? 1.0 - tail : tail;
}

double student_t_two_sided(double t, double dof) {
    if (!(dof > 0.0)) throw DomainError("student_t_two_sided: dof must be positive");
    if (std::isinf(t)) return 0.0;
    if (t == 0.0) return 1.0;
    return incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::vector<std::uint64_t> mww_null_counts(std::size_t n, std::size_t m) {
    // counts[j][u] for the current i: orderings of i x's and j y's with U = u.
    // Placing the largest element: an x beats all j y's (adds j), a y adds 0.
    std::vector<std::vector<std::uint64_t>> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = {1};  // i = 0
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = {1};
        for (std::size_t j = 1; j <= m; ++j) {
            std::vector<std::uint64_t> row(i * j + 1, 0);
            for (std::size_t u = 0; u < prev[j].size(); ++u) row[u + j] += prev[j][u];
            for (std::size_t u = 0; u < cur[j - 1].size(); ++u) row[u] += cur[j - 1][u];
            cur[j] = std::move(row);
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

MwwResult mww_one_sided(std::span<const double> x, std::span<const double> y, Alternative alt) {
    if (x.empty() || y.empty()) throw DomainError("mww: both groups must be non-empty");

    MwwResult r;
    r.n = x.size();
    r.m = y.size();
    std::size_t ties = 0;
    std::size_t greater = 0;
    for (double xi : x)
        for (double yj : y) {
            if (xi > yj) ++greater;
            else if (xi == yj) ++ties;
        }
    r.u_statistic = static_cast<double>(greater) + 0.5 * static_cast<double>(ties);

    // tie groups over the pooled sample, for exactness and the variance term
    std::vector<double> pooled(x.begin(), x.end());
    pooled.insert(pooled.end(), y.begin(), y.end());
    std::sort(pooled.begin(), pooled.end());
    double tie_term = 0.0;
    bool any_ties = false;
    for (std::size_t i = 0; i < pooled.size();) {
        std::size_t j = i;
        while (j < pooled.size() && pooled[j] == pooled[i]) ++j;
        const double t = static_cast<double>(j - i);
        if (j - i > 1) any_ties = true;
        tie_term += t * t * t - t;
        i = j;
    }

    const std::size_t total = r.n + r.m;
    if (!any_ties && total <= kExactLimit) {
        const auto counts = mww_null_counts(r.n, r.m);
        const std::uint64_t all = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
        std::uint64_t tail = 0;
        if (alt == Alternative::x_less) {
            for (std::size_t u = 0; u <= greater; ++u) tail += counts[u];
        } else {
            for (std::size_t u = greater; u < counts.size(); ++u) tail += counts[u];
        }
        r.p_value = static_cast<double>(tail) / static_cast<double>(all);
        r.exact = true;
        return r;
    }

    const double n = static_cast<double>(r.n);
    const double m = static_cast<double>(r.m);
    const double big_n = n + m;
    const double mu = n * m / 2.0;
    const double var = n * m / 12.0 * ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
    if (var <= 0.0) {
        r.p_value = 1.0;  // every observation tied
        return r;
    }
    const double sigma = std::sqrt(var);
    if (alt == Alternative::x_less) r.p_value = normal_cdf((r.u_statistic - mu + 0.5) / sigma);
    else r.p_value = 1.0 - normal_cdf((r.u_statistic - mu - 0.5) / sigma);
    r.p_value = std::clamp(r.p_value, std::numeric_limits<double>::min(), 1.0);
    return r;
}

CorrResult pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DomainError("pearson: samples differ in length");
    if (x.size() < 3) throw DomainError("pearson: need at least 3 points");
    const double mx = mean(x), my = mean(y);
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) throw DomainError("pearson: zero variance");

    CorrResult r;
    r.n = x.size();
    r.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    const double dof = static_cast<double>(r.n) - 2.0;
    const double one_minus = 1.0 - r.r * r.r;
    if (one_minus <= 0.0) {
        r.p_value = 0.0;
    } else {
        r.p_value = student_t_two_sided(r.r * std::sqrt(dof / one_minus), dof);
    }
    return r;
}

TTestResult one_sample_t(std::span<const double> sample, double mu0) {
    if (sample.size() < 2) throw DomainError("t-test: need at least 2 values");
    const double mu = mean(sample);
    double ss = 0;
    for (double v : sample) ss += (v - mu) * (v - mu);
    const double n = static_cast<double>(sample.size());
    const double sd = std::sqrt(ss / (n - 1.0));
    if (sd <= 0.0) throw DomainError("t-test: zero variance");

    TTestResult r;
    r.mean_diff = mu - mu0;
    r.dof = sample.size() - 1;
    r.t = r.mean_diff / (sd / std::sqrt(n));
    r.p_value = student_t_two_sided(r.t, static_cast<double>(r.dof));
    return r;
}

FitResult ols_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DomainError("ols: samples differ in length");
    if (x.size() < 2) throw DomainError("ols: need at least 2 points");
    const double mx = mean(x), my = mean(y);
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0.0) throw DomainError("ols: x has zero variance");

    FitResult f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    // a constant y is fit exactly
    f.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
    return f;
}

} // namespace nmtlab::stats
