#pragma once

#include <cmath>

namespace oracle {

// Beta(2, 3) CDF expanded: 6x^2 - 8x^3 + 3x^4.
inline double beta23_cdf(double x) { return 6 * x * x - 8 * x * x * x + 3 * x * x * x * x; }

// For integer a, b: I_x(a, b) = P(Binomial(a + b - 1, x) >= a).
inline double incomplete_beta_int(int a, int b, double x) {
    const int n = a + b - 1;
    double sum = 0.0;
    for (int j = a; j <= n; ++j) {
        const double log_choose = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0);
        sum += std::exp(log_choose) * std::pow(x, j) * std::pow(1.0 - x, n - j);
    }
    return sum;
}

// Student t with one degree of freedom is Cauchy.
inline double cauchy_cdf(double t) { return 0.5 + std::atan(t) / M_PI; }

// Two degrees of freedom: F(t) = 1/2 + t / (2 sqrt(t^2 + 2)).
inline double t2_cdf(double t) { return 0.5 + t / (2.0 * std::sqrt(t * t + 2.0)); }

} // namespace oracle
