#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "lfmo/error.hpp"

namespace lfmo {

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    // Asymptotic p-values are unreliable when either sample is below 30.
    bool small_sample = false;
};

/// P(K > x) for the Kolmogorov distribution.
inline double kolmogorov_survival(double x) {
    if (!(x > 0.0)) return 1.0;
    constexpr double cutoff = 1e-12;
    if (x < 1.18) {
        // Jacobi theta form converges fast for small x.
        const double pi2 = std::numbers::pi * std::numbers::pi;
        double cdf = 0.0;
        for (int k = 1;; ++k) {
            const double m = 2.0 * k - 1.0;
            const double term = std::exp(-m * m * pi2 / (8.0 * x * x));
            cdf += term;
            if (term < cutoff) break;
        }
        cdf *= std::sqrt(2.0 * std::numbers::pi) / x;
        return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    double sum = 0.0;
    for (int k = 1;; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sum += (k % 2 == 1 ? term : -term);
        if (term < cutoff) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
inline KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw domain_error("KS test needs two nonempty samples");
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const auto n1 = x.size();
    const auto n2 = y.size();
    const double inv1 = 1.0 / static_cast<double>(n1);
    const double inv2 = 1.0 / static_cast<double>(n2);

    double d = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < n1 && j < n2) {
        // step both ECDFs through every copy of the smallest pending value
        const double v = std::min(x[i], y[j]);
        while (i < n1 && x[i] == v) ++i;
        while (j < n2 && y[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) * inv1 - static_cast<double>(j) * inv2));
    }

    const double ne = static_cast<double>(n1) * static_cast<double>(n2) /
                      static_cast<double>(n1 + n2);
    KsResult r;
    r.statistic = d;
    r.p_value = kolmogorov_survival(d * std::sqrt(ne));
    r.n1 = n1;
    r.n2 = n2;
    r.small_sample = n1 < 30 || n2 < 30;
    return r;
}

struct MeanEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
};

inline MeanEstimate mean_and_se(std::span<const double> xs) {
    if (xs.size() < 2) throw domain_error("mean and standard error need at least two values");
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t count = 0;
    for (double x : xs) {
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }
    const double var = m2 / static_cast<double>(count - 1);
    return {mean, std::sqrt(var / static_cast<double>(count))};
}

/// Signed (estimate - reference) / reference.
inline double relative_error(double estimate, double reference) {
    if (reference == 0.0) throw domain_error("relative error needs a nonzero reference");
    return (estimate - reference) / reference;
}

}  // namespace lfmo
