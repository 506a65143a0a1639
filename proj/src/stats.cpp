#include "pdmp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pdmp {

double kolmogorov_sf(double x) {
    constexpr double pi = 3.14159265358979323846;
    if (x <= 0.0) return 1.0;
    if (x < 1.18) {
        // Jacobi theta form converges fast for small arguments.
        const double v = std::exp(-pi * pi / (8.0 * x * x));
        const double cdf = std::sqrt(2.0 * pi) / x *
                           (v + std::pow(v, 9.0) + std::pow(v, 25.0) +
                            std::pow(v, 49.0));
        return 1.0 - cdf;
    }
    double acc = 0.0;
    for (int k = 1; k <= 64; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        acc += (k % 2 == 1) ? term : -term;
        if (term < 1e-18) break;
    }
    return std::max(0.0, 2.0 * acc);
}

double ks_statistic(const std::vector<double>& sorted,
                    const std::function<double(double)>& cdf) {
    if (sorted.empty()) {
        throw std::invalid_argument("ks_statistic needs samples");
    }
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
        d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

double ks_statistic_two_sample(const std::vector<double>& a,
                               const std::vector<double>& b) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("ks_statistic_two_sample needs samples");
    }
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na -
                                  static_cast<double>(j) / nb));
    }
    return d;
}

double ks_pvalue(double d, std::size_t n) {
    return kolmogorov_sf(std::sqrt(static_cast<double>(n)) * d);
}

double ks_pvalue_two_sample(double d, std::size_t n, std::size_t m) {
    const double ne = static_cast<double>(n) * static_cast<double>(m) /
                      (static_cast<double>(n) + static_cast<double>(m));
    return kolmogorov_sf(std::sqrt(ne) * d);
}

double ks_critical_value(double significance, std::size_t n) {
    if (!(significance > 0.0 && significance < 1.0)) {
        throw std::invalid_argument("significance must lie in (0, 1)");
    }
    double lo = 0.0, hi = 4.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (kolmogorov_sf(mid) > significance) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return hi / std::sqrt(static_cast<double>(n));
}

double wasserstein1(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("wasserstein1 needs samples");
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double dist = 0.0;
    double prev = std::min(a[0], b[0]);
    while (i < a.size() || j < b.size()) {
        double x;
        if (i < a.size() && (j >= b.size() || a[i] <= b[j])) {
            x = a[i];
        } else {
            x = b[j];
        }
        dist += std::fabs(static_cast<double>(i) / na -
                          static_cast<double>(j) / nb) *
                (x - prev);
        prev = x;
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
    }
    return dist;
}

MeanCi mean_ci95(const std::vector<double>& xs) {
    if (xs.empty()) {
        throw std::invalid_argument("mean_ci95 needs samples");
    }
    MeanCi out;
    out.n = xs.size();
    double acc = 0.0;
    for (double x : xs) acc += x;
    out.mean = acc / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - out.mean) * (x - out.mean);
        out.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    const double half =
        1.959963984540054 * out.stddev / std::sqrt(static_cast<double>(out.n));
    out.lo = out.mean - half;
    out.hi = out.mean + half;
    return out;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) {
        throw std::invalid_argument("quantile_sorted needs samples");
    }
    if (!(q >= 0.0 && q <= 1.0)) {
        throw std::invalid_argument("quantile must lie in [0, 1]");
    }
    const auto idx = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(sorted.size())));
    return sorted[idx == 0 ? 0 : std::min(idx - 1, sorted.size() - 1)];
}

}  // namespace pdmp
