#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace pdmp {

// Asymptotic Kolmogorov survival function Q(x) = P(sup |B| > x) for the
// Brownian-bridge limit of scaled KS statistics.
double kolmogorov_sf(double x);

// One-sample KS statistic of sorted samples against a reference CDF.
double ks_statistic(const std::vector<double>& sorted,
                    const std::function<double(double)>& cdf);

// Two-sample KS statistic; both inputs must be sorted ascending.
double ks_statistic_two_sample(const std::vector<double>& sorted_a,
                               const std::vector<double>& sorted_b);

double ks_pvalue(double d, std::size_t n);
double ks_pvalue_two_sample(double d, std::size_t n, std::size_t m);

// Smallest statistic rejected at the given significance level.
double ks_critical_value(double significance, std::size_t n);

// Exact 1-D Wasserstein-1 distance between two empirical distributions,
// computed as the area between their CDFs. Handles unequal sample sizes;
// for equal sizes it reduces to the mean absolute difference of the
// sorted samples.
double wasserstein1(std::vector<double> a, std::vector<double> b);

struct MeanCi {
    double mean = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double stddev = 0.0;
    std::size_t n = 0;
};

// Sample mean with a normal-approximation 95 percent confidence interval.
MeanCi mean_ci95(const std::vector<double>& xs);

// Quantile of a sorted sample by the nearest-rank rule.
double quantile_sorted(const std::vector<double>& sorted, double q);

}  // namespace pdmp
