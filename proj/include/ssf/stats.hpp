#pragma once

#include <span>
#include <vector>

namespace ssf {

double mean(std::span<const double> x);
/// Sample standard deviation (n - 1 denominator).
double sample_sd(std::span<const double> x);

struct TTest {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
};

/// One-sided test of mean(diffs) > 0. Zero variance gives t = 0, p = 0.5 when
/// the mean is 0, and an infinite t otherwise.
TTest paired_t_one_sided(std::span<const double> diffs);

/// Mean difference over the root mean of the two variances.
double cohens_d(std::span<const double> a, std::span<const double> b);

/// Holm step-down adjusted p-values, in input order, capped at 1.
std::vector<double> holm_adjust(std::span<const double> p);

}  // namespace ssf
