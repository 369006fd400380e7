#include "ssf/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "ssf/errors.hpp"

namespace ssf {

double mean(std::span<const double> x) {
    if (x.empty()) throw ValidationError("mean of an empty sample");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x) {
    if (x.size() < 2) throw ValidationError("standard deviation needs at least 2 values");
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

TTest paired_t_one_sided(std::span<const double> diffs) {
    if (diffs.size() < 2) throw ValidationError("paired t-test needs at least 2 pairs");
    TTest r;
    r.df = static_cast<double>(diffs.size() - 1);
    const double m = mean(diffs);
    const double sd = sample_sd(diffs);
    if (sd == 0.0) {
        if (m == 0.0) {
            r.t = 0.0;
            r.p = 0.5;
        } else {
            r.t = m > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
            r.p = m > 0 ? 0.0 : 1.0;
        }
        return r;
    }
    r.t = m / (sd / std::sqrt(static_cast<double>(diffs.size())));
    boost::math::students_t dist(r.df);
    r.p = boost::math::cdf(boost::math::complement(dist, r.t));
    return r;
}

double cohens_d(std::span<const double> a, std::span<const double> b) {
    const double pooled = std::sqrt((std::pow(sample_sd(a), 2) + std::pow(sample_sd(b), 2)) / 2.0);
    const double diff = mean(a) - mean(b);
    if (pooled == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
    return diff / pooled;
}

std::vector<double> holm_adjust(std::span<const double> p) {
    const std::size_t m = p.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    std::vector<double> out(m);
    double running = 0.0;
    for (std::size_t rank = 0; rank < m; ++rank) {
        const double v = p[order[rank]];
        if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("p-values must lie in [0, 1]");
        running = std::max(running, std::min(1.0, static_cast<double>(m - rank) * v));
        out[order[rank]] = running;
    }
    return out;
}

}  // namespace ssf
