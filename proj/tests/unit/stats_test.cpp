#include <doctest.h>

#include <cmath>

#include "ssf/errors.hpp"
#include "ssf/stats.hpp"

using namespace ssf;

TEST_CASE("holm step-down") {
    std::vector<double> p{0.01, 0.02, 0.03, 0.04, 0.05};
    CHECK(holm_adjust(p) == std::vector<double>{0.05, 0.08, 0.09, 0.09, 0.09});
    // input order is preserved
    std::vector<double> q{0.05, 0.01, 0.04, 0.02, 0.03};
    CHECK(holm_adjust(q) == std::vector<double>{0.09, 0.05, 0.09, 0.08, 0.09});
    CHECK(holm_adjust(std::vector<double>{0.6, 0.7}) == std::vector<double>{1.0, 1.0});
    CHECK(holm_adjust(std::vector<double>{}).empty());
    CHECK_THROWS_AS(holm_adjust(std::vector<double>{1.5}), ValidationError);
}

TEST_CASE("one-sided paired t") {
    // reference values: scipy.stats.ttest_1samp(..., alternative="greater")
    std::vector<double> d{1, 2, 3, 4, 5};
    auto r = paired_t_one_sided(d);
    CHECK(r.t == doctest::Approx(4.242640687119285).epsilon(1e-12));
    CHECK(r.df == 4);
    CHECK(r.p == doctest::Approx(0.0066177997818413475).epsilon(1e-9));
    auto s = paired_t_one_sided(std::vector<double>{0.3, -0.1, 0.2, 0.05});
    CHECK(s.t == doctest::Approx(1.2857142857142856).epsilon(1e-12));
    CHECK(s.p == doctest::Approx(0.14439925681504276).epsilon(1e-9));

    auto zero = paired_t_one_sided(std::vector<double>{0, 0, 0});
    CHECK(zero.t == 0.0);
    CHECK(zero.p == 0.5);
    auto up = paired_t_one_sided(std::vector<double>{1, 1, 1});
    CHECK(std::isinf(up.t));
    CHECK(up.p == 0.0);
    CHECK_THROWS_AS(paired_t_one_sided(std::vector<double>{1}), ValidationError);
}

TEST_CASE("cohen's d") {
    std::vector<double> a{2, 4, 6}, b{1, 2, 3};
    // sd(a)=2, sd(b)=1, pooled sqrt((4+1)/2)
    CHECK(cohens_d(a, b) == doctest::Approx(2.0 / std::sqrt(2.5)).epsilon(1e-12));
    CHECK(cohens_d(a, a) == 0.0);
}

TEST_CASE("descriptives") {
    std::vector<double> x{1, 2, 3, 4};
    CHECK(mean(x) == 2.5);
    CHECK(sample_sd(x) == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-12));
    CHECK_THROWS_AS(mean(std::vector<double>{}), ValidationError);
}
