#include "steerdns/rng.hpp"
#include "steerdns/stats.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace steerdns;

namespace {

// Reference t CDF through adaptive Simpson quadrature of the density.
// Shares no code with the incomplete-beta route used by the library.
double t_pdf(double x, double df) {
    const double c = std::exp(std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0)) /
                     std::sqrt(df * std::acos(-1.0));
    return c * std::pow(1.0 + x * x / df, -(df + 1.0) / 2.0);
}

double simpson(double a, double b, double df) {
    const double m = 0.5 * (a + b);
    return (b - a) / 6.0 * (t_pdf(a, df) + 4.0 * t_pdf(m, df) + t_pdf(b, df));
}

double adaptive_simpson(double a, double b, double df, double whole, int depth) {
    const double m = 0.5 * (a + b);
    const double left = simpson(a, m, df);
    const double right = simpson(m, b, df);
    if (depth <= 0 || std::fabs(left + right - whole) < 1e-12) {
        return left + right;
    }
    return adaptive_simpson(a, m, df, left, depth - 1) +
           adaptive_simpson(m, b, df, right, depth - 1);
}

double reference_t_cdf(double t, double df) {
    if (t < 0.0) {
        return 1.0 - reference_t_cdf(-t, df);
    }
    // Integrate the symmetric density from 0 to t; tails beyond 60 are
    // negligible for every df exercised here.
    const double upper = std::min(t, 60.0);
    return 0.5 + adaptive_simpson(0.0, upper, df, simpson(0.0, upper, df), 28);
}

} // namespace

TEST_CASE("median and percentile basics") {
    CHECK(stats::median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(stats::median({4.0, 1.0, 3.0, 2.0}) == 2.5);
    CHECK(stats::median({7.0}) == 7.0);
    CHECK_THROWS_AS(stats::median({}), std::invalid_argument);

    std::vector<double> ascending;
    for (int i = 1; i <= 100; ++i) {
        ascending.push_back(i);
    }
    CHECK(stats::percentile(ascending, 0) == 1.0);
    CHECK(stats::percentile(ascending, 100) == 100.0);
    CHECK(stats::percentile(ascending, 50) == doctest::Approx(50.5));
    CHECK(stats::percentile(ascending, 5) == doctest::Approx(5.95));
    CHECK(stats::percentile(ascending, 95) == doctest::Approx(95.05));
    CHECK(stats::percentile({42.0}, 5) == 42.0);
    CHECK(stats::percentile({42.0}, 95) == 42.0);
}

TEST_CASE("sample variance uses the n-1 denominator") {
    const std::vector<double> xs{2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
    CHECK(stats::mean(xs) == doctest::Approx(5.0));
    CHECK(stats::sample_variance(xs) == doctest::Approx(32.0 / 7.0));
    CHECK(stats::sample_variance(std::vector<double>{1.0}) == 0.0);
}

TEST_CASE("t distribution CDF matches an independent quadrature") {
    for (const double df : {1.0, 2.0, 5.0, 10.0, 30.0, 100.0, 598.0}) {
        for (const double t : {-4.0, -2.33, -1.0, 0.0, 0.5, 1.0, 2.0, 3.5}) {
            CHECK(stats::student_t_cdf(t, df) ==
                  doctest::Approx(reference_t_cdf(t, df)).epsilon(1e-8));
        }
    }
}

TEST_CASE("t quantile inverts the CDF") {
    for (const double df : {3.0, 10.0, 50.0, 300.0}) {
        for (const double p : {0.01, 0.025, 0.2, 0.5, 0.8, 0.975, 0.99}) {
            const double q = stats::student_t_quantile(p, df);
            CHECK(stats::student_t_cdf(q, df) == doctest::Approx(p).epsilon(1e-9));
        }
    }
    // Published two-sided 98% critical value for large df approaches the
    // normal 2.326.
    CHECK(stats::student_t_quantile(0.99, 1000.0) == doctest::Approx(2.3301).epsilon(1e-3));
    CHECK_THROWS_AS(stats::student_t_quantile(0.0, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(stats::student_t_quantile(1.0, 10.0), std::invalid_argument);
}

TEST_CASE("welch test detects separated means and ignores equal ones") {
    SplitMix64 rng(99);
    auto gaussian = [&](double mean, double sd, std::size_t n) {
        std::vector<double> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            // Box-Muller transform.
            const double u1 = std::max(rng.next_double(), 1e-12);
            const double u2 = rng.next_double();
            out.push_back(mean +
                          sd * std::sqrt(-2.0 * std::log(u1)) *
                              std::cos(2.0 * std::acos(-1.0) * u2));
        }
        return out;
    };

    const auto a = gaussian(100.0, 5.0, 300);
    const auto b = gaussian(110.0, 5.0, 300);
    const auto r = stats::welch_t_test(a, b);
    CHECK(r.p_two_sided < 1e-6);
    CHECK(r.t < 0.0);

    const auto c = gaussian(100.0, 5.0, 300);
    const auto d = gaussian(100.0, 5.0, 300);
    const auto r2 = stats::welch_t_test(c, d);
    CHECK(r2.p_two_sided > 0.01);

    const std::vector<double> flat_a{5.0, 5.0, 5.0};
    const std::vector<double> flat_b{5.0, 5.0, 5.0};
    CHECK(stats::welch_t_test(flat_a, flat_b).p_two_sided == 1.0);
    const std::vector<double> flat_c{6.0, 6.0, 6.0};
    CHECK(stats::welch_t_test(flat_a, flat_c).p_two_sided == 0.0);
}
