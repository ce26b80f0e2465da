#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace steerdns::stats {

double mean(std::span<const double> xs);

/// Sample variance (n - 1 denominator). Zero for fewer than two values.
double sample_variance(std::span<const double> xs);

double sample_stddev(std::span<const double> xs);

/// Median; the average of the two middle values for even sizes.
double median(std::vector<double> xs);

/// Percentile in [0, 100] with linear interpolation between order
/// statistics (the rank h = (n - 1) * p / 100 convention).
double percentile(std::vector<double> xs, double p);

/// Regularized incomplete beta function I_x(a, b).
double regularized_incomplete_beta(double a, double b, double x);

/// P(T <= t) for Student's t with df degrees of freedom.
double student_t_cdf(double t, double df);

/// Inverse of student_t_cdf in t for fixed df; p must lie in (0, 1).
double student_t_quantile(double p, double df);

struct WelchResult {
    double t = 0.0;            ///< Welch statistic (mean_a - mean_b over pooled se)
    double df = 0.0;           ///< Welch-Satterthwaite degrees of freedom
    double p_two_sided = 1.0;
    double mean_a = 0.0;
    double mean_b = 0.0;
    double se = 0.0;           ///< standard error of the mean difference
};

/// Welch's unequal-variance two-sample t-test. Each sample needs at least
/// two values. Degenerate zero-variance inputs yield p = 0 when the means
/// differ and p = 1 when they coincide.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

} // namespace steerdns::stats
