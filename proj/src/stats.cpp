#include "steerdns/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace steerdns::stats {

double mean(std::span<const double> xs) {
    if (xs.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (double x : xs) {
        sum += x;
    }
    return sum / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n < 2) {
        return 0.0;
    }
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) {
        const double d = x - m;
        ss += d * d;
    }
    return ss / static_cast<double>(n - 1);
}

double sample_stddev(std::span<const double> xs) {
    return std::sqrt(sample_variance(xs));
}

double median(std::vector<double> xs) {
    if (xs.empty()) {
        throw std::invalid_argument("median: empty input");
    }
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    if (n % 2 == 1) {
        return xs[n / 2];
    }
    return 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double percentile(std::vector<double> xs, double p) {
    if (xs.empty()) {
        throw std::invalid_argument("percentile: empty input");
    }
    if (p < 0.0 || p > 100.0) {
        throw std::invalid_argument("percentile: p outside [0, 100]");
    }
    std::sort(xs.begin(), xs.end());
    const double h = (static_cast<double>(xs.size()) - 1.0) * p / 100.0;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = static_cast<std::size_t>(std::ceil(h));
    if (lo == hi) {
        return xs[lo];
    }
    const double frac = h - static_cast<double>(lo);
    return xs[lo] + frac * (xs[hi] - xs[lo]);
}

namespace {

// Continued fraction for the incomplete beta function (Lentz's method).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIterations = 300;
    constexpr double kEpsilon = 3.0e-15;
    const double tiny = std::numeric_limits<double>::min() / kEpsilon;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) {
        d = tiny;
    }
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) {
            c = tiny;
        }
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) {
            c = tiny;
        }
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEpsilon) {
            break;
        }
    }
    return h;
}

} // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) {
        return 0.0;
    }
    if (x >= 1.0) {
        return 1.0;
    }
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    // Use the symmetry relation where the continued fraction converges fast.
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - std::exp(std::lgamma(a + b) - std::lgamma(b) - std::lgamma(a) +
                          b * std::log1p(-x) + a * std::log(x)) *
                     beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
    if (df <= 0.0) {
        throw std::invalid_argument("student_t_cdf: df must be positive");
    }
    if (std::isinf(t)) {
        return t > 0 ? 1.0 : 0.0;
    }
    const double x = df / (df + t * t);
    const double tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, x);
    return t >= 0.0 ? 1.0 - tail : tail;
}

double student_t_quantile(double p, double df) {
    if (!(p > 0.0) || !(p < 1.0)) {
        throw std::invalid_argument("student_t_quantile: p outside (0, 1)");
    }
    if (p == 0.5) {
        return 0.0;
    }
    // The CDF is strictly increasing; bisect after growing a bracket.
    double lo = -1.0;
    double hi = 1.0;
    while (student_t_cdf(lo, df) > p) {
        lo *= 2.0;
    }
    while (student_t_cdf(hi, df) < p) {
        hi *= 2.0;
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (student_t_cdf(mid, df) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) {
        throw std::invalid_argument("welch_t_test: need at least two values per sample");
    }
    WelchResult r;
    r.mean_a = mean(a);
    r.mean_b = mean(b);
    const double var_a = sample_variance(a) / static_cast<double>(a.size());
    const double var_b = sample_variance(b) / static_cast<double>(b.size());
    const double pooled = var_a + var_b;
    r.se = std::sqrt(pooled);
    const double diff = r.mean_a - r.mean_b;

    if (pooled == 0.0) {
        r.t = diff == 0.0 ? 0.0 : (diff > 0.0 ? std::numeric_limits<double>::infinity()
                                              : -std::numeric_limits<double>::infinity());
        r.df = static_cast<double>(a.size() + b.size() - 2);
        r.p_two_sided = diff == 0.0 ? 1.0 : 0.0;
        return r;
    }

    r.t = diff / r.se;
    r.df = pooled * pooled /
           (var_a * var_a / static_cast<double>(a.size() - 1) +
            var_b * var_b / static_cast<double>(b.size() - 1));
    r.p_two_sided = 2.0 * (1.0 - student_t_cdf(std::fabs(r.t), r.df));
    return r;
}

} // namespace steerdns::stats
