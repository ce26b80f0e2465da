#include "steerdns/segments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace steerdns::analysis {

namespace {

class SegmentCost {
public:
    explicit SegmentCost(std::span<const double> signal)
        : prefix_(signal.size() + 1, 0.0), prefix_sq_(signal.size() + 1, 0.0) {
        for (std::size_t i = 0; i < signal.size(); ++i) {
            prefix_[i + 1] = prefix_[i] + signal[i];
            prefix_sq_[i + 1] = prefix_sq_[i] + signal[i] * signal[i];
        }
    }

    /// Sum of squared deviations from the mean over [s, e).
    double operator()(std::size_t s, std::size_t e) const {
        const double n = static_cast<double>(e - s);
        const double sum = prefix_[e] - prefix_[s];
        const double sum_sq = prefix_sq_[e] - prefix_sq_[s];
        return std::max(0.0, sum_sq - sum * sum / n);
    }

private:
    std::vector<double> prefix_;
    std::vector<double> prefix_sq_;
};

// Noise variance from first differences; a level shift at a change point
// contributes to only one difference term, so the estimate stays close to
// sigma^2 even on series with genuine mean changes.
double diff_variance(std::span<const double> signal) {
    if (signal.size() < 2) {
        return 0.0;
    }
    double ss = 0.0;
    for (std::size_t i = 1; i < signal.size(); ++i) {
        const double d = signal[i] - signal[i - 1];
        ss += d * d;
    }
    return ss / (2.0 * static_cast<double>(signal.size() - 1));
}

} // namespace

std::vector<SegmentRange> detect_segments_signal(std::span<const double> signal,
                                                 std::size_t min_len) {
    const std::size_t n = signal.size();
    if (min_len == 0) {
        throw std::invalid_argument("detect_segments: min_len must be positive");
    }
    if (n < min_len) {
        throw std::invalid_argument("detect_segments: series shorter than min_len");
    }
    if (n < 2 * min_len) {
        return {{0, n}};
    }

    const SegmentCost cost(signal);
    const double penalty = 2.0 * diff_variance(signal) * std::log(static_cast<double>(n));

    std::vector<SegmentRange> done;
    std::vector<SegmentRange> todo{{0, n}};
    while (!todo.empty()) {
        const auto [s, e] = todo.back();
        todo.pop_back();
        if (e - s < 2 * min_len) {
            done.push_back({s, e});
            continue;
        }
        const double whole = cost(s, e);
        double best_gain = 0.0;
        std::size_t best_split = 0;
        for (std::size_t k = s + min_len; k + min_len <= e; ++k) {
            const double gain = whole - cost(s, k) - cost(k, e);
            if (gain > best_gain) {
                best_gain = gain;
                best_split = k;
            }
        }
        if (best_split != 0 && best_gain > penalty) {
            todo.push_back({best_split, e});
            todo.push_back({s, best_split});
        } else {
            done.push_back({s, e});
        }
    }
    std::sort(done.begin(), done.end());
    return done;
}

std::vector<SegmentRange> detect_segments(std::span<const PairedSample> samples,
                                          std::size_t min_len) {
    std::vector<double> diff;
    diff.reserve(samples.size());
    for (const auto& s : samples) {
        diff.push_back(s.rct_v4 - s.rct_v6);
    }
    return detect_segments_signal(diff, min_len);
}

} // namespace steerdns::analysis
