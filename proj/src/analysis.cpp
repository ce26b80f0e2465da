#include "steerdns/analysis.hpp"

#include "steerdns/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace steerdns::analysis {

std::string_view classification_name(PairClassification c) {
    switch (c) {
    case PairClassification::V4Better: return "v4_better";
    case PairClassification::V6Better: return "v6_better";
    case PairClassification::NoneBetter: return "none_better";
    }
    return "none_better";
}

std::string_view group_name(SegmentGroup g) {
    switch (g) {
    case SegmentGroup::A: return "A";
    case SegmentGroup::B: return "B";
    case SegmentGroup::C: return "C";
    case SegmentGroup::D: return "D";
    }
    return "D";
}

std::string_view mode_name(FamilyMode m) {
    switch (m) {
    case FamilyMode::V4Only: return "v4_only";
    case FamilyMode::V6Only: return "v6_only";
    case FamilyMode::Adaptive: return "adaptive";
    }
    return "adaptive";
}

namespace {

struct CandidateEdge {
    double distance;
    double t_v4;
    double t_v6;
    std::size_t v4_idx;
    std::size_t v6_idx;
};

std::vector<PairedSample> match_group(std::vector<const RawTest*>& v4,
                                      std::vector<const RawTest*>& v6, double window_s) {
    auto by_time = [](const RawTest* a, const RawTest* b) {
        return a->timestamp < b->timestamp;
    };
    std::sort(v4.begin(), v4.end(), by_time);
    std::sort(v6.begin(), v6.end(), by_time);

    std::vector<CandidateEdge> edges;
    std::size_t lo = 0;
    for (std::size_t i = 0; i < v4.size(); ++i) {
        const double t = v4[i]->timestamp;
        while (lo < v6.size() && v6[lo]->timestamp < t - window_s) {
            ++lo;
        }
        for (std::size_t j = lo; j < v6.size() && v6[j]->timestamp <= t + window_s; ++j) {
            edges.push_back({std::fabs(v6[j]->timestamp - t), t, v6[j]->timestamp, i, j});
        }
    }
    std::sort(edges.begin(), edges.end(), [](const CandidateEdge& a, const CandidateEdge& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        if (a.t_v4 != b.t_v4) return a.t_v4 < b.t_v4;
        return a.t_v6 < b.t_v6;
    });

    std::vector<bool> v4_used(v4.size(), false);
    std::vector<bool> v6_used(v6.size(), false);
    std::vector<PairedSample> out;
    for (const auto& e : edges) {
        if (v4_used[e.v4_idx] || v6_used[e.v6_idx]) {
            continue;
        }
        v4_used[e.v4_idx] = true;
        v6_used[e.v6_idx] = true;
        out.push_back({std::min(e.t_v4, e.t_v6), v4[e.v4_idx]->rct_ms, v6[e.v6_idx]->rct_ms});
    }
    std::sort(out.begin(), out.end(), [](const PairedSample& a, const PairedSample& b) {
        return a.timestamp < b.timestamp;
    });
    return out;
}

} // namespace

std::map<PairKey, std::vector<PairedSample>> pair_tests(std::span<const RawTest> tests,
                                                        double window_s) {
    std::map<PairKey, std::pair<std::vector<const RawTest*>, std::vector<const RawTest*>>> grouped;
    for (const RawTest& t : tests) {
        auto& slot = grouped[{t.probe_id, t.anchor_id}];
        (t.family == AddressFamily::V4 ? slot.first : slot.second).push_back(&t);
    }
    std::map<PairKey, std::vector<PairedSample>> out;
    for (auto& [key, slot] : grouped) {
        auto samples = match_group(slot.first, slot.second, window_s);
        if (!samples.empty()) {
            out.emplace(key, std::move(samples));
        }
    }
    return out;
}

std::vector<PairedSample> percentile_filter(std::span<const PairedSample> samples, double lo,
                                            double hi) {
    if (samples.empty()) {
        throw std::invalid_argument("percentile_filter: empty input");
    }
    std::vector<double> v4;
    std::vector<double> v6;
    v4.reserve(samples.size());
    v6.reserve(samples.size());
    for (const auto& s : samples) {
        v4.push_back(s.rct_v4);
        v6.push_back(s.rct_v6);
    }
    const double v4_lo = stats::percentile(v4, lo);
    const double v4_hi = stats::percentile(v4, hi);
    const double v6_lo = stats::percentile(v6, lo);
    const double v6_hi = stats::percentile(v6, hi);

    std::vector<PairedSample> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        if (s.rct_v4 >= v4_lo && s.rct_v4 <= v4_hi && s.rct_v6 >= v6_lo && s.rct_v6 <= v6_hi) {
            out.push_back(s);
        }
    }
    return out;
}

std::vector<double> ratio_series(std::span<const PairedSample> samples) {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        out.push_back(s.rct_v4 / s.rct_v6);
    }
    return out;
}

PairClassification classify_pair(std::span<const PairedSample> samples,
                                 std::size_t min_samples) {
    constexpr double kPValueThreshold = 0.02;
    constexpr double kCiQuantile = 0.99; // two-sided 98%

    if (samples.size() < min_samples) {
        throw std::invalid_argument("classify_pair: fewer samples than the minimum");
    }
    std::vector<double> v4;
    std::vector<double> v6;
    v4.reserve(samples.size());
    v6.reserve(samples.size());
    for (const auto& s : samples) {
        v4.push_back(s.rct_v4);
        v6.push_back(s.rct_v6);
    }
    const auto welch = stats::welch_t_test(v4, v6);
    if (!(welch.p_two_sided < kPValueThreshold)) {
        return PairClassification::NoneBetter;
    }

    const bool v4_lower = welch.mean_a < welch.mean_b;
    const double abs_diff = std::fabs(welch.mean_a - welch.mean_b);
    const double higher_stddev = v4_lower ? stats::sample_stddev(v6) : stats::sample_stddev(v4);
    // CI bound nearer zero on |mean difference|; zero se collapses the
    // interval onto the observed difference.
    const double ci_lower =
        welch.se == 0.0 ? abs_diff
                        : abs_diff - stats::student_t_quantile(kCiQuantile, welch.df) * welch.se;
    if (!(ci_lower > higher_stddev)) {
        return PairClassification::NoneBetter;
    }
    return v4_lower ? PairClassification::V4Better : PairClassification::V6Better;
}

SegmentGroup classify_groups(PairClassification global,
                             std::span<const PairClassification> segment_classes) {
    if (segment_classes.empty()) {
        throw std::invalid_argument("classify_groups: need at least one segment class");
    }
    bool any_opposite = false;
    bool any_none = false;
    bool all_match = true;
    for (PairClassification c : segment_classes) {
        if (c != global) {
            all_match = false;
        }
        if (c == PairClassification::NoneBetter) {
            any_none = true;
        } else if (c != global) {
            any_opposite = true;
        }
    }
    if (all_match) {
        return SegmentGroup::D;
    }
    if (global == PairClassification::NoneBetter) {
        return SegmentGroup::C;
    }
    if (any_opposite) {
        return SegmentGroup::A;
    }
    if (any_none) {
        return SegmentGroup::B;
    }
    return SegmentGroup::D;
}

std::map<int64_t, ProbeBestRatio>
probe_best_ratio(const std::map<PairKey, PairClassification>& classifications) {
    struct Counts {
        std::size_t v4 = 0;
        std::size_t v6 = 0;
        std::size_t none = 0;
    };
    std::map<int64_t, Counts> per_probe;
    for (const auto& [key, cls] : classifications) {
        auto& c = per_probe[key.probe_id];
        switch (cls) {
        case PairClassification::V4Better: ++c.v4; break;
        case PairClassification::V6Better: ++c.v6; break;
        case PairClassification::NoneBetter: ++c.none; break;
        }
    }
    std::map<int64_t, ProbeBestRatio> out;
    for (const auto& [probe, c] : per_probe) {
        const std::size_t total = c.v4 + c.v6 + c.none;
        ProbeBestRatio r;
        r.best_family = c.v4 > c.v6 ? AddressFamily::V4 : AddressFamily::V6;
        const std::size_t best_count = r.best_family == AddressFamily::V4 ? c.v4 : c.v6;
        r.ratio_best = static_cast<double>(best_count) / static_cast<double>(total);
        r.ratio_none = static_cast<double>(c.none) / static_cast<double>(total);
        out.emplace(probe, r);
    }
    return out;
}

std::map<std::string, std::map<FamilyMode, double>>
experiment_report(std::span<const ConnectionObservation> connections, std::size_t min_tests,
                  std::size_t warmup) {
    std::map<std::string, std::map<FamilyMode, std::vector<double>>> grouped;
    for (const auto& c : connections) {
        grouped[c.destination][c.mode].push_back(c.handshake_ms);
    }
    std::map<std::string, std::map<FamilyMode, double>> out;
    for (const auto& [dest, modes] : grouped) {
        for (const auto& [mode, values] : modes) {
            if (values.size() <= warmup) {
                continue;
            }
            const std::span<const double> kept(values.data() + warmup, values.size() - warmup);
            if (kept.size() < min_tests) {
                continue;
            }
            out[dest][mode] = stats::mean(kept);
        }
    }
    return out;
}

} // namespace steerdns::analysis
