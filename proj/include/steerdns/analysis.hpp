#pragma once

#include "steerdns/exp3.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace steerdns::analysis {

/// One HTTP test observation: which probe measured which anchor, when,
/// over which family, and the request completion time it saw.
struct RawTest {
    int64_t probe_id = 0;
    int64_t anchor_id = 0;
    double timestamp = 0.0; ///< seconds since epoch
    AddressFamily family = AddressFamily::V4;
    double rct_ms = 0.0;
};

/// A v4 test and a v6 test of the same (probe, anchor) taken within the
/// pairing window. timestamp is the earlier of the two tests.
struct PairedSample {
    double timestamp = 0.0;
    double rct_v4 = 0.0;
    double rct_v6 = 0.0;
};

struct PairKey {
    int64_t probe_id = 0;
    int64_t anchor_id = 0;

    auto operator<=>(const PairKey&) const = default;
};

enum class PairClassification { V4Better, V6Better, NoneBetter };

std::string_view classification_name(PairClassification c);

enum class SegmentGroup { A, B, C, D };

std::string_view group_name(SegmentGroup g);

/// Matches v4 and v6 tests of the same (probe, anchor) into pairs.
/// Candidate pairs within window_s are taken greedily by increasing time
/// distance, so each test joins its nearest available counterpart and is
/// used at most once. Unmatched tests are dropped. Output pairs are sorted
/// by timestamp.
std::map<PairKey, std::vector<PairedSample>>
pair_tests(std::span<const RawTest> tests, double window_s = 120.0);

/// Drops samples whose v4 or v6 completion time falls outside that
/// family's [lo, hi] percentile range, both computed over the input.
std::vector<PairedSample> percentile_filter(std::span<const PairedSample> samples,
                                            double lo = 5.0, double hi = 95.0);

/// rct_v4 / rct_v6 per sample.
std::vector<double> ratio_series(std::span<const PairedSample> samples);

/// Welch t-test classification of a sample set.
///
/// The lower-mean family is declared better only when the two-sided
/// p-value is below 0.02 and the 98% confidence interval on the mean
/// difference stays, at its bound nearer zero, above the sample standard
/// deviation of the higher-mean family. The second condition rejects
/// strongly overlapping distributions.
///
/// Throws std::invalid_argument below min_samples.
PairClassification classify_pair(std::span<const PairedSample> samples,
                                 std::size_t min_samples = 30);

/// Table-2 grouping of a pair from its whole-trace class and its
/// per-segment classes.
SegmentGroup classify_groups(PairClassification global,
                             std::span<const PairClassification> segment_classes);

struct ProbeBestRatio {
    AddressFamily best_family = AddressFamily::V6;
    double ratio_best = 0.0;
    double ratio_none = 0.0;
};

/// Per probe: the family winning the most of its anchors (ties go to V6),
/// the fraction of anchors it wins, and the fraction with no winner.
std::map<int64_t, ProbeBestRatio>
probe_best_ratio(const std::map<PairKey, PairClassification>& classifications);

enum class FamilyMode { V4Only, V6Only, Adaptive };

std::string_view mode_name(FamilyMode m);

struct ConnectionObservation {
    std::string destination;
    FamilyMode mode = FamilyMode::Adaptive;
    double handshake_ms = 0.0;
};

/// Mean handshake time per destination and mode, skipping each
/// (destination, mode)'s first `warmup` observations and dropping those
/// with fewer than min_tests observations left after the warmup.
std::map<std::string, std::map<FamilyMode, double>>
experiment_report(std::span<const ConnectionObservation> connections,
                  std::size_t min_tests = 100, std::size_t warmup = 60);

} // namespace steerdns::analysis
