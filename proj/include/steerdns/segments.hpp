#pragma once

#include "steerdns/analysis.hpp"

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace steerdns::analysis {

/// Half-open index range [start, end) into the sample series.
using SegmentRange = std::pair<std::size_t, std::size_t>;

/// Splits the per-sample v4 - v6 difference series into segments of
/// stable mean via binary segmentation.
///
/// A split is accepted when it reduces the within-segment sum of squared
/// deviations by more than 2 * sigma^2 * log(n), with sigma^2 estimated
/// from first differences of the signal. Every segment keeps at least
/// min_len samples; series shorter than 2 * min_len come back as one
/// segment. Ranges are contiguous, ordered, and cover [0, n).
std::vector<SegmentRange> detect_segments(std::span<const PairedSample> samples,
                                          std::size_t min_len = 30);

/// Same segmentation over a plain signal; detect_segments builds the
/// difference series and forwards here.
std::vector<SegmentRange> detect_segments_signal(std::span<const double> signal,
                                                 std::size_t min_len = 30);

} // namespace steerdns::analysis
