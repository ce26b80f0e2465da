#pragma once

#include "steerdns/analysis.hpp"
#include "steerdns/exp3.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace steerdns::sim {

using analysis::PairClassification;
using analysis::PairedSample;

struct SimulationConfig {
    double gamma = 0.1;
    std::size_t train_rounds = 60;
    std::size_t runs = 100;
    uint64_t base_seed = 1;
    /// Mixed into each run's seed so simulations of distinct traces draw
    /// independent streams from one master seed.
    uint64_t pair_salt = 0;
};

struct SimulationResult {
    /// Fraction of evaluation rounds whose chosen family had the strictly
    /// lower completion time; median across runs. Tie rounds never count.
    double best_choice_ratio = 0.0;
    /// Median across runs of the mean positive part of (other - chosen)
    /// over evaluation rounds, in milliseconds.
    double expected_gain_abs_ms = 0.0;
    /// expected_gain_abs_ms relative to the trace's pooled median rct.
    double expected_gain_rel = 0.0;
    PairClassification category = PairClassification::NoneBetter;
};

/// Replays the trace through a fresh EXP3 instance per run: each round
/// chooses a family, scores it on rounds past train_rounds, then feeds the
/// comparative reward back. Deterministic for a fixed config.
///
/// Throws std::invalid_argument when the trace has no evaluation round.
SimulationResult run_simulation(std::span<const PairedSample> samples,
                                const SimulationConfig& cfg);

/// Fixed choice of the family that wins the most rounds over the full
/// trace (ties go to V6), scored over the same evaluation window.
SimulationResult baseline_aposteriori(std::span<const PairedSample> samples,
                                      const SimulationConfig& cfg);

/// Scores one fixed family over the evaluation window; shared by both
/// fixed-choice baselines.
SimulationResult score_fixed_family(std::span<const PairedSample> samples, AddressFamily family,
                                    const SimulationConfig& cfg);

/// Family winning the most pairs over the trace, or nullopt on a tie.
std::optional<AddressFamily> trace_winner(std::span<const PairedSample> samples);

/// Majority family across one probe's per-pair winners; pairs without a
/// winner abstain and overall ties go to V6.
AddressFamily
baseline_probe_best(const std::map<int64_t, std::optional<AddressFamily>>& per_pair_winners);

struct LabeledResult {
    std::string method;
    SimulationResult result;
};

struct CdfPoint {
    double value = 0.0;
    double cum_fraction = 0.0;
};

/// category -> method -> metric -> CDF steps, one step per distinct value.
using CdfTables =
    std::map<std::string, std::map<std::string, std::map<std::string, std::vector<CdfPoint>>>>;

CdfTables aggregate_cdf(std::span<const LabeledResult> results);

} // namespace steerdns::sim
