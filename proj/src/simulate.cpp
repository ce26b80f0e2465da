#include "steerdns/simulate.hpp"

#include "steerdns/rng.hpp"
#include "steerdns/stats.hpp"

#include <algorithm>
#include <stdexcept>

namespace steerdns::sim {

namespace {

double pooled_median_rct(std::span<const PairedSample> samples) {
    std::vector<double> all;
    all.reserve(samples.size() * 2);
    for (const auto& s : samples) {
        all.push_back(s.rct_v4);
        all.push_back(s.rct_v6);
    }
    return stats::median(std::move(all));
}

PairClassification classify_or_none(std::span<const PairedSample> samples) {
    if (samples.size() < 30) {
        return PairClassification::NoneBetter;
    }
    return analysis::classify_pair(samples);
}

struct RunScore {
    double ratio;
    double gain_ms;
};

} // namespace

SimulationResult run_simulation(std::span<const PairedSample> samples,
                                const SimulationConfig& cfg) {
    if (cfg.runs < 1) {
        throw std::invalid_argument("run_simulation: runs must be >= 1");
    }
    if (samples.size() <= cfg.train_rounds) {
        throw std::invalid_argument("run_simulation: trace shorter than train_rounds + 1");
    }

    std::vector<double> ratios;
    std::vector<double> gains;
    ratios.reserve(cfg.runs);
    gains.reserve(cfg.runs);

    for (std::size_t run = 0; run < cfg.runs; ++run) {
        SplitMix64 rng(mix_seed(cfg.base_seed, cfg.pair_salt, run));
        Exp3 bandit(cfg.gamma);
        RewardContext ctx;
        std::size_t wins = 0;
        std::size_t eval_rounds = 0;
        double gain_sum = 0.0;

        for (std::size_t round = 0; round < samples.size(); ++round) {
            const auto& s = samples[round];
            const AddressFamily chosen = bandit.choose(rng.next_double());
            const double chosen_rct = chosen == AddressFamily::V4 ? s.rct_v4 : s.rct_v6;
            const double other_rct = chosen == AddressFamily::V4 ? s.rct_v6 : s.rct_v4;

            if (round >= cfg.train_rounds) {
                ++eval_rounds;
                if (chosen_rct < other_rct) {
                    ++wins;
                    gain_sum += other_rct - chosen_rct;
                }
            }
            bandit.update(chosen, compute_gain(chosen, chosen_rct, ctx));
        }
        ratios.push_back(static_cast<double>(wins) / static_cast<double>(eval_rounds));
        gains.push_back(gain_sum / static_cast<double>(eval_rounds));
    }

    SimulationResult r;
    r.best_choice_ratio = stats::median(std::move(ratios));
    r.expected_gain_abs_ms = stats::median(std::move(gains));
    r.expected_gain_rel = r.expected_gain_abs_ms / pooled_median_rct(samples);
    r.category = classify_or_none(samples);
    return r;
}

SimulationResult score_fixed_family(std::span<const PairedSample> samples, AddressFamily family,
                                    const SimulationConfig& cfg) {
    if (samples.size() <= cfg.train_rounds) {
        throw std::invalid_argument("score_fixed_family: trace shorter than train_rounds + 1");
    }
    std::size_t wins = 0;
    std::size_t eval_rounds = 0;
    double gain_sum = 0.0;
    for (std::size_t round = cfg.train_rounds; round < samples.size(); ++round) {
        const auto& s = samples[round];
        const double chosen_rct = family == AddressFamily::V4 ? s.rct_v4 : s.rct_v6;
        const double other_rct = family == AddressFamily::V4 ? s.rct_v6 : s.rct_v4;
        ++eval_rounds;
        if (chosen_rct < other_rct) {
            ++wins;
            gain_sum += other_rct - chosen_rct;
        }
    }
    SimulationResult r;
    r.best_choice_ratio = static_cast<double>(wins) / static_cast<double>(eval_rounds);
    r.expected_gain_abs_ms = gain_sum / static_cast<double>(eval_rounds);
    r.expected_gain_rel = r.expected_gain_abs_ms / pooled_median_rct(samples);
    r.category = classify_or_none(samples);
    return r;
}

std::optional<AddressFamily> trace_winner(std::span<const PairedSample> samples) {
    std::size_t v4_wins = 0;
    std::size_t v6_wins = 0;
    for (const auto& s : samples) {
        if (s.rct_v4 < s.rct_v6) {
            ++v4_wins;
        } else if (s.rct_v6 < s.rct_v4) {
            ++v6_wins;
        }
    }
    if (v4_wins == v6_wins) {
        return std::nullopt;
    }
    return v4_wins > v6_wins ? AddressFamily::V4 : AddressFamily::V6;
}

SimulationResult baseline_aposteriori(std::span<const PairedSample> samples,
                                      const SimulationConfig& cfg) {
    if (samples.empty()) {
        throw std::invalid_argument("baseline_aposteriori: empty trace");
    }
    const AddressFamily family = trace_winner(samples).value_or(AddressFamily::V6);
    return score_fixed_family(samples, family, cfg);
}

AddressFamily
baseline_probe_best(const std::map<int64_t, std::optional<AddressFamily>>& per_pair_winners) {
    if (per_pair_winners.empty()) {
        throw std::invalid_argument("baseline_probe_best: need at least one anchor");
    }
    std::size_t v4 = 0;
    std::size_t v6 = 0;
    for (const auto& [anchor, winner] : per_pair_winners) {
        if (!winner.has_value()) {
            continue;
        }
        (*winner == AddressFamily::V4 ? v4 : v6) += 1;
    }
    return v4 > v6 ? AddressFamily::V4 : AddressFamily::V6;
}

CdfTables aggregate_cdf(std::span<const LabeledResult> results) {
    if (results.empty()) {
        throw std::invalid_argument("aggregate_cdf: empty input");
    }
    std::map<std::string, std::map<std::string, std::map<std::string, std::vector<double>>>>
        grouped;
    for (const auto& lr : results) {
        const std::string category{analysis::classification_name(lr.result.category)};
        auto& metrics = grouped[category][lr.method];
        metrics["best_choice_ratio"].push_back(lr.result.best_choice_ratio);
        metrics["expected_gain_abs_ms"].push_back(lr.result.expected_gain_abs_ms);
        metrics["expected_gain_rel"].push_back(lr.result.expected_gain_rel);
    }

    CdfTables tables;
    for (auto& [category, methods] : grouped) {
        for (auto& [method, metrics] : methods) {
            for (auto& [metric, values] : metrics) {
                std::sort(values.begin(), values.end());
                std::vector<CdfPoint> cdf;
                const double n = static_cast<double>(values.size());
                for (std::size_t i = 0; i < values.size(); ++i) {
                    const bool last_of_value = i + 1 == values.size() || values[i + 1] != values[i];
                    if (last_of_value) {
                        cdf.push_back({values[i], static_cast<double>(i + 1) / n});
                    }
                }
                tables[category][method][metric] = std::move(cdf);
            }
        }
    }
    return tables;
}

} // namespace steerdns::sim
