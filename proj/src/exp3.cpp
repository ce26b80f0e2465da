#include "steerdns/exp3.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace steerdns {

Exp3::Exp3(double gamma) : gamma_(gamma) {
    if (!(gamma > 0.0) || gamma > 1.0) {
        throw std::invalid_argument("exp3: gamma must be in (0, 1]");
    }
}

Exp3::Exp3(double gamma, std::array<double, 2> weights) : Exp3(gamma) {
    if (!(weights[0] > 0.0) || !(weights[1] > 0.0) || !std::isfinite(weights[0]) ||
        !std::isfinite(weights[1])) {
        throw std::invalid_argument("exp3: weights must be positive and finite");
    }
    weights_ = weights;
}

std::array<double, 2> Exp3::probabilities() const {
    const double total = weights_[0] + weights_[1];
    const double floor = gamma_ / 2.0;
    const double p_v4 = (1.0 - gamma_) * (weights_[0] / total) + floor;
    const double p_v6 = (1.0 - gamma_) * (weights_[1] / total) + floor;
    return {p_v4, p_v6};
}

AddressFamily Exp3::choose(double uniform_sample) const {
    return uniform_sample < probabilities()[0] ? AddressFamily::V4 : AddressFamily::V6;
}

void Exp3::update(AddressFamily action, double gain) {
    if (!(gain >= 0.0) || gain > 1.0) {
        throw std::invalid_argument("exp3: gain must be in [0, 1]");
    }
    if (gain == 0.0) {
        return;
    }
    const std::size_t idx = family_index(action);
    const double estimated = gain / probabilities()[idx];
    weights_[idx] *= std::exp(gamma_ * estimated / 2.0);

    const double top = std::max(weights_[0], weights_[1]);
    weights_[0] /= top;
    weights_[1] /= top;
    // Keeps both weights strictly positive even after very long one-sided
    // streaks; the probability is already pinned at the gamma/2 floor there.
    const double tiny = std::numeric_limits<double>::min();
    weights_[0] = std::max(weights_[0], tiny);
    weights_[1] = std::max(weights_[1], tiny);
}

double compute_gain(AddressFamily chosen, double observed_ms, RewardContext& ctx) {
    if (!(observed_ms > 0.0)) {
        throw std::invalid_argument("compute_gain: metric must be positive");
    }
    const auto opposite = ctx.last(other(chosen));
    const double gain = (!opposite.has_value() || observed_ms < *opposite) ? 1.0 : 0.0;
    ctx.last_ms[family_index(chosen)] = observed_ms;
    return gain;
}

} // namespace steerdns
