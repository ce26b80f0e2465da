#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace steerdns {

enum class AddressFamily : uint8_t { V4 = 0, V6 = 1 };

constexpr AddressFamily other(AddressFamily f) {
    return f == AddressFamily::V4 ? AddressFamily::V6 : AddressFamily::V4;
}

constexpr std::size_t family_index(AddressFamily f) {
    return f == AddressFamily::V4 ? 0 : 1;
}

constexpr std::string_view family_name(AddressFamily f) {
    return f == AddressFamily::V4 ? "v4" : "v6";
}

/// Two-action EXP3 instance deciding between IPv4 and IPv6.
///
/// Probabilities mix the weight ratio with a uniform exploration floor:
///   p_i = (1 - gamma) * w_i / (w_v4 + w_v6) + gamma / 2
/// Updates importance-weight the observed gain and multiply the chosen
/// weight by exp(gamma * g_hat / 2). Weights are rescaled by the larger
/// one after each effective update; probabilities depend only on their
/// ratio, so the rescale is not observable but keeps the values bounded.
///
/// Randomness is injected: choose() takes the uniform sample instead of
/// owning a generator, so replays are deterministic.
class Exp3 {
public:
    /// gamma must lie in (0, 1]; throws std::invalid_argument otherwise.
    explicit Exp3(double gamma);

    /// State with explicit weights; both must be positive and finite.
    Exp3(double gamma, std::array<double, 2> weights);

    /// {P(V4), P(V6)}; sums to 1, each >= gamma / 2.
    std::array<double, 2> probabilities() const;

    double probability(AddressFamily f) const { return probabilities()[family_index(f)]; }

    /// V4 iff uniform_sample < P(V4). The boundary sample selects V6.
    AddressFamily choose(double uniform_sample) const;

    /// gain must lie in [0, 1]; throws std::invalid_argument otherwise.
    /// A zero gain leaves the state bit-identical.
    void update(AddressFamily action, double gain);

    double gamma() const { return gamma_; }
    std::array<double, 2> weights() const { return weights_; }

private:
    double gamma_;
    std::array<double, 2> weights_{1.0, 1.0};
};

/// Most recent latency observation per address family for one destination
/// group. A slot stays empty until that family is first observed.
struct RewardContext {
    std::array<std::optional<double>, 2> last_ms;

    std::optional<double> last(AddressFamily f) const { return last_ms[family_index(f)]; }
};

/// Comparative reward: full gain when the chosen family beat the last
/// observation of the other family, none otherwise. A family with no
/// opposite observation yet earns the full gain, which keeps the very
/// first observations of both families symmetric.
///
/// Records observed_ms as the new last observation for `chosen`.
/// observed_ms must be positive; throws std::invalid_argument otherwise.
double compute_gain(AddressFamily chosen, double observed_ms, RewardContext& ctx);

} // namespace steerdns
