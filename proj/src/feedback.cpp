#include "steerdns/feedback.hpp"

#include <stdexcept>

namespace steerdns::feedback {

std::string_view decode_error_name(DecodeError e) {
    switch (e) {
    case DecodeError::BadMagic: return "bad_magic";
    case DecodeError::BadVersion: return "bad_version";
    case DecodeError::BadFamily: return "bad_family";
    case DecodeError::LengthMismatch: return "length_mismatch";
    }
    return "length_mismatch";
}

std::vector<uint8_t> encode(const FeedbackMessage& msg) {
    if (msg.name.empty() || msg.name.size() > 255) {
        throw std::invalid_argument("feedback: name must be 1..255 bytes");
    }
    if (msg.family != 4 && msg.family != 6) {
        throw std::invalid_argument("feedback: family must be 4 or 6");
    }
    std::vector<uint8_t> out;
    out.reserve(kHeaderSize + msg.name.size());
    out.push_back(kMagic[0]);
    out.push_back(kMagic[1]);
    out.push_back(msg.version);
    out.push_back(msg.family);
    out.push_back(msg.metric_kind);
    out.push_back(static_cast<uint8_t>(msg.name.size()));
    out.push_back(static_cast<uint8_t>(msg.metric_value_us >> 24));
    out.push_back(static_cast<uint8_t>(msg.metric_value_us >> 16 & 0xFF));
    out.push_back(static_cast<uint8_t>(msg.metric_value_us >> 8 & 0xFF));
    out.push_back(static_cast<uint8_t>(msg.metric_value_us & 0xFF));
    out.insert(out.end(), msg.name.begin(), msg.name.end());
    return out;
}

std::variant<FeedbackMessage, DecodeError> decode(std::span<const uint8_t> datagram) {
    if (datagram.size() < kHeaderSize) {
        return DecodeError::LengthMismatch;
    }
    if (datagram[0] != kMagic[0] || datagram[1] != kMagic[1]) {
        return DecodeError::BadMagic;
    }
    if (datagram[2] != kVersion) {
        return DecodeError::BadVersion;
    }
    if (datagram[3] != 4 && datagram[3] != 6) {
        return DecodeError::BadFamily;
    }
    const uint8_t name_len = datagram[5];
    if (name_len == 0 || datagram.size() != kHeaderSize + name_len) {
        return DecodeError::LengthMismatch;
    }
    FeedbackMessage msg;
    msg.version = datagram[2];
    msg.family = datagram[3];
    msg.metric_kind = datagram[4];
    msg.metric_value_us = static_cast<uint32_t>(datagram[6]) << 24 |
                          static_cast<uint32_t>(datagram[7]) << 16 |
                          static_cast<uint32_t>(datagram[8]) << 8 |
                          static_cast<uint32_t>(datagram[9]);
    msg.name.assign(reinterpret_cast<const char*>(datagram.data() + kHeaderSize), name_len);
    return msg;
}

std::optional<ApplyOutcome> apply_feedback(const FeedbackMessage& msg, SteeringRegistry& registry,
                                           const SuffixList& suffixes) {
    if (msg.metric_kind != kMetricHandshakeTime) {
        return std::nullopt;
    }
    const double metric_ms = static_cast<double>(msg.metric_value_us) / 1000.0;
    if (!(metric_ms > 0.0)) {
        return std::nullopt;
    }
    std::string group;
    try {
        group = group_key(msg.name, suffixes);
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }

    const auto state = registry.get_or_create(group);
    ApplyOutcome outcome;
    outcome.group = group;
    outcome.family = msg.address_family();
    outcome.metric_ms = metric_ms;
    {
        std::scoped_lock lock(state->mutex);
        outcome.gain = compute_gain(outcome.family, metric_ms, state->reward);
        state->bandit.update(outcome.family, outcome.gain);
        outcome.probabilities = state->bandit.probabilities();
    }
    return outcome;
}

} // namespace steerdns::feedback
