#pragma once

#include "steerdns/exp3.hpp"
#include "steerdns/steering.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace steerdns::feedback {

/// Wire layout, network byte order:
///   offset 0  magic        0xAF 0x53
///   offset 2  version      currently 1
///   offset 3  family       4 or 6
///   offset 4  metric_kind  0 = connection handshake time
///   offset 5  name_len     byte length of name, 1..255
///   offset 6  metric_value microseconds, unsigned 32-bit big-endian
///   offset 10 name         name_len bytes of UTF-8 domain name
/// Total datagram size is 10 + name_len bytes.
inline constexpr std::array<uint8_t, 2> kMagic{0xAF, 0x53};
inline constexpr uint8_t kVersion = 1;
inline constexpr uint8_t kMetricHandshakeTime = 0;
inline constexpr std::size_t kHeaderSize = 10;

struct FeedbackMessage {
    uint8_t version = kVersion;
    uint8_t family = 6; ///< 4 or 6
    uint8_t metric_kind = kMetricHandshakeTime;
    uint32_t metric_value_us = 0;
    std::string name;

    AddressFamily address_family() const {
        return family == 4 ? AddressFamily::V4 : AddressFamily::V6;
    }

    bool operator==(const FeedbackMessage&) const = default;
};

enum class DecodeError { BadMagic, BadVersion, BadFamily, LengthMismatch };

std::string_view decode_error_name(DecodeError e);

/// Throws std::invalid_argument on an empty name, a name over 255 bytes,
/// or a family other than 4 or 6.
std::vector<uint8_t> encode(const FeedbackMessage& msg);

/// Strict inverse of encode. Never throws on wire input; malformed
/// datagrams come back as a DecodeError.
std::variant<FeedbackMessage, DecodeError> decode(std::span<const uint8_t> datagram);

struct ApplyOutcome {
    std::string group;
    AddressFamily family;
    double metric_ms = 0.0;
    double gain = 0.0;
    std::array<double, 2> probabilities{};
};

/// Converts the metric to milliseconds, folds it through the group's
/// reward context, and trains the group's bandit. Unknown groups are
/// created on demand. Returns nullopt (and changes nothing) for metric
/// kinds other than handshake time, non-positive metrics, or names that
/// yield no group key.
std::optional<ApplyOutcome> apply_feedback(const FeedbackMessage& msg, SteeringRegistry& registry,
                                           const SuffixList& suffixes);

} // namespace steerdns::feedback
