#pragma once

#include "steerdns/exp3.hpp"
#include "steerdns/rng.hpp"

#include <array>
#include <cstdint>
#include <istream>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

namespace steerdns {

struct IPv4Address {
    std::array<uint8_t, 4> bytes{};

    bool operator==(const IPv4Address&) const = default;
};

struct IPv6Address {
    std::array<uint8_t, 16> bytes{};

    bool operator==(const IPv6Address&) const = default;
};

/// IPv4-mapped IPv6 address: 80 zero bits, 16 one bits, the IPv4 bits.
IPv6Address map_v4_to_v6(const IPv4Address& addr);

std::optional<IPv4Address> parse_ipv4(std::string_view text);
std::string to_string(const IPv4Address& addr);
std::string to_string(const IPv6Address& addr);

/// Registry suffixes under which a two-label tail is not registrable
/// (e.g. co.uk). One suffix per line, '#' comments allowed.
class SuffixList {
public:
    static SuffixList from_file(const std::string& path);
    static SuffixList from_stream(std::istream& in);

    void add(std::string_view suffix);
    bool contains(std::string_view suffix) const;
    std::size_t size() const { return suffixes_.size(); }

private:
    std::unordered_set<std::string> suffixes_;
};

/// Registrable group for a name: its last two labels lowercased, or three
/// when the two-label tail is a listed registry suffix. Single-label
/// names group as themselves. Throws std::invalid_argument on empty or
/// root-only names.
std::string group_key(std::string_view name, const SuffixList& suffixes);
std::string group_key(std::string_view name);

/// Bandit state for one destination group. choose and update run under
/// the entry's mutex; the registry hands out shared_ptrs so the map lock
/// is never held across bandit work.
struct GroupState {
    GroupState(double gamma, uint64_t seed) : bandit(gamma), rng(seed) {}

    std::mutex mutex;
    Exp3 bandit;
    RewardContext reward;
    /// Family announced in the most recent steered answer. Kept for
    /// logging; feedback attribution uses the family carried by the
    /// feedback message itself.
    std::optional<AddressFamily> pending_choice;
    SplitMix64 rng;

    /// Draws a family under the entry mutex and records it as pending.
    struct Choice {
        AddressFamily family;
        std::array<double, 2> probabilities;
    };
    Choice choose_locked();
};

class SteeringRegistry {
public:
    SteeringRegistry(double gamma, uint64_t seed) : gamma_(gamma), seed_(seed) {}

    std::shared_ptr<GroupState> get_or_create(const std::string& group);
    std::shared_ptr<GroupState> find(const std::string& group) const;
    std::size_t size() const;

private:
    double gamma_;
    uint64_t seed_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, std::shared_ptr<GroupState>> groups_;
};

} // namespace steerdns
