#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace steerdns::dns {

using CacheClock = std::chrono::steady_clock;
using CacheTime = CacheClock::time_point;

/// Unexpired view of one name's cached state. Served TTLs are the
/// remaining lifetime in whole seconds, floored at 1.
struct CacheSnapshot {
    std::vector<std::pair<std::array<uint8_t, 4>, uint32_t>> a;
    std::vector<std::pair<std::array<uint8_t, 16>, uint32_t>> aaaa;
    bool a_negative = false;
    bool aaaa_negative = false;

    bool any_state() const { return !a.empty() || !aaaa.empty() || a_negative || aaaa_negative; }
};

/// A/AAAA record cache keyed by lowercase name. Each record carries its
/// own absolute expiry; expired records are invisible to lookups even
/// before a purge runs. A fresh store for a family replaces that family's
/// previous state, positive or negative.
class DnsCache {
public:
    void store_a(std::string_view name,
                 std::span<const std::pair<std::array<uint8_t, 4>, uint32_t>> records,
                 CacheTime now);
    void store_aaaa(std::string_view name,
                    std::span<const std::pair<std::array<uint8_t, 16>, uint32_t>> records,
                    CacheTime now);

    /// Marks a family as known-empty for ttl_s seconds.
    void store_negative_a(std::string_view name, uint32_t ttl_s, CacheTime now);
    void store_negative_aaaa(std::string_view name, uint32_t ttl_s, CacheTime now);

    /// nullopt when nothing unexpired is known about the name.
    std::optional<CacheSnapshot> lookup(std::string_view name, CacheTime now) const;

    /// Drops expired records and empty entries.
    void purge_expired(CacheTime now);

    std::size_t entry_count() const;

private:
    struct TimedA {
        std::array<uint8_t, 4> addr;
        CacheTime expiry;
    };
    struct TimedAAAA {
        std::array<uint8_t, 16> addr;
        CacheTime expiry;
    };
    struct Entry {
        std::vector<TimedA> a;
        std::vector<TimedAAAA> aaaa;
        std::optional<CacheTime> a_negative_until;
        std::optional<CacheTime> aaaa_negative_until;
    };

    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, Entry> entries_;
};

} // namespace steerdns::dns
