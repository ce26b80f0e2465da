#include "steerdns/dns/cache.hpp"

#include "steerdns/dns/wire.hpp"

#include <algorithm>
#include <mutex>

namespace steerdns::dns {

namespace {

uint32_t remaining_seconds(CacheTime expiry, CacheTime now) {
    const auto left = std::chrono::duration_cast<std::chrono::seconds>(expiry - now).count();
    return left < 1 ? 1u : static_cast<uint32_t>(left);
}

CacheTime expiry_for(uint32_t ttl_s, CacheTime now) {
    return now + std::chrono::seconds(ttl_s);
}

} // namespace

void DnsCache::store_a(std::string_view name,
                       std::span<const std::pair<std::array<uint8_t, 4>, uint32_t>> records,
                       CacheTime now) {
    const std::string key = to_lower_name(name);
    std::unique_lock lock(mutex_);
    auto& entry = entries_[key];
    entry.a.clear();
    entry.a_negative_until.reset();
    for (const auto& [addr, ttl] : records) {
        entry.a.push_back({addr, expiry_for(ttl, now)});
    }
}

void DnsCache::store_aaaa(std::string_view name,
                          std::span<const std::pair<std::array<uint8_t, 16>, uint32_t>> records,
                          CacheTime now) {
    const std::string key = to_lower_name(name);
    std::unique_lock lock(mutex_);
    auto& entry = entries_[key];
    entry.aaaa.clear();
    entry.aaaa_negative_until.reset();
    for (const auto& [addr, ttl] : records) {
        entry.aaaa.push_back({addr, expiry_for(ttl, now)});
    }
}

void DnsCache::store_negative_a(std::string_view name, uint32_t ttl_s, CacheTime now) {
    const std::string key = to_lower_name(name);
    std::unique_lock lock(mutex_);
    auto& entry = entries_[key];
    entry.a.clear();
    entry.a_negative_until = expiry_for(ttl_s, now);
}

void DnsCache::store_negative_aaaa(std::string_view name, uint32_t ttl_s, CacheTime now) {
    const std::string key = to_lower_name(name);
    std::unique_lock lock(mutex_);
    auto& entry = entries_[key];
    entry.aaaa.clear();
    entry.aaaa_negative_until = expiry_for(ttl_s, now);
}

std::optional<CacheSnapshot> DnsCache::lookup(std::string_view name, CacheTime now) const {
    const std::string key = to_lower_name(name);
    std::shared_lock lock(mutex_);
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    const Entry& entry = it->second;
    CacheSnapshot snap;
    for (const auto& rec : entry.a) {
        if (rec.expiry > now) {
            snap.a.emplace_back(rec.addr, remaining_seconds(rec.expiry, now));
        }
    }
    for (const auto& rec : entry.aaaa) {
        if (rec.expiry > now) {
            snap.aaaa.emplace_back(rec.addr, remaining_seconds(rec.expiry, now));
        }
    }
    snap.a_negative = entry.a_negative_until && *entry.a_negative_until > now;
    snap.aaaa_negative = entry.aaaa_negative_until && *entry.aaaa_negative_until > now;
    if (!snap.any_state()) {
        return std::nullopt;
    }
    return snap;
}

void DnsCache::purge_expired(CacheTime now) {
    std::unique_lock lock(mutex_);
    for (auto it = entries_.begin(); it != entries_.end();) {
        Entry& e = it->second;
        std::erase_if(e.a, [&](const TimedA& r) { return r.expiry <= now; });
        std::erase_if(e.aaaa, [&](const TimedAAAA& r) { return r.expiry <= now; });
        if (e.a_negative_until && *e.a_negative_until <= now) {
            e.a_negative_until.reset();
        }
        if (e.aaaa_negative_until && *e.aaaa_negative_until <= now) {
            e.aaaa_negative_until.reset();
        }
        const bool empty = e.a.empty() && e.aaaa.empty() && !e.a_negative_until &&
                           !e.aaaa_negative_until;
        it = empty ? entries_.erase(it) : std::next(it);
    }
}

std::size_t DnsCache::entry_count() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

} // namespace steerdns::dns
