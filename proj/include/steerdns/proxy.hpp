#pragma once

#include "steerdns/dns/cache.hpp"
#include "steerdns/dns/wire.hpp"
#include "steerdns/steering.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace steerdns::proxy {

struct ProxyConfig {
    double gamma = 0.1;
    /// Master switch: off turns the proxy into a caching forwarder.
    bool steering = true;
    /// Answer A questions on cache hits with zero records so clients
    /// follow the steered AAAA answer. Breaks IPv4-only clients.
    bool empty_a = true;
    /// Negative-cache lifetime when the upstream answer carries no SOA.
    uint32_t negative_ttl_fallback_s = 30;
    uint64_t choice_seed = 0x7374656572646e73ULL;
};

/// Emitted once per steered answer.
struct SteerLogEntry {
    std::string name;
    std::string group;
    AddressFamily chosen = AddressFamily::V6;
    double p_v4 = 0.0;
    double p_v6 = 0.0;
};

struct ProxyCounters {
    uint64_t queries = 0;
    uint64_t cache_hits = 0;
    uint64_t relayed = 0;
    uint64_t steered = 0;
    uint64_t formerr = 0;
    uint64_t servfail = 0;
    uint64_t dropped = 0;
};

/// Steering DNS forwarder, transport-agnostic: handle_datagram maps one
/// request datagram to at most one response datagram. The upstream
/// exchange is injected, so tests can script it; nullopt from the
/// exchange means timeout.
class SteeringProxy {
public:
    using UpstreamExchange =
        std::function<std::optional<std::vector<uint8_t>>(std::span<const uint8_t>)>;
    using LogSink = std::function<void(const SteerLogEntry&)>;

    SteeringProxy(ProxyConfig cfg, SuffixList suffixes, UpstreamExchange upstream);

    /// nullopt means drop (unusable datagram or unparseable header).
    std::optional<std::vector<uint8_t>> handle_datagram(std::span<const uint8_t> query,
                                                        dns::CacheTime now);

    void set_log_sink(LogSink sink) { log_sink_ = std::move(sink); }

    dns::DnsCache& cache() { return cache_; }
    SteeringRegistry& registry() { return registry_; }
    const SuffixList& suffixes() const { return suffixes_; }
    const ProxyConfig& config() const { return cfg_; }

    ProxyCounters counters() const;

private:
    std::vector<uint8_t> relay(std::span<const uint8_t> query, const dns::Message& parsed_query,
                               bool cacheable, dns::CacheTime now);
    void cache_from_response(const std::string& name_key, uint16_t qtype,
                             std::span<const uint8_t> response, dns::CacheTime now);
    std::vector<uint8_t> answer_from_cache(const dns::Message& query,
                                           const dns::CacheSnapshot& snap, bool serve_v6,
                                           bool mapped);
    std::vector<uint8_t> empty_answer(const dns::Message& query);
    std::vector<uint8_t> error_response(uint16_t id, uint8_t rcode, const dns::Message* query);

    ProxyConfig cfg_;
    SuffixList suffixes_;
    UpstreamExchange upstream_;
    LogSink log_sink_;
    dns::DnsCache cache_;
    SteeringRegistry registry_;

    mutable std::mutex counter_mutex_;
    ProxyCounters counters_;
};

} // namespace steerdns::proxy
