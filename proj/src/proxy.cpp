#include "steerdns/proxy.hpp"

#include <algorithm>

namespace steerdns::proxy {

using namespace steerdns::dns;

SteeringProxy::SteeringProxy(ProxyConfig cfg, SuffixList suffixes, UpstreamExchange upstream)
    : cfg_(cfg), suffixes_(std::move(suffixes)), upstream_(std::move(upstream)),
      registry_(cfg.gamma, cfg.choice_seed) {}

ProxyCounters SteeringProxy::counters() const {
    std::scoped_lock lock(counter_mutex_);
    return counters_;
}

std::optional<std::vector<uint8_t>> SteeringProxy::handle_datagram(std::span<const uint8_t> query,
                                                                   CacheTime now) {
    auto count = [&](uint64_t ProxyCounters::* field) {
        std::scoped_lock lock(counter_mutex_);
        counters_.*field += 1;
    };
    count(&ProxyCounters::queries);

    const auto header = parse_header(query);
    if (!header || header->qr) {
        count(&ProxyCounters::dropped);
        return std::nullopt;
    }

    const auto parsed = parse_message(query);
    if (header->opcode != 0) {
        // Non-QUERY opcodes pass through untouched.
        if (!parsed) {
            count(&ProxyCounters::formerr);
            return error_response(header->id, kRcodeFormErr, nullptr);
        }
        count(&ProxyCounters::relayed);
        return relay(query, *parsed, false, now);
    }
    if (!parsed || parsed->questions.size() != 1) {
        count(&ProxyCounters::formerr);
        return error_response(header->id, kRcodeFormErr, nullptr);
    }
    const Question& q = parsed->questions.front();
    const bool addr_query = q.qclass == kClassIN && (q.qtype == kTypeA || q.qtype == kTypeAAAA);
    if (!addr_query) {
        count(&ProxyCounters::relayed);
        return relay(query, *parsed, false, now);
    }

    const std::string name_key = to_lower_name(q.name);
    const auto snapshot = cache_.lookup(name_key, now);

    if (!cfg_.steering) {
        if (snapshot) {
            if (q.qtype == kTypeA && !snapshot->a.empty()) {
                count(&ProxyCounters::cache_hits);
                return answer_from_cache(*parsed, *snapshot, false, false);
            }
            if (q.qtype == kTypeAAAA && !snapshot->aaaa.empty()) {
                count(&ProxyCounters::cache_hits);
                return answer_from_cache(*parsed, *snapshot, true, false);
            }
            if ((q.qtype == kTypeA && snapshot->a_negative) ||
                (q.qtype == kTypeAAAA && snapshot->aaaa_negative)) {
                count(&ProxyCounters::cache_hits);
                return empty_answer(*parsed);
            }
        }
        count(&ProxyCounters::relayed);
        return relay(query, *parsed, true, now);
    }

    if (snapshot) {
        if (q.qtype == kTypeA) {
            // A hit requires knowledge about the A set itself; otherwise
            // the records behind later IPv4 steering would never be
            // fetched.
            const bool a_known = !snapshot->a.empty() || snapshot->a_negative;
            if (a_known) {
                count(&ProxyCounters::cache_hits);
                if (cfg_.empty_a || snapshot->a.empty()) {
                    return empty_answer(*parsed);
                }
                return answer_from_cache(*parsed, *snapshot, false, false);
            }
        } else {
            const bool has_v4 = !snapshot->a.empty();
            const bool has_v6 = !snapshot->aaaa.empty();
            if (has_v4 && has_v6) {
                std::string group;
                try {
                    group = group_key(name_key, suffixes_);
                } catch (const std::invalid_argument&) {
                    count(&ProxyCounters::cache_hits);
                    return answer_from_cache(*parsed, *snapshot, true, false);
                }
                const auto state = registry_.get_or_create(group);
                const auto choice = state->choose_locked();
                count(&ProxyCounters::cache_hits);
                count(&ProxyCounters::steered);
                if (log_sink_) {
                    log_sink_({name_key, group, choice.family, choice.probabilities[0],
                               choice.probabilities[1]});
                }
                const bool serve_v6 = choice.family == AddressFamily::V6;
                return answer_from_cache(*parsed, *snapshot, serve_v6, !serve_v6);
            }
            if (has_v6) {
                count(&ProxyCounters::cache_hits);
                return answer_from_cache(*parsed, *snapshot, true, false);
            }
            if (has_v4) {
                count(&ProxyCounters::cache_hits);
                return answer_from_cache(*parsed, *snapshot, false, true);
            }
            if (snapshot->aaaa_negative) {
                count(&ProxyCounters::cache_hits);
                return empty_answer(*parsed);
            }
        }
    }
    count(&ProxyCounters::relayed);
    return relay(query, *parsed, true, now);
}

std::vector<uint8_t> SteeringProxy::relay(std::span<const uint8_t> query,
                                          const Message& parsed_query, bool cacheable,
                                          CacheTime now) {
    const auto response = upstream_(query);
    if (!response) {
        {
            std::scoped_lock lock(counter_mutex_);
            counters_.servfail += 1;
        }
        return error_response(parsed_query.header.id, kRcodeServFail, &parsed_query);
    }
    if (cacheable && !parsed_query.questions.empty()) {
        const Question& q = parsed_query.questions.front();
        cache_from_response(to_lower_name(q.name), q.qtype, *response, now);
    }
    return *response;
}

void SteeringProxy::cache_from_response(const std::string& name_key, uint16_t qtype,
                                        std::span<const uint8_t> response, CacheTime now) {
    const auto parsed = parse_message(response);
    if (!parsed || parsed->header.rcode != kRcodeNoError) {
        return;
    }
    // Answer-section records reachable from the queried name over its
    // CNAME chain, flattened under the queried name.
    std::vector<std::string> chain{name_key};
    auto in_chain = [&](const std::string& lower) {
        return std::find(chain.begin(), chain.end(), lower) != chain.end();
    };
    std::vector<std::pair<std::array<uint8_t, 4>, uint32_t>> a_records;
    std::vector<std::pair<std::array<uint8_t, 16>, uint32_t>> aaaa_records;
    for (const Record& r : parsed->answers) {
        if (r.rclass != kClassIN || !in_chain(to_lower_name(r.name))) {
            continue;
        }
        if (r.rtype == kTypeCNAME) {
            if (const auto target = decode_name_rdata(r.rdata)) {
                const std::string lower = to_lower_name(*target);
                if (!in_chain(lower)) {
                    chain.push_back(lower);
                }
            }
        } else if (r.rtype == kTypeA && r.rdata.size() == 4) {
            std::array<uint8_t, 4> addr;
            std::copy_n(r.rdata.begin(), 4, addr.begin());
            a_records.emplace_back(addr, r.ttl);
        } else if (r.rtype == kTypeAAAA && r.rdata.size() == 16) {
            std::array<uint8_t, 16> addr;
            std::copy_n(r.rdata.begin(), 16, addr.begin());
            aaaa_records.emplace_back(addr, r.ttl);
        }
    }
    if (!a_records.empty()) {
        cache_.store_a(name_key, a_records, now);
    }
    if (!aaaa_records.empty()) {
        cache_.store_aaaa(name_key, aaaa_records, now);
    }
    const bool queried_family_empty =
        (qtype == kTypeA && a_records.empty()) || (qtype == kTypeAAAA && aaaa_records.empty());
    if (queried_family_empty) {
        uint32_t ttl = cfg_.negative_ttl_fallback_s;
        for (const Record& r : parsed->authority) {
            if (r.rtype == kTypeSOA) {
                if (const auto minimum = soa_minimum(r)) {
                    ttl = *minimum;
                }
                break;
            }
        }
        if (qtype == kTypeA) {
            cache_.store_negative_a(name_key, ttl, now);
        } else {
            cache_.store_negative_aaaa(name_key, ttl, now);
        }
    }
}

std::vector<uint8_t> SteeringProxy::answer_from_cache(const Message& query,
                                                      const CacheSnapshot& snap, bool serve_v6,
                                                      bool mapped) {
    const Question& q = query.questions.front();
    Message resp;
    resp.header.id = query.header.id;
    resp.header.qr = true;
    resp.header.opcode = query.header.opcode;
    resp.header.rd = query.header.rd;
    resp.header.ra = true;
    resp.header.rcode = kRcodeNoError;
    resp.questions.push_back(q);

    auto push_record = [&](uint16_t rtype, std::span<const uint8_t> addr, uint32_t ttl) {
        Record r;
        r.name = q.name;
        r.rtype = rtype;
        r.rclass = kClassIN;
        r.ttl = ttl;
        r.rdata.assign(addr.begin(), addr.end());
        resp.answers.push_back(std::move(r));
    };

    if (mapped) {
        // IPv4 steering of an AAAA question: every address crosses
        // through the ::ffff:/96 mapping, never as a raw A record.
        for (const auto& [addr, ttl] : snap.a) {
            const IPv6Address mapped_addr = map_v4_to_v6(IPv4Address{addr});
            push_record(kTypeAAAA, mapped_addr.bytes, ttl);
        }
    } else if (serve_v6) {
        for (const auto& [addr, ttl] : snap.aaaa) {
            push_record(kTypeAAAA, addr, ttl);
        }
    } else {
        for (const auto& [addr, ttl] : snap.a) {
            push_record(kTypeA, addr, ttl);
        }
    }
    return serialize(resp);
}

std::vector<uint8_t> SteeringProxy::empty_answer(const Message& query) {
    Message resp;
    resp.header.id = query.header.id;
    resp.header.qr = true;
    resp.header.opcode = query.header.opcode;
    resp.header.rd = query.header.rd;
    resp.header.ra = true;
    resp.header.rcode = kRcodeNoError;
    resp.questions.push_back(query.questions.front());
    return serialize(resp);
}

std::vector<uint8_t> SteeringProxy::error_response(uint16_t id, uint8_t rcode,
                                                   const Message* query) {
    Message resp;
    resp.header.id = id;
    resp.header.qr = true;
    resp.header.ra = true;
    resp.header.rcode = rcode;
    if (query && !query->questions.empty()) {
        resp.header.opcode = query->header.opcode;
        resp.header.rd = query->header.rd;
        resp.questions.push_back(query->questions.front());
    }
    return serialize(resp);
}

} // namespace steerdns::proxy
