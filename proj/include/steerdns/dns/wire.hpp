#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace steerdns::dns {

inline constexpr uint16_t kTypeA = 1;
inline constexpr uint16_t kTypeNS = 2;
inline constexpr uint16_t kTypeCNAME = 5;
inline constexpr uint16_t kTypeSOA = 6;
inline constexpr uint16_t kTypePTR = 12;
inline constexpr uint16_t kTypeAAAA = 28;
inline constexpr uint16_t kClassIN = 1;

inline constexpr uint8_t kRcodeNoError = 0;
inline constexpr uint8_t kRcodeFormErr = 1;
inline constexpr uint8_t kRcodeServFail = 2;
inline constexpr uint8_t kRcodeNxDomain = 3;

struct Header {
    uint16_t id = 0;
    bool qr = false;
    uint8_t opcode = 0;
    bool aa = false;
    bool tc = false;
    bool rd = false;
    bool ra = false;
    uint8_t rcode = kRcodeNoError;
    uint16_t qdcount = 0;
    uint16_t ancount = 0;
    uint16_t nscount = 0;
    uint16_t arcount = 0;
};

/// Names are held in presentation form (labels joined with '.', no
/// trailing dot, original case preserved).
struct Question {
    std::string name;
    uint16_t qtype = 0;
    uint16_t qclass = kClassIN;
};

struct Record {
    std::string name;
    uint16_t rtype = 0;
    uint16_t rclass = kClassIN;
    uint32_t ttl = 0;
    /// For name-bearing types (CNAME, NS, PTR, SOA) the parser rewrites
    /// compressed names inside rdata to their uncompressed encoding, so
    /// rdata is self-contained.
    std::vector<uint8_t> rdata;
};

struct Message {
    Header header;
    std::vector<Question> questions;
    std::vector<Record> answers;
    std::vector<Record> authority;
    std::vector<Record> additional;
};

/// Strict parser for RFC 1035/3596 wire messages. Compression pointers
/// must point strictly backwards. Returns nullopt on any malformation.
std::optional<Message> parse_message(std::span<const uint8_t> wire);

/// Parses only the 12-byte fixed header.
std::optional<Header> parse_header(std::span<const uint8_t> wire);

/// Serializes with uncompressed names; section counts come from the
/// section vectors. Throws std::invalid_argument on unencodable names.
std::vector<uint8_t> serialize(const Message& msg);

/// Wire encoding of one name (length-prefixed labels, zero terminator).
/// Throws std::invalid_argument on empty/oversized labels or names.
void append_name(std::vector<uint8_t>& out, std::string_view name);

/// Decodes an uncompressed name from a self-contained buffer (as found in
/// normalized rdata).
std::optional<std::string> decode_name_rdata(std::span<const uint8_t> rdata);

/// SOA minimum field of a normalized SOA rdata (its trailing 32 bits).
std::optional<uint32_t> soa_minimum(const Record& soa);

/// ASCII lowercase, used for cache keys and name comparisons.
std::string to_lower_name(std::string_view name);

} // namespace steerdns::dns
