#include "steerdns/dns/cache.hpp"
#include "steerdns/steering.hpp"

#include <doctest.h>

#include <sstream>
#include <stdexcept>

using namespace steerdns;
using namespace steerdns::dns;

namespace {

const CacheTime kT0 = CacheTime{} + std::chrono::hours(1);

std::array<uint8_t, 4> a_addr(uint8_t last) {
    return {192, 0, 2, last};
}

std::array<uint8_t, 16> aaaa_addr(uint8_t last) {
    std::array<uint8_t, 16> out{};
    out[0] = 0x20;
    out[1] = 0x01;
    out[2] = 0x0d;
    out[3] = 0xb8;
    out[15] = last;
    return out;
}

} // namespace

TEST_CASE("records expire exactly at their ttl") {
    DnsCache cache;
    const std::pair<std::array<uint8_t, 4>, uint32_t> rec{a_addr(1), 30};
    cache.store_a("example.com", {&rec, 1}, kT0);

    CHECK(cache.lookup("example.com", kT0 + std::chrono::seconds(29)).has_value());
    CHECK(!cache.lookup("example.com", kT0 + std::chrono::seconds(31)).has_value());
    CHECK(!cache.lookup("example.com", kT0 + std::chrono::seconds(30)).has_value());
}

TEST_CASE("mixed ttls expire independently") {
    DnsCache cache;
    const std::vector<std::pair<std::array<uint8_t, 4>, uint32_t>> recs{{a_addr(1), 10},
                                                                        {a_addr(2), 100}};
    cache.store_a("example.com", recs, kT0);
    const auto snap = cache.lookup("example.com", kT0 + std::chrono::seconds(50));
    REQUIRE(snap.has_value());
    REQUIRE(snap->a.size() == 1);
    CHECK(snap->a[0].first == a_addr(2));
    CHECK(snap->a[0].second == 50);
}

TEST_CASE("lookup is case-insensitive and ttl has a one second floor") {
    DnsCache cache;
    const std::pair<std::array<uint8_t, 16>, uint32_t> rec{aaaa_addr(9), 10};
    cache.store_aaaa("Example.COM", {&rec, 1}, kT0);
    const auto snap = cache.lookup("EXAMPLE.com", kT0 + std::chrono::milliseconds(9500));
    REQUIRE(snap.has_value());
    REQUIRE(snap->aaaa.size() == 1);
    CHECK(snap->aaaa[0].second == 1);
}

TEST_CASE("negative markers serve until expiry and clear positives") {
    DnsCache cache;
    const std::pair<std::array<uint8_t, 4>, uint32_t> rec{a_addr(1), 600};
    cache.store_a("example.com", {&rec, 1}, kT0);
    cache.store_negative_a("example.com", 30, kT0 + std::chrono::seconds(5));

    const auto snap = cache.lookup("example.com", kT0 + std::chrono::seconds(10));
    REQUIRE(snap.has_value());
    CHECK(snap->a.empty());
    CHECK(snap->a_negative);
    CHECK(!cache.lookup("example.com", kT0 + std::chrono::seconds(40)).has_value());
}

TEST_CASE("purge removes expired state entirely") {
    DnsCache cache;
    const std::pair<std::array<uint8_t, 4>, uint32_t> rec{a_addr(1), 10};
    cache.store_a("a.example", {&rec, 1}, kT0);
    cache.store_negative_aaaa("b.example", 10, kT0);
    CHECK(cache.entry_count() == 2);
    cache.purge_expired(kT0 + std::chrono::seconds(11));
    CHECK(cache.entry_count() == 0);
}

TEST_CASE("families are stored independently") {
    DnsCache cache;
    const std::pair<std::array<uint8_t, 4>, uint32_t> a_rec{a_addr(1), 60};
    const std::pair<std::array<uint8_t, 16>, uint32_t> aaaa_rec{aaaa_addr(1), 60};
    cache.store_a("dual.example", {&a_rec, 1}, kT0);
    cache.store_aaaa("dual.example", {&aaaa_rec, 1}, kT0);
    const auto snap = cache.lookup("dual.example", kT0 + std::chrono::seconds(1));
    REQUIRE(snap.has_value());
    CHECK(snap->a.size() == 1);
    CHECK(snap->aaaa.size() == 1);
}

TEST_CASE("ipv4-mapped encoding per the ::ffff:/96 prefix") {
    const auto mapped = map_v4_to_v6({{192, 0, 2, 1}});
    for (int i = 0; i < 10; ++i) {
        CHECK(mapped.bytes[i] == 0);
    }
    CHECK(mapped.bytes[10] == 0xFF);
    CHECK(mapped.bytes[11] == 0xFF);
    CHECK(mapped.bytes[12] == 192);
    CHECK(mapped.bytes[13] == 0);
    CHECK(mapped.bytes[14] == 2);
    CHECK(mapped.bytes[15] == 1);
    CHECK(to_string(mapped) == "::ffff:192.0.2.1");

    CHECK(to_string(map_v4_to_v6({{0, 0, 0, 0}})) == "::ffff:0.0.0.0");
    CHECK(to_string(map_v4_to_v6({{255, 255, 255, 255}})) == "::ffff:255.255.255.255");
}

TEST_CASE("ipv4 parsing") {
    CHECK(parse_ipv4("192.0.2.1") == IPv4Address{{192, 0, 2, 1}});
    CHECK(parse_ipv4("0.0.0.0") == IPv4Address{{0, 0, 0, 0}});
    CHECK(!parse_ipv4("256.0.0.1").has_value());
    CHECK(!parse_ipv4("1.2.3").has_value());
    CHECK(!parse_ipv4("1.2.3.4.5").has_value());
    CHECK(!parse_ipv4("a.b.c.d").has_value());
}

TEST_CASE("group key takes the last two labels") {
    CHECK(group_key("cdn.static.example.com") == "example.com");
    CHECK(group_key("example.com") == "example.com");
    CHECK(group_key("EXAMPLE.Com.") == "example.com");
    CHECK(group_key("localhost") == "localhost");
    CHECK_THROWS_AS(group_key(""), std::invalid_argument);
    CHECK_THROWS_AS(group_key("."), std::invalid_argument);
    CHECK_THROWS_AS(group_key("a..b"), std::invalid_argument);
}

TEST_CASE("suffix list extends the key to three labels") {
    std::istringstream file("# registry suffixes\nco.uk\n ac.uk \n");
    const SuffixList suffixes = SuffixList::from_stream(file);
    CHECK(suffixes.size() == 2);
    CHECK(group_key("shop.example.co.uk", suffixes) == "example.co.uk");
    CHECK(group_key("example.co.uk", suffixes) == "example.co.uk");
    // The suffix itself has no third label to take.
    CHECK(group_key("co.uk", suffixes) == "co.uk");
    CHECK(group_key("www.example.com", suffixes) == "example.com");
}

TEST_CASE("group key is deterministic and case-insensitive") {
    CHECK(group_key("A.B.Example.ORG") == group_key("a.b.example.org"));
    CHECK(group_key("x.example.org") == group_key("y.example.org"));
}

TEST_CASE("registry shares one state per group") {
    SteeringRegistry registry(0.1, 42);
    const auto a = registry.get_or_create("example.com");
    const auto b = registry.get_or_create("example.com");
    CHECK(a.get() == b.get());
    CHECK(registry.size() == 1);
    const auto c = registry.get_or_create("other.org");
    CHECK(c.get() != a.get());
    CHECK(registry.size() == 2);
    CHECK(registry.find("example.com").get() == a.get());
    CHECK(registry.find("missing.net") == nullptr);
}

TEST_CASE("group choices are deterministic per seed") {
    auto run = [](uint64_t seed) {
        SteeringRegistry registry(0.1, seed);
        const auto state = registry.get_or_create("example.com");
        std::vector<AddressFamily> out;
        for (int i = 0; i < 32; ++i) {
            out.push_back(state->choose_locked().family);
        }
        return out;
    };
    CHECK(run(7) == run(7));
}

TEST_CASE("choose_locked records the pending choice") {
    SteeringRegistry registry(0.1, 1);
    const auto state = registry.get_or_create("example.com");
    const auto choice = state->choose_locked();
    CHECK(state->pending_choice == choice.family);
    CHECK(choice.probabilities[0] == doctest::Approx(0.5));
}
