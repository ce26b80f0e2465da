#include "steerdns/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace steerdns::analysis {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

int64_t parse_int(std::string_view field, std::size_t line, const char* what) {
    int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw TraceParseError(line, std::string("bad ") + what + " '" + std::string(field) + "'");
    }
    return value;
}

double parse_double(std::string_view field, std::size_t line, const char* what) {
    // std::from_chars for doubles is incomplete on some toolchains; strtod
    // via a bounded copy keeps parsing locale-independent enough here.
    std::string buf(field);
    char* end = nullptr;
    const double value = std::strtod(buf.c_str(), &end);
    if (buf.empty() || end != buf.c_str() + buf.size()) {
        throw TraceParseError(line, std::string("bad ") + what + " '" + buf + "'");
    }
    return value;
}

bool skippable(std::string_view line) {
    return line.empty() || line.front() == '#';
}

} // namespace

std::vector<RawTest> parse_trace(std::istream& in) {
    std::vector<RawTest> out;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = trim(raw);
        if (skippable(line)) {
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != 5) {
            throw TraceParseError(line_no, "expected 5 comma-separated fields");
        }
        RawTest t;
        t.probe_id = parse_int(trim(fields[0]), line_no, "probe_id");
        t.anchor_id = parse_int(trim(fields[1]), line_no, "anchor_id");
        t.timestamp = parse_double(trim(fields[2]), line_no, "timestamp");
        const std::string_view family = trim(fields[3]);
        if (family == "4") {
            t.family = AddressFamily::V4;
        } else if (family == "6") {
            t.family = AddressFamily::V6;
        } else {
            throw TraceParseError(line_no, "family must be 4 or 6");
        }
        t.rct_ms = parse_double(trim(fields[4]), line_no, "rct_ms");
        if (!(t.rct_ms > 0.0)) {
            throw TraceParseError(line_no, "rct_ms must be positive");
        }
        out.push_back(t);
    }
    return out;
}

std::vector<RawTest> parse_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open input file: " + path);
    }
    return parse_trace(in);
}

std::vector<ConnectionObservation> parse_connections(std::istream& in) {
    std::vector<ConnectionObservation> out;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = trim(raw);
        if (skippable(line)) {
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != 3) {
            throw TraceParseError(line_no, "expected 3 comma-separated fields");
        }
        ConnectionObservation c;
        c.destination = std::string(trim(fields[0]));
        if (c.destination.empty()) {
            throw TraceParseError(line_no, "empty destination");
        }
        const std::string_view mode = trim(fields[1]);
        if (mode == "v4_only") {
            c.mode = FamilyMode::V4Only;
        } else if (mode == "v6_only") {
            c.mode = FamilyMode::V6Only;
        } else if (mode == "adaptive") {
            c.mode = FamilyMode::Adaptive;
        } else {
            throw TraceParseError(line_no, "mode must be v4_only, v6_only or adaptive");
        }
        c.handshake_ms = parse_double(trim(fields[2]), line_no, "handshake_ms");
        if (!(c.handshake_ms > 0.0)) {
            throw TraceParseError(line_no, "handshake_ms must be positive");
        }
        out.push_back(c);
    }
    return out;
}

std::vector<ConnectionObservation> parse_connections_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open input file: " + path);
    }
    return parse_connections(in);
}

} // namespace steerdns::analysis
