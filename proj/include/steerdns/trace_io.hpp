#pragma once

#include "steerdns/analysis.hpp"

#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace steerdns::analysis {

/// Parse failure for trace and connection files; carries the 1-based line.
class TraceParseError : public std::runtime_error {
public:
    TraceParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Reads `probe_id,anchor_id,timestamp,family,rct_ms` lines, one RawTest
/// each. family is the literal 4 or 6. Blank lines and lines starting
/// with '#' are skipped.
std::vector<RawTest> parse_trace(std::istream& in);
std::vector<RawTest> parse_trace_file(const std::string& path);

/// Reads `destination,mode,handshake_ms` lines for the experiment report;
/// mode is one of v4_only, v6_only, adaptive.
std::vector<ConnectionObservation> parse_connections(std::istream& in);
std::vector<ConnectionObservation> parse_connections_file(const std::string& path);

} // namespace steerdns::analysis
