#include "steerdns/steering.hpp"

#include "steerdns/dns/wire.hpp"

#include <arpa/inet.h>

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace steerdns {

IPv6Address map_v4_to_v6(const IPv4Address& addr) {
    IPv6Address out;
    out.bytes[10] = 0xFF;
    out.bytes[11] = 0xFF;
    std::copy(addr.bytes.begin(), addr.bytes.end(), out.bytes.begin() + 12);
    return out;
}

std::optional<IPv4Address> parse_ipv4(std::string_view text) {
    IPv4Address out;
    std::size_t start = 0;
    for (int i = 0; i < 4; ++i) {
        const std::size_t dot = text.find('.', start);
        const bool last = i == 3;
        if (last != (dot == std::string_view::npos)) {
            return std::nullopt;
        }
        const std::string_view part =
            last ? text.substr(start) : text.substr(start, dot - start);
        unsigned value = 0;
        const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
        if (ec != std::errc{} || ptr != part.data() + part.size() || value > 255 || part.empty()) {
            return std::nullopt;
        }
        out.bytes[i] = static_cast<uint8_t>(value);
        start = dot + 1;
    }
    return out;
}

std::string to_string(const IPv4Address& addr) {
    char buf[INET_ADDRSTRLEN] = {};
    inet_ntop(AF_INET, addr.bytes.data(), buf, sizeof buf);
    return buf;
}

std::string to_string(const IPv6Address& addr) {
    char buf[INET6_ADDRSTRLEN] = {};
    inet_ntop(AF_INET6, addr.bytes.data(), buf, sizeof buf);
    return buf;
}

SuffixList SuffixList::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open suffix file: " + path);
    }
    return from_stream(in);
}

SuffixList SuffixList::from_stream(std::istream& in) {
    SuffixList list;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
            line.pop_back();
        }
        std::size_t start = line.find_first_not_of(' ');
        if (start == std::string::npos || line[start] == '#') {
            continue;
        }
        list.add(std::string_view(line).substr(start));
    }
    return list;
}

void SuffixList::add(std::string_view suffix) {
    std::string s = dns::to_lower_name(suffix);
    if (!s.empty() && s.back() == '.') {
        s.pop_back();
    }
    if (!s.empty()) {
        suffixes_.insert(std::move(s));
    }
}

bool SuffixList::contains(std::string_view suffix) const {
    return suffixes_.contains(std::string(suffix));
}

std::string group_key(std::string_view name, const SuffixList& suffixes) {
    std::string lower = dns::to_lower_name(name);
    if (!lower.empty() && lower.back() == '.') {
        lower.pop_back();
    }
    if (lower.empty()) {
        throw std::invalid_argument("group_key: empty or root-only name");
    }
    std::vector<std::string_view> labels;
    std::string_view rest = lower;
    while (true) {
        const std::size_t dot = rest.find('.');
        const std::string_view label = dot == std::string_view::npos ? rest : rest.substr(0, dot);
        if (label.empty()) {
            throw std::invalid_argument("group_key: empty label in name");
        }
        labels.push_back(label);
        if (dot == std::string_view::npos) {
            break;
        }
        rest = rest.substr(dot + 1);
    }
    auto tail = [&](std::size_t count) {
        std::string out;
        for (std::size_t i = labels.size() - count; i < labels.size(); ++i) {
            if (!out.empty()) {
                out.push_back('.');
            }
            out.append(labels[i]);
        }
        return out;
    };
    if (labels.size() == 1) {
        return tail(1);
    }
    const std::string two = tail(2);
    if (labels.size() >= 3 && suffixes.contains(two)) {
        return tail(3);
    }
    return two;
}

std::string group_key(std::string_view name) {
    static const SuffixList kEmpty;
    return group_key(name, kEmpty);
}

GroupState::Choice GroupState::choose_locked() {
    std::scoped_lock lock(mutex);
    Choice c{bandit.choose(rng.next_double()), bandit.probabilities()};
    pending_choice = c.family;
    return c;
}

std::shared_ptr<GroupState> SteeringRegistry::get_or_create(const std::string& group) {
    {
        std::shared_lock lock(mutex_);
        if (const auto it = groups_.find(group); it != groups_.end()) {
            return it->second;
        }
    }
    std::unique_lock lock(mutex_);
    auto& slot = groups_[group];
    if (!slot) {
        slot = std::make_shared<GroupState>(gamma_, mix_seed(seed_, fnv1a64(group)));
    }
    return slot;
}

std::shared_ptr<GroupState> SteeringRegistry::find(const std::string& group) const {
    std::shared_lock lock(mutex_);
    const auto it = groups_.find(group);
    return it == groups_.end() ? nullptr : it->second;
}

std::size_t SteeringRegistry::size() const {
    std::shared_lock lock(mutex_);
    return groups_.size();
}

} // namespace steerdns
