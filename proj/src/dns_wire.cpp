#include "steerdns/dns/wire.hpp"

#include <cctype>
#include <stdexcept>

namespace steerdns::dns {

namespace {

constexpr std::size_t kHeaderSize = 12;
constexpr std::size_t kMaxNameWire = 255;
constexpr int kMaxPointerJumps = 32;

class Reader {
public:
    explicit Reader(std::span<const uint8_t> wire) : wire_(wire) {}

    bool read_u8(uint8_t& v) {
        if (pos_ + 1 > wire_.size()) return false;
        v = wire_[pos_++];
        return true;
    }

    bool read_u16(uint16_t& v) {
        if (pos_ + 2 > wire_.size()) return false;
        v = static_cast<uint16_t>(wire_[pos_] << 8 | wire_[pos_ + 1]);
        pos_ += 2;
        return true;
    }

    bool read_u32(uint32_t& v) {
        if (pos_ + 4 > wire_.size()) return false;
        v = static_cast<uint32_t>(wire_[pos_]) << 24 | static_cast<uint32_t>(wire_[pos_ + 1]) << 16 |
            static_cast<uint32_t>(wire_[pos_ + 2]) << 8 | static_cast<uint32_t>(wire_[pos_ + 3]);
        pos_ += 4;
        return true;
    }

    bool read_bytes(std::size_t n, std::vector<uint8_t>& out) {
        if (pos_ + n > wire_.size()) return false;
        out.assign(wire_.begin() + static_cast<std::ptrdiff_t>(pos_),
                   wire_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
        pos_ += n;
        return true;
    }

    /// Decompressing name read. Pointers must target an offset strictly
    /// before the pointer itself, which rules out loops.
    bool read_name(std::string& out) {
        out.clear();
        std::size_t pos = pos_;
        std::optional<std::size_t> resume;
        std::size_t wire_len = 0;
        int jumps = 0;
        while (true) {
            if (pos >= wire_.size()) return false;
            const uint8_t len = wire_[pos];
            if ((len & 0xC0) == 0xC0) {
                if (pos + 2 > wire_.size()) return false;
                const std::size_t target =
                    static_cast<std::size_t>(len & 0x3F) << 8 | wire_[pos + 1];
                if (target >= pos || ++jumps > kMaxPointerJumps) return false;
                if (!resume) resume = pos + 2;
                pos = target;
                continue;
            }
            if ((len & 0xC0) != 0) return false;
            if (len == 0) {
                pos_ = resume.value_or(pos + 1);
                return true;
            }
            if (pos + 1 + len > wire_.size()) return false;
            wire_len += len + 1;
            if (wire_len > kMaxNameWire) return false;
            if (!out.empty()) out.push_back('.');
            out.append(reinterpret_cast<const char*>(wire_.data() + pos + 1), len);
            pos += 1 + len;
        }
    }

    std::size_t pos() const { return pos_; }
    bool at_end() const { return pos_ == wire_.size(); }
    void seek(std::size_t pos) { pos_ = pos; }

private:
    std::span<const uint8_t> wire_;
    std::size_t pos_ = 0;
};

void append_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v & 0xFF));
}

void append_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16 & 0xFF));
    out.push_back(static_cast<uint8_t>(v >> 8 & 0xFF));
    out.push_back(static_cast<uint8_t>(v & 0xFF));
}

bool rdata_is_single_name(uint16_t rtype) {
    return rtype == kTypeCNAME || rtype == kTypeNS || rtype == kTypePTR;
}

/// Re-encodes compressed rdata contents so records stay meaningful
/// outside the original message.
bool normalize_rdata(Reader& reader, uint16_t rtype, std::size_t rdlength,
                     std::vector<uint8_t>& out) {
    const std::size_t rdata_end = reader.pos() + rdlength;
    if (rdata_is_single_name(rtype)) {
        std::string target;
        if (!reader.read_name(target) || reader.pos() > rdata_end) return false;
        reader.seek(rdata_end);
        out.clear();
        append_name(out, target);
        return true;
    }
    if (rtype == kTypeSOA) {
        std::string mname;
        std::string rname;
        if (!reader.read_name(mname) || !reader.read_name(rname)) return false;
        if (reader.pos() + 20 > rdata_end) return false;
        out.clear();
        append_name(out, mname);
        append_name(out, rname);
        std::vector<uint8_t> tail;
        if (!reader.read_bytes(20, tail)) return false;
        out.insert(out.end(), tail.begin(), tail.end());
        if (reader.pos() != rdata_end) return false;
        return true;
    }
    return reader.read_bytes(rdlength, out);
}

bool parse_record(Reader& reader, Record& r) {
    uint16_t rdlength = 0;
    if (!reader.read_name(r.name) || !reader.read_u16(r.rtype) || !reader.read_u16(r.rclass) ||
        !reader.read_u32(r.ttl) || !reader.read_u16(rdlength)) {
        return false;
    }
    return normalize_rdata(reader, r.rtype, rdlength, r.rdata);
}

Header unpack_header(uint16_t id, uint16_t flags, uint16_t qd, uint16_t an, uint16_t ns,
                     uint16_t ar) {
    Header h;
    h.id = id;
    h.qr = (flags & 0x8000) != 0;
    h.opcode = static_cast<uint8_t>(flags >> 11 & 0x0F);
    h.aa = (flags & 0x0400) != 0;
    h.tc = (flags & 0x0200) != 0;
    h.rd = (flags & 0x0100) != 0;
    h.ra = (flags & 0x0080) != 0;
    h.rcode = static_cast<uint8_t>(flags & 0x0F);
    h.qdcount = qd;
    h.ancount = an;
    h.nscount = ns;
    h.arcount = ar;
    return h;
}

uint16_t pack_flags(const Header& h) {
    uint16_t flags = 0;
    if (h.qr) flags |= 0x8000;
    flags |= static_cast<uint16_t>((h.opcode & 0x0F) << 11);
    if (h.aa) flags |= 0x0400;
    if (h.tc) flags |= 0x0200;
    if (h.rd) flags |= 0x0100;
    if (h.ra) flags |= 0x0080;
    flags |= h.rcode & 0x0F;
    return flags;
}

} // namespace

std::optional<Header> parse_header(std::span<const uint8_t> wire) {
    if (wire.size() < kHeaderSize) {
        return std::nullopt;
    }
    Reader reader(wire);
    uint16_t id = 0;
    uint16_t flags = 0;
    uint16_t qd = 0;
    uint16_t an = 0;
    uint16_t ns = 0;
    uint16_t ar = 0;
    reader.read_u16(id);
    reader.read_u16(flags);
    reader.read_u16(qd);
    reader.read_u16(an);
    reader.read_u16(ns);
    reader.read_u16(ar);
    return unpack_header(id, flags, qd, an, ns, ar);
}

std::optional<Message> parse_message(std::span<const uint8_t> wire) {
    const auto header = parse_header(wire);
    if (!header) {
        return std::nullopt;
    }
    Message msg;
    msg.header = *header;
    Reader reader(wire);
    reader.seek(kHeaderSize);

    for (uint16_t i = 0; i < msg.header.qdcount; ++i) {
        Question q;
        if (!reader.read_name(q.name) || !reader.read_u16(q.qtype) || !reader.read_u16(q.qclass)) {
            return std::nullopt;
        }
        msg.questions.push_back(std::move(q));
    }
    auto parse_section = [&](uint16_t count, std::vector<Record>& section) {
        for (uint16_t i = 0; i < count; ++i) {
            Record r;
            if (!parse_record(reader, r)) {
                return false;
            }
            section.push_back(std::move(r));
        }
        return true;
    };
    if (!parse_section(msg.header.ancount, msg.answers) ||
        !parse_section(msg.header.nscount, msg.authority) ||
        !parse_section(msg.header.arcount, msg.additional)) {
        return std::nullopt;
    }
    return msg;
}

void append_name(std::vector<uint8_t>& out, std::string_view name) {
    if (!name.empty() && name.back() == '.') {
        name.remove_suffix(1);
    }
    std::size_t total = 1;
    while (!name.empty()) {
        const std::size_t dot = name.find('.');
        const std::string_view label = dot == std::string_view::npos ? name : name.substr(0, dot);
        if (label.empty() || label.size() > 63) {
            throw std::invalid_argument("dns: bad label length");
        }
        total += label.size() + 1;
        if (total > kMaxNameWire) {
            throw std::invalid_argument("dns: name too long");
        }
        out.push_back(static_cast<uint8_t>(label.size()));
        out.insert(out.end(), label.begin(), label.end());
        name = dot == std::string_view::npos ? std::string_view{} : name.substr(dot + 1);
    }
    out.push_back(0);
}

std::vector<uint8_t> serialize(const Message& msg) {
    std::vector<uint8_t> out;
    out.reserve(kHeaderSize + 64);
    append_u16(out, msg.header.id);
    append_u16(out, pack_flags(msg.header));
    append_u16(out, static_cast<uint16_t>(msg.questions.size()));
    append_u16(out, static_cast<uint16_t>(msg.answers.size()));
    append_u16(out, static_cast<uint16_t>(msg.authority.size()));
    append_u16(out, static_cast<uint16_t>(msg.additional.size()));
    for (const auto& q : msg.questions) {
        append_name(out, q.name);
        append_u16(out, q.qtype);
        append_u16(out, q.qclass);
    }
    auto append_section = [&](const std::vector<Record>& section) {
        for (const auto& r : section) {
            append_name(out, r.name);
            append_u16(out, r.rtype);
            append_u16(out, r.rclass);
            append_u32(out, r.ttl);
            append_u16(out, static_cast<uint16_t>(r.rdata.size()));
            out.insert(out.end(), r.rdata.begin(), r.rdata.end());
        }
    };
    append_section(msg.answers);
    append_section(msg.authority);
    append_section(msg.additional);
    return out;
}

std::optional<std::string> decode_name_rdata(std::span<const uint8_t> rdata) {
    Reader reader(rdata);
    std::string name;
    if (!reader.read_name(name)) {
        return std::nullopt;
    }
    return name;
}

std::optional<uint32_t> soa_minimum(const Record& soa) {
    if (soa.rtype != kTypeSOA || soa.rdata.size() < 4) {
        return std::nullopt;
    }
    const std::size_t n = soa.rdata.size();
    return static_cast<uint32_t>(soa.rdata[n - 4]) << 24 |
           static_cast<uint32_t>(soa.rdata[n - 3]) << 16 |
           static_cast<uint32_t>(soa.rdata[n - 2]) << 8 | static_cast<uint32_t>(soa.rdata[n - 1]);
}

std::string to_lower_name(std::string_view name) {
    std::string out(name);
    for (char& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

} // namespace steerdns::dns
