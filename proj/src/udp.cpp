#include "steerdns/net/udp.hpp"

#include <netdb.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <system_error>
#include <utility>

namespace steerdns::net {

namespace {

constexpr std::size_t kMaxDatagram = 65535;

struct AddrInfoDeleter {
    void operator()(addrinfo* p) const { freeaddrinfo(p); }
};

std::unique_ptr<addrinfo, AddrInfoDeleter> resolve(const std::string& host, uint16_t port,
                                                   bool passive) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_DGRAM;
    hints.ai_protocol = IPPROTO_UDP;
    hints.ai_flags = passive ? AI_PASSIVE : 0;
    addrinfo* result = nullptr;
    const std::string service = std::to_string(port);
    const int rc = getaddrinfo(host.empty() ? nullptr : host.c_str(), service.c_str(), &hints,
                               &result);
    if (rc != 0) {
        throw std::system_error(std::make_error_code(std::errc::host_unreachable),
                                std::string("getaddrinfo ") + host + ": " + gai_strerror(rc));
    }
    return std::unique_ptr<addrinfo, AddrInfoDeleter>(result);
}

[[noreturn]] void throw_errno(const char* what) {
    throw std::system_error(errno, std::generic_category(), what);
}

} // namespace

UdpSocket::UdpSocket(UdpSocket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}

UdpSocket& UdpSocket::operator=(UdpSocket&& other) noexcept {
    if (this != &other) {
        if (fd_ >= 0) {
            ::close(fd_);
        }
        fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
}

UdpSocket::~UdpSocket() {
    if (fd_ >= 0) {
        ::close(fd_);
    }
}

UdpSocket UdpSocket::bind(const std::string& host, uint16_t port) {
    const auto info = resolve(host, port, true);
    const int fd = ::socket(info->ai_family, SOCK_DGRAM, IPPROTO_UDP);
    if (fd < 0) {
        throw_errno("socket");
    }
    UdpSocket sock(fd);
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, info->ai_addr, info->ai_addrlen) != 0) {
        throw_errno("bind");
    }
    return sock;
}

UdpSocket UdpSocket::connect(const std::string& host, uint16_t port) {
    const auto info = resolve(host, port, false);
    const int fd = ::socket(info->ai_family, SOCK_DGRAM, IPPROTO_UDP);
    if (fd < 0) {
        throw_errno("socket");
    }
    UdpSocket sock(fd);
    if (::connect(fd, info->ai_addr, info->ai_addrlen) != 0) {
        throw_errno("connect");
    }
    return sock;
}

void UdpSocket::set_recv_timeout(std::chrono::milliseconds timeout) {
    timeval tv{};
    tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
    tv.tv_usec = static_cast<suseconds_t>(timeout.count() % 1000 * 1000);
    if (::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv) != 0) {
        throw_errno("setsockopt(SO_RCVTIMEO)");
    }
}

std::optional<UdpSocket::Datagram> UdpSocket::recv_from() {
    Datagram dg;
    dg.data.resize(kMaxDatagram);
    dg.peer_len = sizeof dg.peer;
    const ssize_t n = ::recvfrom(fd_, dg.data.data(), dg.data.size(), 0,
                                 reinterpret_cast<sockaddr*>(&dg.peer), &dg.peer_len);
    if (n < 0) {
        if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) {
            return std::nullopt;
        }
        throw_errno("recvfrom");
    }
    dg.data.resize(static_cast<std::size_t>(n));
    return dg;
}

std::optional<std::vector<uint8_t>> UdpSocket::recv() {
    std::vector<uint8_t> buf(kMaxDatagram);
    const ssize_t n = ::recv(fd_, buf.data(), buf.size(), 0);
    if (n < 0) {
        if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) {
            return std::nullopt;
        }
        throw_errno("recv");
    }
    buf.resize(static_cast<std::size_t>(n));
    return buf;
}

void UdpSocket::send(std::span<const uint8_t> payload) {
    if (::send(fd_, payload.data(), payload.size(), 0) < 0) {
        throw_errno("send");
    }
}

void UdpSocket::send_to(std::span<const uint8_t> payload, const sockaddr_storage& peer,
                        socklen_t peer_len) {
    if (::sendto(fd_, payload.data(), payload.size(), 0,
                 reinterpret_cast<const sockaddr*>(&peer), peer_len) < 0) {
        throw_errno("sendto");
    }
}

uint16_t UdpSocket::local_port() const {
    sockaddr_storage addr{};
    socklen_t len = sizeof addr;
    if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
        throw_errno("getsockname");
    }
    if (addr.ss_family == AF_INET) {
        return ntohs(reinterpret_cast<const sockaddr_in*>(&addr)->sin_port);
    }
    return ntohs(reinterpret_cast<const sockaddr_in6*>(&addr)->sin6_port);
}

std::optional<std::vector<uint8_t>> udp_exchange(const std::string& host, uint16_t port,
                                                 std::span<const uint8_t> payload,
                                                 std::chrono::milliseconds timeout) {
    try {
        UdpSocket sock = UdpSocket::connect(host, port);
        sock.send(payload);
        const auto deadline = std::chrono::steady_clock::now() + timeout;
        while (true) {
            const auto now = std::chrono::steady_clock::now();
            if (now >= deadline) {
                return std::nullopt;
            }
            sock.set_recv_timeout(
                std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now));
            auto response = sock.recv();
            if (!response) {
                return std::nullopt;
            }
            const bool id_matches = response->size() >= 2 && payload.size() >= 2 &&
                                    (*response)[0] == payload[0] && (*response)[1] == payload[1];
            if (id_matches) {
                return response;
            }
        }
    } catch (const std::system_error&) {
        return std::nullopt;
    }
}

} // namespace steerdns::net
