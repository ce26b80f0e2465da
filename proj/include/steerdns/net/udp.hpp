#pragma once

#include <netinet/in.h>
#include <sys/socket.h>

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace steerdns::net {

/// Move-only RAII wrapper over a UDP socket fd. Both address families are
/// supported; the family comes from resolving the given host.
class UdpSocket {
public:
    UdpSocket() = default;
    UdpSocket(UdpSocket&& other) noexcept;
    UdpSocket& operator=(UdpSocket&& other) noexcept;
    UdpSocket(const UdpSocket&) = delete;
    UdpSocket& operator=(const UdpSocket&) = delete;
    ~UdpSocket();

    /// Bound listener; port 0 picks an ephemeral port. Throws
    /// std::system_error on resolution or bind failure.
    static UdpSocket bind(const std::string& host, uint16_t port);

    /// Connected sender towards one peer. Throws std::system_error.
    static UdpSocket connect(const std::string& host, uint16_t port);

    void set_recv_timeout(std::chrono::milliseconds timeout);

    struct Datagram {
        std::vector<uint8_t> data;
        sockaddr_storage peer{};
        socklen_t peer_len = 0;
    };

    /// nullopt on timeout.
    std::optional<Datagram> recv_from();
    std::optional<std::vector<uint8_t>> recv();

    void send(std::span<const uint8_t> payload);
    void send_to(std::span<const uint8_t> payload, const sockaddr_storage& peer,
                 socklen_t peer_len);

    uint16_t local_port() const;
    bool valid() const { return fd_ >= 0; }
    int fd() const { return fd_; }

private:
    explicit UdpSocket(int fd) : fd_(fd) {}

    int fd_ = -1;
};

/// One-shot request/response exchange with a UDP peer. Waits until a
/// datagram whose first two bytes echo the request's arrives (the DNS
/// transaction id) or the timeout lapses.
std::optional<std::vector<uint8_t>> udp_exchange(const std::string& host, uint16_t port,
                                                 std::span<const uint8_t> payload,
                                                 std::chrono::milliseconds timeout);

} // namespace steerdns::net
