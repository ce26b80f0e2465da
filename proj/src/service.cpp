#include "steerdns/service.hpp"

#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <utility>

namespace steerdns::service {

namespace {

bool read_exact(int fd, uint8_t* out, std::size_t len, int timeout_ms) {
    std::size_t got = 0;
    while (got < len) {
        pollfd pfd{fd, POLLIN, 0};
        if (::poll(&pfd, 1, timeout_ms) <= 0) {
            return false;
        }
        const ssize_t n = ::recv(fd, out + got, len - got, 0);
        if (n <= 0) {
            return false;
        }
        got += static_cast<std::size_t>(n);
    }
    return true;
}

bool write_all(int fd, const uint8_t* data, std::size_t len) {
    std::size_t sent = 0;
    while (sent < len) {
        const ssize_t n = ::send(fd, data + sent, len - sent, MSG_NOSIGNAL);
        if (n <= 0) {
            return false;
        }
        sent += static_cast<std::size_t>(n);
    }
    return true;
}

bool read_framed(int fd, std::vector<uint8_t>& out, int timeout_ms) {
    uint8_t len_bytes[2];
    if (!read_exact(fd, len_bytes, 2, timeout_ms)) {
        return false;
    }
    const std::size_t len = static_cast<std::size_t>(len_bytes[0]) << 8 | len_bytes[1];
    out.resize(len);
    return len == 0 || read_exact(fd, out.data(), len, timeout_ms);
}

bool write_framed(int fd, std::span<const uint8_t> payload) {
    const uint8_t len_bytes[2] = {static_cast<uint8_t>(payload.size() >> 8),
                                  static_cast<uint8_t>(payload.size() & 0xFF)};
    return write_all(fd, len_bytes, 2) && write_all(fd, payload.data(), payload.size());
}

int tcp_connect(const std::string& host, uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* info = nullptr;
    if (getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &info) != 0) {
        return -1;
    }
    const int fd = ::socket(info->ai_family, SOCK_STREAM, 0);
    if (fd >= 0 && ::connect(fd, info->ai_addr, info->ai_addrlen) != 0) {
        ::close(fd);
        freeaddrinfo(info);
        return -1;
    }
    freeaddrinfo(info);
    return fd;
}

int tcp_listen(const std::string& host, uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* info = nullptr;
    if (getaddrinfo(host.empty() ? nullptr : host.c_str(), std::to_string(port).c_str(), &hints,
                    &info) != 0) {
        return -1;
    }
    const int fd = ::socket(info->ai_family, SOCK_STREAM, 0);
    if (fd < 0) {
        freeaddrinfo(info);
        return -1;
    }
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, info->ai_addr, info->ai_addrlen) != 0 || ::listen(fd, 16) != 0) {
        ::close(fd);
        freeaddrinfo(info);
        return -1;
    }
    freeaddrinfo(info);
    return fd;
}

} // namespace

ProxyService::ProxyService(ServiceConfig cfg) : cfg_(std::move(cfg)) {
    SuffixList suffixes;
    if (!cfg_.suffix_file.empty()) {
        suffixes = SuffixList::from_file(cfg_.suffix_file);
    }
    const std::string upstream_host = cfg_.upstream_host;
    const uint16_t upstream_port = cfg_.upstream_port;
    const auto timeout = std::chrono::milliseconds(cfg_.upstream_timeout_ms);
    auto upstream = [upstream_host, upstream_port,
                     timeout](std::span<const uint8_t> query)
        -> std::optional<std::vector<uint8_t>> {
        return net::udp_exchange(upstream_host, upstream_port, query, timeout);
    };
    proxy_ = std::make_unique<proxy::SteeringProxy>(cfg_.proxy, std::move(suffixes),
                                                    std::move(upstream));
}

ProxyService::~ProxyService() {
    stop();
}

void ProxyService::start() {
    if (started_.exchange(true)) {
        throw std::logic_error("ProxyService: already started");
    }
    dns_socket_ = net::UdpSocket::bind(cfg_.listen_host, cfg_.listen_port);
    dns_socket_.set_recv_timeout(std::chrono::milliseconds(200));
    if (cfg_.enable_feedback) {
        feedback_socket_ = net::UdpSocket::bind(cfg_.listen_host, cfg_.feedback_port);
        feedback_socket_.set_recv_timeout(std::chrono::milliseconds(200));
    }
    if (cfg_.enable_tcp) {
        tcp_fd_ = tcp_listen(cfg_.listen_host, dns_socket_.local_port());
        if (tcp_fd_ < 0) {
            throw std::system_error(errno, std::generic_category(), "tcp listen");
        }
    }
    running_ = true;
    const int workers = cfg_.workers < 1 ? 1 : cfg_.workers;
    threads_.reserve(static_cast<std::size_t>(workers) + 3);
    for (int i = 0; i < workers; ++i) {
        threads_.emplace_back([this] { dns_worker(); });
    }
    if (feedback_socket_.valid()) {
        threads_.emplace_back([this] { feedback_worker(); });
    }
    if (tcp_fd_ >= 0) {
        threads_.emplace_back([this] { tcp_worker(); });
    }
    threads_.emplace_back([this] { sweeper(); });
}

void ProxyService::stop() {
    if (!running_.exchange(false)) {
        return;
    }
    for (auto& t : threads_) {
        if (t.joinable()) {
            t.join();
        }
    }
    threads_.clear();
    if (tcp_fd_ >= 0) {
        ::close(tcp_fd_);
        tcp_fd_ = -1;
    }
}

uint16_t ProxyService::dns_port() const {
    return dns_socket_.local_port();
}

uint16_t ProxyService::feedback_port() const {
    return feedback_socket_.local_port();
}

FeedbackCounters ProxyService::feedback_counters() const {
    std::scoped_lock lock(feedback_mutex_);
    return feedback_counters_;
}

void ProxyService::dns_worker() {
    while (running_) {
        std::optional<net::UdpSocket::Datagram> dg;
        try {
            dg = dns_socket_.recv_from();
        } catch (const std::system_error&) {
            continue;
        }
        if (!dg) {
            continue;
        }
        const auto response = proxy_->handle_datagram(dg->data, dns::CacheClock::now());
        if (!response) {
            continue;
        }
        try {
            dns_socket_.send_to(*response, dg->peer, dg->peer_len);
        } catch (const std::system_error&) {
        }
    }
}

void ProxyService::feedback_worker() {
    while (running_) {
        std::optional<net::UdpSocket::Datagram> dg;
        try {
            dg = feedback_socket_.recv_from();
        } catch (const std::system_error&) {
            continue;
        }
        if (!dg) {
            continue;
        }
        const auto decoded = feedback::decode(dg->data);
        std::scoped_lock lock(feedback_mutex_);
        if (const auto* error = std::get_if<feedback::DecodeError>(&decoded)) {
            switch (*error) {
            case feedback::DecodeError::BadMagic: ++feedback_counters_.bad_magic; break;
            case feedback::DecodeError::BadVersion: ++feedback_counters_.bad_version; break;
            case feedback::DecodeError::BadFamily: ++feedback_counters_.bad_family; break;
            case feedback::DecodeError::LengthMismatch:
                ++feedback_counters_.length_mismatch;
                break;
            }
            continue;
        }
        const auto& msg = std::get<feedback::FeedbackMessage>(decoded);
        const auto outcome = feedback::apply_feedback(msg, proxy_->registry(), proxy_->suffixes());
        if (outcome) {
            ++feedback_counters_.applied;
        } else {
            ++feedback_counters_.ignored;
        }
    }
}

void ProxyService::tcp_worker() {
    // TC-bit retries arrive here. One framed exchange per connection,
    // relayed untouched: no cache, no steering.
    while (running_) {
        pollfd pfd{tcp_fd_, POLLIN, 0};
        if (::poll(&pfd, 1, 200) <= 0) {
            continue;
        }
        const int client = ::accept(tcp_fd_, nullptr, nullptr);
        if (client < 0) {
            continue;
        }
        std::vector<uint8_t> query;
        if (read_framed(client, query, 2000)) {
            const int upstream = tcp_connect(cfg_.upstream_host, cfg_.upstream_port);
            if (upstream >= 0) {
                std::vector<uint8_t> response;
                if (write_framed(upstream, query) &&
                    read_framed(upstream, response, cfg_.upstream_timeout_ms)) {
                    write_framed(client, response);
                }
                ::close(upstream);
            }
        }
        ::close(client);
    }
}

void ProxyService::sweeper() {
    auto last = std::chrono::steady_clock::now();
    while (running_) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
        const auto now = std::chrono::steady_clock::now();
        if (now - last >= std::chrono::seconds(1)) {
            proxy_->cache().purge_expired(dns::CacheClock::now());
            last = now;
        }
    }
}

} // namespace steerdns::service
