#pragma once

#include "steerdns/feedback.hpp"
#include "steerdns/net/udp.hpp"
#include "steerdns/proxy.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <thread>
#include <vector>

namespace steerdns::service {

struct ServiceConfig {
    std::string listen_host = "127.0.0.1";
    uint16_t listen_port = 5300;
    std::string upstream_host = "127.0.0.1";
    uint16_t upstream_port = 53;
    bool enable_feedback = true;
    /// Binds on listen_host; 0 picks an ephemeral port.
    uint16_t feedback_port = 5310;
    /// TCP fallback listener on the DNS port: pure relay, never steered.
    bool enable_tcp = true;
    int upstream_timeout_ms = 2000;
    int workers = 4;
    std::string suffix_file; ///< optional
    proxy::ProxyConfig proxy;
};

struct FeedbackCounters {
    uint64_t applied = 0;
    uint64_t ignored = 0; ///< valid datagram, nothing to apply (kind/metric/name)
    uint64_t bad_magic = 0;
    uint64_t bad_version = 0;
    uint64_t bad_family = 0;
    uint64_t length_mismatch = 0;
};

/// Runs the steering proxy over real UDP sockets: a worker pool sharing
/// the DNS listener, an optional feedback listener, and a cache sweeper.
class ProxyService {
public:
    explicit ProxyService(ServiceConfig cfg);
    ~ProxyService();

    /// Binds and launches threads; throws std::system_error on bind
    /// failure. start/stop run once per instance.
    void start();
    void stop();

    uint16_t dns_port() const;
    uint16_t feedback_port() const;

    proxy::SteeringProxy& proxy() { return *proxy_; }
    FeedbackCounters feedback_counters() const;

private:
    void dns_worker();
    void feedback_worker();
    void tcp_worker();
    void sweeper();

    ServiceConfig cfg_;
    std::unique_ptr<proxy::SteeringProxy> proxy_;
    net::UdpSocket dns_socket_;
    net::UdpSocket feedback_socket_;
    int tcp_fd_ = -1;
    std::vector<std::thread> threads_;
    std::atomic<bool> running_{false};
    std::atomic<bool> started_{false};

    mutable std::mutex feedback_mutex_;
    FeedbackCounters feedback_counters_;
};

} // namespace steerdns::service
