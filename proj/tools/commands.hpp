#pragma once

#include <csignal>
#include <cstdint>
#include <string>

namespace steerdns::cli {

struct SimulateOptions {
    std::string input_path;
    std::string output_path;
    double gamma = 0.1;
    std::size_t train_rounds = 60;
    std::size_t runs = 100;
    uint64_t base_seed = 1;
    double window_s = 120.0;
};

struct ClassifyOptions {
    std::string input_path;
    std::string output_path;
    double window_s = 120.0;
    std::size_t min_pair_samples = 300;
    std::size_t min_segment_samples = 30;
    double percentile_lo = 5.0;
    double percentile_hi = 95.0;
};

struct ReportOptions {
    std::string input_path;
    std::string output_path;
    std::size_t min_tests = 100;
    std::size_t warmup = 60;
};

struct SendFeedbackOptions {
    std::string host;
    uint16_t port = 5310;
    std::string name;
    int family = 6;
    double metric_ms = 0.0;
};

struct ProxyOptions {
    std::string listen_host = "127.0.0.1";
    uint16_t listen_port = 5300;
    std::string upstream_host;
    uint16_t upstream_port = 53;
    double gamma = 0.1;
    bool steering = true;
    bool empty_a = true;
    bool feedback = true;
    uint16_t feedback_port = 5310;
    std::string suffix_file;
    int workers = 4;
    int upstream_timeout_ms = 2000;
    uint64_t choice_seed = 0x7374656572646e73ULL;
};

/// Each command returns the process exit code: 0 success, 1 runtime
/// failure. Usage validation happens in the flag parser before these run.
int run_simulate(const SimulateOptions& opt);
int run_classify(const ClassifyOptions& opt);
int run_report(const ReportOptions& opt);
int run_send_feedback(const SendFeedbackOptions& opt);

/// Serves until the stop flag (set by a signal handler) goes true.
int run_proxy(const ProxyOptions& opt, const volatile sig_atomic_t& stop_flag);

} // namespace steerdns::cli
