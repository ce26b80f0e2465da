#include "commands.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdint>
#include <iostream>
#include <string>

namespace {

volatile sig_atomic_t g_stop = 0;

void handle_signal(int) {
    g_stop = 1;
}

/// "host:port" with optional [bracketed] IPv6 host.
bool parse_endpoint(const std::string& text, std::string& host, uint16_t& port) {
    std::string rest = text;
    if (!rest.empty() && rest.front() == '[') {
        const auto close = rest.find(']');
        if (close == std::string::npos || close + 1 >= rest.size() || rest[close + 1] != ':') {
            return false;
        }
        host = rest.substr(1, close - 1);
        rest = rest.substr(close + 2);
    } else {
        const auto colon = rest.rfind(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 >= rest.size()) {
            return false;
        }
        host = rest.substr(0, colon);
        rest = rest.substr(colon + 1);
    }
    try {
        const unsigned long value = std::stoul(rest);
        if (value > 65535) {
            return false;
        }
        port = static_cast<uint16_t>(value);
        return true;
    } catch (...) {
        return false;
    }
}

const CLI::Validator kGammaRange = CLI::Validator(
    [](std::string& value) -> std::string {
        try {
            const double g = std::stod(value);
            if (g > 0.0 && g <= 1.0) {
                return {};
            }
        } catch (...) {
        }
        return "gamma must be in (0, 1]";
    },
    "GAMMA(0,1]");

} // namespace

int main(int argc, char** argv) {
    using namespace steerdns::cli;

    CLI::App app{"Adaptive dual-stack DNS steering proxy and analysis toolkit"};
    app.require_subcommand(1);

    // proxy
    ProxyOptions proxy_opt;
    std::string listen_ep = "127.0.0.1:5300";
    std::string upstream_ep;
    auto* proxy_cmd =
        app.add_subcommand("proxy", "Run the steering DNS proxy with the feedback listener");
    proxy_cmd->add_option("--listen", listen_ep, "Listen address host:port")
        ->envname("STEERDNS_LISTEN")
        ->capture_default_str();
    proxy_cmd->add_option("--upstream", upstream_ep, "Upstream resolver host:port")
        ->envname("STEERDNS_UPSTREAM")
        ->required();
    proxy_cmd->add_option("--gamma", proxy_opt.gamma, "EXP3 gamma in (0, 1]")
        ->envname("STEERDNS_GAMMA")
        ->check(kGammaRange)
        ->capture_default_str();
    proxy_cmd->add_flag("--no-steer{false}", proxy_opt.steering,
                        "Disable steering (pure caching forwarder)");
    proxy_cmd->add_flag("--no-empty-a{false}", proxy_opt.empty_a,
                        "Serve cached A records instead of empty answers on cache hits");
    proxy_cmd->add_flag("--no-feedback{false}", proxy_opt.feedback,
                        "Disable the feedback listener");
    proxy_cmd->add_option("--feedback-port", proxy_opt.feedback_port, "Feedback UDP port")
        ->envname("STEERDNS_FEEDBACK_PORT")
        ->capture_default_str();
    proxy_cmd->add_option("--suffix-file", proxy_opt.suffix_file,
                          "Registry suffix list for group keys")
        ->envname("STEERDNS_SUFFIX_FILE")
        ->check(CLI::ExistingFile);
    proxy_cmd->add_option("--workers", proxy_opt.workers, "DNS worker threads")
        ->envname("STEERDNS_WORKERS")
        ->check(CLI::Range(1, 64))
        ->capture_default_str();
    proxy_cmd->add_option("--timeout-ms", proxy_opt.upstream_timeout_ms, "Upstream timeout")
        ->envname("STEERDNS_TIMEOUT_MS")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    proxy_cmd->add_option("--seed", proxy_opt.choice_seed, "Steering choice RNG seed")
        ->envname("STEERDNS_SEED");

    // simulate
    SimulateOptions sim_opt;
    auto* sim_cmd = app.add_subcommand("simulate", "Replay paired traces through EXP3");
    sim_cmd->add_option("--input", sim_opt.input_path, "Trace file")
        ->required()
        ->check(CLI::ExistingFile);
    sim_cmd->add_option("--output", sim_opt.output_path, "JSON results path")->required();
    sim_cmd->add_option("--gamma", sim_opt.gamma, "EXP3 gamma in (0, 1]")
        ->check(kGammaRange)
        ->capture_default_str();
    sim_cmd->add_option("--train", sim_opt.train_rounds, "Training rounds")
        ->capture_default_str();
    sim_cmd->add_option("--runs", sim_opt.runs, "Runs per pair")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sim_cmd->add_option("--seed", sim_opt.base_seed, "Master seed")->capture_default_str();
    sim_cmd->add_option("--window", sim_opt.window_s, "Pairing window in seconds")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    // classify
    ClassifyOptions cls_opt;
    auto* cls_cmd = app.add_subcommand("classify", "Classify pairs, segments and probe ratios");
    cls_cmd->add_option("--input", cls_opt.input_path, "Trace file")
        ->required()
        ->check(CLI::ExistingFile);
    cls_cmd->add_option("--output", cls_opt.output_path, "JSON report path")->required();
    cls_cmd->add_option("--window", cls_opt.window_s, "Pairing window in seconds")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cls_cmd->add_option("--min-samples", cls_opt.min_pair_samples, "Minimum samples per pair")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cls_cmd
        ->add_option("--min-segment", cls_opt.min_segment_samples, "Minimum samples per segment")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    // report
    ReportOptions rep_opt;
    auto* rep_cmd =
        app.add_subcommand("report", "Mean handshake time per destination and mode");
    rep_cmd->add_option("--input", rep_opt.input_path, "Connection observations file")
        ->required()
        ->check(CLI::ExistingFile);
    rep_cmd->add_option("--output", rep_opt.output_path, "JSON report path")->required();
    rep_cmd->add_option("--min-tests", rep_opt.min_tests, "Minimum post-warmup tests")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    rep_cmd->add_option("--warmup", rep_opt.warmup, "Observations dropped per destination")
        ->capture_default_str();

    // send-feedback
    SendFeedbackOptions fb_opt;
    std::string target_ep;
    auto* fb_cmd = app.add_subcommand("send-feedback", "Emit one transport-metric datagram");
    fb_cmd->add_option("--target", target_ep, "Feedback listener host:port")->required();
    fb_cmd->add_option("--name", fb_opt.name, "Domain name the metric belongs to")->required();
    fb_cmd->add_option("--family", fb_opt.family, "Address family used (4 or 6)")
        ->required()
        ->check(CLI::IsMember({4, 6}));
    fb_cmd->add_option("--ms", fb_opt.metric_ms, "Handshake time in milliseconds")
        ->required()
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Exit code contract: 0 success, 1 runtime failure, 2 usage error.
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (proxy_cmd->parsed()) {
        if (!parse_endpoint(listen_ep, proxy_opt.listen_host, proxy_opt.listen_port) ||
            !parse_endpoint(upstream_ep, proxy_opt.upstream_host, proxy_opt.upstream_port)) {
            std::cerr << "error: bad endpoint (expected host:port)\n";
            return 2;
        }
        std::signal(SIGINT, handle_signal);
        std::signal(SIGTERM, handle_signal);
        return run_proxy(proxy_opt, g_stop);
    }
    if (sim_cmd->parsed()) {
        return run_simulate(sim_opt);
    }
    if (cls_cmd->parsed()) {
        return run_classify(cls_opt);
    }
    if (rep_cmd->parsed()) {
        return run_report(rep_opt);
    }
    if (fb_cmd->parsed()) {
        if (!parse_endpoint(target_ep, fb_opt.host, fb_opt.port)) {
            std::cerr << "error: bad target (expected host:port)\n";
            return 2;
        }
        return run_send_feedback(fb_opt);
    }
    return 2;
}
