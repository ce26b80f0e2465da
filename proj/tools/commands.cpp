#include "commands.hpp"

#include "steerdns/analysis.hpp"
#include "steerdns/feedback.hpp"
#include "steerdns/net/udp.hpp"
#include "steerdns/rng.hpp"
#include "steerdns/segments.hpp"
#include "steerdns/service.hpp"
#include "steerdns/simulate.hpp"
#include "steerdns/trace_io.hpp"

#include <json.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <thread>

namespace steerdns::cli {

namespace {

using nlohmann::ordered_json;

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_json_file(const std::string& path, const ordered_json& doc) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open output file: " + path);
    }
    out << doc.dump(2) << '\n';
}

/// Reproducibility sidecar written next to every output artifact.
void write_manifest(const std::string& subcommand, const std::string& output_path,
                    const std::string& input_path, const ordered_json& config,
                    const ordered_json& seed) {
    ordered_json manifest;
    manifest["subcommand"] = subcommand;
    manifest["started_at"] = utc_timestamp();
    manifest["input"] = input_path;
    manifest["output"] = output_path;
    manifest["base_seed"] = seed;
    manifest["config"] = config;
    write_json_file(output_path + ".manifest.json", manifest);
}

ordered_json result_json(const sim::SimulationResult& r) {
    return {{"best_choice_ratio", r.best_choice_ratio},
            {"expected_gain_abs_ms", r.expected_gain_abs_ms},
            {"expected_gain_rel", r.expected_gain_rel}};
}

ordered_json cdf_json(const sim::CdfTables& tables) {
    ordered_json out = ordered_json::object();
    for (const auto& [category, methods] : tables) {
        for (const auto& [method, metrics] : methods) {
            for (const auto& [metric, cdf] : metrics) {
                ordered_json steps = ordered_json::array();
                for (const auto& p : cdf) {
                    steps.push_back({p.value, p.cum_fraction});
                }
                out[category][method][metric] = std::move(steps);
            }
        }
    }
    return out;
}

int fail(const std::string& message) {
    std::cerr << "error: " << message << '\n';
    return 1;
}

} // namespace

int run_simulate(const SimulateOptions& opt) {
    try {
        const auto tests = analysis::parse_trace_file(opt.input_path);
        const auto pairs = analysis::pair_tests(tests, opt.window_s);

        ordered_json config{{"gamma", opt.gamma},
                            {"train_rounds", opt.train_rounds},
                            {"runs", opt.runs},
                            {"base_seed", opt.base_seed},
                            {"window_s", opt.window_s}};

        // Per-pair winners feed the per-probe fixed-choice baseline.
        std::map<int64_t, std::map<int64_t, std::optional<AddressFamily>>> winners_by_probe;
        for (const auto& [key, samples] : pairs) {
            winners_by_probe[key.probe_id][key.anchor_id] = sim::trace_winner(samples);
        }
        std::map<int64_t, AddressFamily> probe_family;
        for (const auto& [probe, winners] : winners_by_probe) {
            probe_family[probe] = sim::baseline_probe_best(winners);
        }

        ordered_json pair_results = ordered_json::array();
        ordered_json errors = ordered_json::array();
        std::vector<sim::LabeledResult> labeled;
        for (const auto& [key, samples] : pairs) {
            sim::SimulationConfig cfg;
            cfg.gamma = opt.gamma;
            cfg.train_rounds = opt.train_rounds;
            cfg.runs = opt.runs;
            cfg.base_seed = opt.base_seed;
            cfg.pair_salt = mix_seed(static_cast<uint64_t>(key.probe_id),
                                     static_cast<uint64_t>(key.anchor_id));
            try {
                const auto exp3 = sim::run_simulation(samples, cfg);
                const auto apost = sim::baseline_aposteriori(samples, cfg);
                const auto probe_best =
                    sim::score_fixed_family(samples, probe_family.at(key.probe_id), cfg);

                pair_results.push_back(
                    {{"probe", key.probe_id},
                     {"anchor", key.anchor_id},
                     {"rounds", samples.size()},
                     {"category", analysis::classification_name(exp3.category)},
                     {"methods",
                      {{"exp3", result_json(exp3)},
                       {"aposteriori", result_json(apost)},
                       {"probe_best", result_json(probe_best)}}}});
                labeled.push_back({"exp3", exp3});
                labeled.push_back({"aposteriori", apost});
                labeled.push_back({"probe_best", probe_best});
            } catch (const std::invalid_argument& e) {
                errors.push_back(
                    {{"probe", key.probe_id}, {"anchor", key.anchor_id}, {"error", e.what()}});
            }
        }

        ordered_json doc;
        doc["format"] = "steerdns-simulation/1";
        doc["config"] = config;
        doc["pairs"] = std::move(pair_results);
        doc["errors"] = std::move(errors);
        doc["cdf"] = labeled.empty() ? ordered_json::object() : cdf_json(sim::aggregate_cdf(labeled));
        write_json_file(opt.output_path, doc);
        write_manifest("simulate", opt.output_path, opt.input_path, config, opt.base_seed);
        return 0;
    } catch (const std::exception& e) {
        return fail(e.what());
    }
}

int run_classify(const ClassifyOptions& opt) {
    try {
        const auto tests = analysis::parse_trace_file(opt.input_path);
        const auto pairs = analysis::pair_tests(tests, opt.window_s);

        ordered_json config{{"window_s", opt.window_s},
                            {"min_pair_samples", opt.min_pair_samples},
                            {"min_segment_samples", opt.min_segment_samples},
                            {"percentile_lo", opt.percentile_lo},
                            {"percentile_hi", opt.percentile_hi}};

        ordered_json pair_results = ordered_json::array();
        ordered_json excluded = ordered_json::array();
        std::map<std::string, std::size_t> class_counts{
            {"v4_better", 0}, {"v6_better", 0}, {"none_better", 0}};
        std::map<std::string, std::size_t> group_counts{{"A", 0}, {"B", 0}, {"C", 0}, {"D", 0}};
        std::map<analysis::PairKey, analysis::PairClassification> classifications;

        for (const auto& [key, samples] : pairs) {
            if (samples.size() < opt.min_pair_samples) {
                excluded.push_back({{"probe", key.probe_id},
                                    {"anchor", key.anchor_id},
                                    {"samples", samples.size()},
                                    {"reason", "fewer samples than the pair minimum"}});
                continue;
            }
            const auto filtered =
                analysis::percentile_filter(samples, opt.percentile_lo, opt.percentile_hi);
            const auto global = analysis::classify_pair(filtered, opt.min_segment_samples);
            const auto segments = analysis::detect_segments(filtered, opt.min_segment_samples);

            std::vector<analysis::PairClassification> segment_classes;
            ordered_json segments_json = ordered_json::array();
            for (const auto& [start, end] : segments) {
                const std::span<const analysis::PairedSample> view(filtered.data() + start,
                                                                   end - start);
                const auto cls = analysis::classify_pair(view, opt.min_segment_samples);
                segment_classes.push_back(cls);
                segments_json.push_back({{"start", start},
                                         {"end", end},
                                         {"classification", analysis::classification_name(cls)}});
            }
            const auto group = analysis::classify_groups(global, segment_classes);

            classifications.emplace(key, global);
            class_counts[std::string(analysis::classification_name(global))] += 1;
            group_counts[std::string(analysis::group_name(group))] += 1;
            pair_results.push_back({{"probe", key.probe_id},
                                    {"anchor", key.anchor_id},
                                    {"samples", samples.size()},
                                    {"filtered_samples", filtered.size()},
                                    {"classification", analysis::classification_name(global)},
                                    {"group", analysis::group_name(group)},
                                    {"segments", std::move(segments_json)}});
        }

        ordered_json probe_ratios = ordered_json::array();
        for (const auto& [probe, ratio] : analysis::probe_best_ratio(classifications)) {
            probe_ratios.push_back({{"probe", probe},
                                    {"best_family", family_name(ratio.best_family)},
                                    {"ratio_best", ratio.ratio_best},
                                    {"ratio_none", ratio.ratio_none}});
        }

        ordered_json doc;
        doc["format"] = "steerdns-classification/1";
        doc["config"] = config;
        doc["pairs"] = std::move(pair_results);
        doc["excluded"] = std::move(excluded);
        doc["classification_counts"] = class_counts;
        doc["group_counts"] = group_counts;
        doc["probe_ratios"] = std::move(probe_ratios);
        write_json_file(opt.output_path, doc);
        write_manifest("classify", opt.output_path, opt.input_path, config, nullptr);
        return 0;
    } catch (const std::exception& e) {
        return fail(e.what());
    }
}

int run_report(const ReportOptions& opt) {
    try {
        const auto connections = analysis::parse_connections_file(opt.input_path);
        const auto report = analysis::experiment_report(connections, opt.min_tests, opt.warmup);

        ordered_json config{{"min_tests", opt.min_tests}, {"warmup", opt.warmup}};
        ordered_json destinations = ordered_json::array();
        for (const auto& [dest, modes] : report) {
            ordered_json means = ordered_json::object();
            for (const auto& [mode, mean_ms] : modes) {
                means[std::string(analysis::mode_name(mode))] = mean_ms;
            }
            destinations.push_back({{"destination", dest}, {"mean_handshake_ms", means}});
        }
        ordered_json doc;
        doc["format"] = "steerdns-experiment-report/1";
        doc["config"] = config;
        doc["destinations"] = std::move(destinations);
        write_json_file(opt.output_path, doc);
        write_manifest("report", opt.output_path, opt.input_path, config, nullptr);
        return 0;
    } catch (const std::exception& e) {
        return fail(e.what());
    }
}

int run_send_feedback(const SendFeedbackOptions& opt) {
    try {
        feedback::FeedbackMessage msg;
        msg.family = static_cast<uint8_t>(opt.family);
        msg.metric_kind = feedback::kMetricHandshakeTime;
        const double us = opt.metric_ms * 1000.0;
        if (!(us > 0.0) || us > static_cast<double>(UINT32_MAX)) {
            return fail("metric out of range");
        }
        msg.metric_value_us = static_cast<uint32_t>(us);
        msg.name = opt.name;
        const auto datagram = feedback::encode(msg);
        auto sock = net::UdpSocket::connect(opt.host, opt.port);
        sock.send(datagram);
        return 0;
    } catch (const std::exception& e) {
        return fail(e.what());
    }
}

int run_proxy(const ProxyOptions& opt, const volatile sig_atomic_t& stop_flag) {
    try {
        service::ServiceConfig cfg;
        cfg.listen_host = opt.listen_host;
        cfg.listen_port = opt.listen_port;
        cfg.upstream_host = opt.upstream_host;
        cfg.upstream_port = opt.upstream_port;
        cfg.enable_feedback = opt.feedback;
        cfg.feedback_port = opt.feedback_port;
        cfg.upstream_timeout_ms = opt.upstream_timeout_ms;
        cfg.workers = opt.workers;
        cfg.suffix_file = opt.suffix_file;
        cfg.proxy.gamma = opt.gamma;
        cfg.proxy.steering = opt.steering;
        cfg.proxy.empty_a = opt.empty_a;
        cfg.proxy.choice_seed = opt.choice_seed;

        service::ProxyService svc(cfg);
        svc.proxy().set_log_sink([](const proxy::SteerLogEntry& e) {
            ordered_json line{{"ts", utc_timestamp()},
                              {"name", e.name},
                              {"group", e.group},
                              {"family", family_name(e.chosen)},
                              {"p_v4", e.p_v4},
                              {"p_v6", e.p_v6}};
            std::cout << line.dump() << '\n' << std::flush;
        });
        svc.start();
        std::cerr << "steerdns proxy listening on " << opt.listen_host << ":" << svc.dns_port()
                  << " upstream " << opt.upstream_host << ":" << opt.upstream_port;
        if (opt.feedback) {
            std::cerr << " feedback port " << svc.feedback_port();
        }
        std::cerr << '\n';
        while (!stop_flag) {
            std::this_thread::sleep_for(std::chrono::milliseconds(100));
        }
        svc.stop();
        return 0;
    } catch (const std::exception& e) {
        return fail(e.what());
    }
}

} // namespace steerdns::cli
