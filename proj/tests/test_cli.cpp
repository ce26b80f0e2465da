#include "commands.hpp"

#include "steerdns/feedback.hpp"
#include "steerdns/net/udp.hpp"
#include "steerdns/rng.hpp"

#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace steerdns;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;

    TempDir() {
        path = fs::temp_directory_path() /
               ("steerdns-test-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }

    static int& counter() {
        static int n = 0;
        return n;
    }

    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_synthetic_trace(const std::string& path, int pairs, int rounds) {
    std::ofstream out(path);
    SplitMix64 rng(777);
    for (int p = 0; p < pairs; ++p) {
        for (int r = 0; r < rounds; ++r) {
            const double ts = r * 60.0;
            const bool v4_better = p % 2 == 0;
            const double v4 = (v4_better ? 80.0 : 100.0) + 5.0 * rng.next_double();
            const double v6 = (v4_better ? 100.0 : 80.0) + 5.0 * rng.next_double();
            out << (p + 1) << ",7," << ts << ",4," << v4 << "\n";
            out << (p + 1) << ",7," << ts + 10.0 << ",6," << v6 << "\n";
        }
    }
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("simulate command is deterministic byte for byte") {
    TempDir dir;
    const auto input = dir.file("trace.csv");
    write_synthetic_trace(input, 2, 120);

    cli::SimulateOptions opt;
    opt.input_path = input;
    opt.output_path = dir.file("out1.json");
    REQUIRE(cli::run_simulate(opt) == 0);
    opt.output_path = dir.file("out2.json");
    REQUIRE(cli::run_simulate(opt) == 0);

    const auto a = slurp(dir.file("out1.json"));
    const auto b = slurp(dir.file("out2.json"));
    CHECK(a == b);
    CHECK(!a.empty());

    const auto doc = nlohmann::json::parse(a);
    CHECK(doc["format"] == "steerdns-simulation/1");
    CHECK(doc["pairs"].size() == 2);
    CHECK(doc["errors"].empty());
    for (const auto& pair : doc["pairs"]) {
        CHECK(pair["methods"].contains("exp3"));
        CHECK(pair["methods"].contains("aposteriori"));
        CHECK(pair["methods"].contains("probe_best"));
        CHECK(pair["methods"]["exp3"]["best_choice_ratio"].get<double>() >= 0.0);
    }
    CHECK(fs::exists(dir.file("out1.json") + ".manifest.json"));
}

TEST_CASE("simulate records per-pair errors and proceeds") {
    TempDir dir;
    const auto input = dir.file("trace.csv");
    write_synthetic_trace(input, 2, 120);
    // Second pair gets extra rounds so only the first is too short.
    {
        std::ofstream out(input, std::ios::app);
        for (int r = 120; r < 300; ++r) {
            out << "2,7," << r * 60.0 << ",4,80\n";
            out << "2,7," << r * 60.0 + 10.0 << ",6,100\n";
        }
    }
    cli::SimulateOptions opt;
    opt.input_path = input;
    opt.output_path = dir.file("out.json");
    opt.train_rounds = 200;
    REQUIRE(cli::run_simulate(opt) == 0);
    const auto doc = nlohmann::json::parse(slurp(opt.output_path));
    CHECK(doc["pairs"].size() == 1);
    CHECK(doc["errors"].size() == 1);
    CHECK(doc["errors"][0]["probe"] == 1);
}

TEST_CASE("simulate fails cleanly on bad input") {
    TempDir dir;
    const auto input = dir.file("bad.csv");
    {
        std::ofstream out(input);
        out << "1,7,0,4,80\nnot-a-line\n";
    }
    cli::SimulateOptions opt;
    opt.input_path = input;
    opt.output_path = dir.file("out.json");
    CHECK(cli::run_simulate(opt) == 1);
    CHECK(!fs::exists(opt.output_path));
}

TEST_CASE("classify command reports counts, groups and probe ratios") {
    TempDir dir;
    const auto input = dir.file("trace.csv");
    write_synthetic_trace(input, 3, 320);
    {
        // A fourth pair with too few samples lands in excluded.
        std::ofstream out(input, std::ios::app);
        for (int r = 0; r < 50; ++r) {
            out << "9,7," << r * 60.0 << ",4,80\n";
            out << "9,7," << r * 60.0 + 10.0 << ",6,100\n";
        }
    }
    cli::ClassifyOptions opt;
    opt.input_path = input;
    opt.output_path = dir.file("report.json");
    REQUIRE(cli::run_classify(opt) == 0);
    const auto doc = nlohmann::json::parse(slurp(opt.output_path));
    CHECK(doc["format"] == "steerdns-classification/1");
    CHECK(doc["pairs"].size() == 3);
    CHECK(doc["excluded"].size() == 1);
    CHECK(doc["excluded"][0]["probe"] == 9);
    CHECK(doc["classification_counts"]["v4_better"].get<int>() == 2);
    CHECK(doc["classification_counts"]["v6_better"].get<int>() == 1);
    const int group_total = doc["group_counts"]["A"].get<int>() +
                            doc["group_counts"]["B"].get<int>() +
                            doc["group_counts"]["C"].get<int>() +
                            doc["group_counts"]["D"].get<int>();
    CHECK(group_total == 3);
    CHECK(doc["probe_ratios"].size() == 3);
    CHECK(fs::exists(opt.output_path + ".manifest.json"));
}

TEST_CASE("classify on an empty file yields zero counts") {
    TempDir dir;
    const auto input = dir.file("empty.csv");
    std::ofstream(input).close();
    cli::ClassifyOptions opt;
    opt.input_path = input;
    opt.output_path = dir.file("report.json");
    REQUIRE(cli::run_classify(opt) == 0);
    const auto doc = nlohmann::json::parse(slurp(opt.output_path));
    CHECK(doc["pairs"].empty());
    CHECK(doc["classification_counts"]["v4_better"].get<int>() == 0);
}

TEST_CASE("report command aggregates experiment connections") {
    TempDir dir;
    const auto input = dir.file("connections.csv");
    {
        std::ofstream out(input);
        for (int i = 0; i < 200; ++i) {
            out << "shop.example,adaptive," << (i < 60 ? 500.0 : 10.0) << "\n";
        }
        for (int i = 0; i < 90; ++i) {
            out << "tiny.example,v4_only,20\n";
        }
    }
    cli::ReportOptions opt;
    opt.input_path = input;
    opt.output_path = dir.file("report.json");
    REQUIRE(cli::run_report(opt) == 0);
    const auto doc = nlohmann::json::parse(slurp(opt.output_path));
    REQUIRE(doc["destinations"].size() == 1);
    CHECK(doc["destinations"][0]["destination"] == "shop.example");
    CHECK(doc["destinations"][0]["mean_handshake_ms"]["adaptive"].get<double>() ==
          doctest::Approx(10.0));
}

TEST_CASE("send-feedback emits one decodable datagram") {
    auto listener = net::UdpSocket::bind("127.0.0.1", 0);
    listener.set_recv_timeout(std::chrono::milliseconds(2000));

    cli::SendFeedbackOptions opt;
    opt.host = "127.0.0.1";
    opt.port = listener.local_port();
    opt.name = "example.com";
    opt.family = 6;
    opt.metric_ms = 25.0;
    REQUIRE(cli::run_send_feedback(opt) == 0);

    const auto dg = listener.recv_from();
    REQUIRE(dg.has_value());
    const auto decoded = feedback::decode(dg->data);
    REQUIRE(std::holds_alternative<feedback::FeedbackMessage>(decoded));
    const auto& msg = std::get<feedback::FeedbackMessage>(decoded);
    CHECK(msg.name == "example.com");
    CHECK(msg.family == 6);
    CHECK(msg.metric_value_us == 25000);
}
