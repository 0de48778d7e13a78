// scc: runs verification experiments from JSON configs and summarizes results.
//
//   scc simulate --config cfg.json --out results/
//   scc report results/

#include "experiments.hpp"

#include "scc/error.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <thread>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using scc::Error;
using scc::ErrorKind;

constexpr const char* kVersion = "0.1.0";

int fail(std::string_view cls, const std::string& msg, int code) {
    std::string line = msg;
    for (auto& c : line) {
        if (c == '\n') c = ' ';
    }
    std::cerr << "error: " << cls << ": " << line << "\n";
    return code;
}

void write_file(const fs::path& p, const std::string& contents) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorKind::ConfigInvalid, "cannot write " + p.string());
    out << contents;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Options {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    int threads = 0;
};

int run_experiment(const std::string& kind, const Options& opt) {
    using Runner = scc::cli::Outcome (*)(const scc::cli::Context&);
    static const std::map<std::string, Runner> runners = {
        {"simulate", scc::cli::run_simulate},         {"smooth-converge", scc::cli::run_smooth_converge},
        {"rescale-check", scc::cli::run_rescale_check}, {"reduce", scc::cli::run_reduce},
        {"diagnose", scc::cli::run_diagnose},
    };

    scc::cli::Context ctx;
    const fs::path config_path(opt.config);
    ctx.config = scc::cli::read_json_file(config_path);
    if (!ctx.config.is_object()) throw Error(ErrorKind::ConfigInvalid, "config must be a JSON object");
    if (ctx.config.contains("kind") && ctx.config.at("kind") != kind) {
        throw Error(ErrorKind::ConfigInvalid, "config is for " + ctx.config.at("kind").dump() + ", not " + kind);
    }
    ctx.base_dir = config_path.parent_path();
    ctx.seed = opt.seed;
    ctx.threads = opt.threads > 0 ? opt.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    const auto start = std::chrono::steady_clock::now();
    const scc::cli::Outcome outcome = runners.at(kind)(ctx);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const fs::path dir(opt.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) throw Error(ErrorKind::ConfigInvalid, "cannot create output directory " + dir.string());

    json outputs = json::array({kind + ".csv"});
    write_file(dir / (kind + ".csv"), scc::cli::to_csv(outcome.table));
    for (const auto& [name, contents] : outcome.files) {
        write_file(dir / name, contents);
        outputs.push_back(name);
    }
    const json manifest = {{"kind", kind},
                           {"config", fs::absolute(config_path).lexically_normal().string()},
                           {"config_contents", ctx.config},
                           {"inputs", outcome.inputs},
                           {"seed_override", opt.seed ? json(*opt.seed) : json()},
                           {"threads", ctx.threads},
                           {"version", kVersion},
                           {"compiler", __VERSION__},
                           {"wall_time_seconds", wall},
                           {"timestamp", utc_timestamp()},
                           {"outputs", outputs},
                           {"status", outcome.pass ? "pass" : "fail"},
                           {"summary", outcome.summary}};
    write_file(dir / (kind + ".manifest.json"), manifest.dump(2) + "\n");

    std::cout << kind << ": " << (outcome.pass ? "pass" : "FAIL") << " (" << (dir / (kind + ".csv")).string()
              << ")\n";
    return outcome.pass ? 0 : 1;
}

int run_report(const std::string& dir_arg) {
    const fs::path dir(dir_arg);
    const auto rep = scc::cli::build_report(dir);
    const std::string text = rep.render();
    std::cout << text;
    write_file(dir / "report.md", text);
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Singular control toolkit: simulation, smoothing, time change and workload reduction checks"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    Options opt;
    std::uint64_t seed = 0;
    std::string report_dir;
    const std::vector<std::pair<std::string, std::string>> kinds = {
        {"simulate", "Monte Carlo estimate of the discounted cost under a policy"},
        {"smooth-converge", "cost of smoothed controls as the smoothing window shrinks"},
        {"rescale-check", "time-change identities on random controls and reflected paths"},
        {"reduce", "workload reduction of a Brownian control problem"},
        {"diagnose", "discounted moment decay, cost growth and control cost assumptions"},
    };
    std::vector<std::pair<std::string, CLI::App*>> subs;
    for (const auto& [name, help] : kinds) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opt.config, "experiment config (JSON)")->required();
        sub->add_option("--out", opt.out, "output directory")->capture_default_str();
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--threads", opt.threads, "worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
        subs.emplace_back(name, sub);
    }
    auto* report = app.add_subcommand("report", "summarize the manifests in a results directory");
    report->add_option("dir", report_dir, "results directory");
    report->add_option("--out", opt.out, "results directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (report->parsed()) return run_report(report_dir.empty() ? opt.out : report_dir);
        for (const auto& [name, sub] : subs) {
            if (!sub->parsed()) continue;
            if (sub->count("--seed") > 0) opt.seed = seed;
            return run_experiment(name, opt);
        }
    } catch (const Error& e) {
        const bool config = e.kind() == ErrorKind::ConfigNotFound || e.kind() == ErrorKind::ConfigInvalid;
        return fail(scc::error_class(e.kind()), e.what(), config ? 2 : 1);
    } catch (const json::exception& e) {
        return fail("CONFIG_INVALID", e.what(), 2);
    } catch (const std::exception& e) {
        return fail("INTERNAL", e.what(), 1);
    }
    return 2;
}
