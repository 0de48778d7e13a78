#pragma once

// Experiment runners behind the command-line tool. Each runner reads its
// section of the config, does the work and returns a table for the CSV plus a
// summary for the manifest. Nothing here touches the filesystem except input
// loading.

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace scc::cli {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

struct Outcome {
    Table table;
    nlohmann::json summary = nlohmann::json::object();
    nlohmann::json inputs = nlohmann::json::object();  // resolved instance data for the manifest
    bool pass = true;
    /// Extra artifacts (file name, contents) written next to the CSV.
    std::vector<std::pair<std::string, std::string>> files;
};

struct Context {
    nlohmann::json config;
    std::filesystem::path base_dir;  // relative paths in the config resolve here
    int threads = 1;
    std::optional<std::uint64_t> seed;
};

Outcome run_simulate(const Context& ctx);
Outcome run_smooth_converge(const Context& ctx);
Outcome run_rescale_check(const Context& ctx);
Outcome run_reduce(const Context& ctx);
Outcome run_diagnose(const Context& ctx);

/// Shortest round-trip decimal form, so re-runs compare byte for byte.
std::string fmt(double x);
std::string to_csv(const Table& t);

/// Reads a JSON file; CONFIG_NOT_FOUND when missing, CONFIG_INVALID on parse errors.
nlohmann::json read_json_file(const std::filesystem::path& p);

struct ReportSection {
    std::string file;
    std::string kind;
    std::string text;
};

struct Report {
    std::vector<ReportSection> sections;
    std::vector<std::string> warnings;
    std::string render() const;
};

/// One section per readable manifest in `dir`; unreadable ones become warnings.
Report build_report(const std::filesystem::path& dir);

}  // namespace scc::cli
