#pragma once

// Batch driver: validated JSON configs in, structured reports out.
//
//   ncq <command> --config <path> [--seed N] [--jobs N] [--out <path>] [--format json|csv]
//
// The report echoes the normalized config (command, seed, caps and the
// command section with defaults filled in); replaying the echo reproduces
// every record bit-for-bit.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ncq/errors.hpp"

namespace ncq::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char *kVersion = "0.1.0";

/// All problems found in a config, one entry per offending field.
class ConfigError : public DomainError {
public:
    explicit ConfigError(std::vector<std::string> issues);
    const std::vector<std::string> &issues() const { return issues_; }

private:
    std::vector<std::string> issues_;
};

enum class Format { json, csv };

struct RunConfig {
    std::string command;
    std::optional<std::uint64_t> seed;
    std::size_t dimension_cap = 0;
    int jobs = 1;
    std::string out; // empty: stdout
    Format format = Format::json;
    Json params;     // command section with defaults filled in

    /// Re-runnable config tree. Excludes jobs, out and format, which do not
    /// affect the records.
    Json echo() const;
};

struct Overrides {
    std::optional<std::string> command;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<std::string> out;
    std::optional<std::string> format;
};

const std::vector<std::string> &command_names();

RunConfig load_config(const Json &tree, const Overrides &o = {});
RunConfig load_config_text(const std::string &text, const Overrides &o = {});
RunConfig load_config_file(const std::string &path, const Overrides &o = {});

struct Record {
    std::string id;
    std::string kind;
    Json inputs = Json::object();
    std::optional<double> lhs, rhs, metric, bound;
    bool pass = false;
    std::string error;
};

struct Report {
    std::string command;
    Json config;
    std::vector<Record> records;
    double wall_time_s = 0;

    int failures() const;
};

Report run_command(const RunConfig &cfg);

Json report_json(const Report &r, bool include_wall_time = true);
Report report_from_json(const Json &j);

inline const std::vector<std::string> kCsvColumns{"instance_id", "kind", "lhs",   "rhs", "metric",
                                                  "bound",       "pass", "error", "inputs"};

std::string emit_report(const Report &r, Format f);
/// Throws std::runtime_error if the path cannot be written.
void write_report(const Report &r, Format f, const std::string &path);

} // namespace ncq::cli
