#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "ncq/cli.hpp"

namespace ncq::cli::detail {

using Issues = std::vector<std::string>;

// Reads one config object key by key, validating each value, filling in
// defaults and collecting problems under their dotted path.
class Section {
public:
    Section(const Json *src, std::string path, Issues &issues);

    double number(const std::string &key, double def, double lo, double hi, bool open_lo = false,
                  bool open_hi = false);
    long integer(const std::string &key, long def, long lo, long hi);
    bool boolean(const std::string &key, bool def);
    std::string choice(const std::string &key, const std::string &def,
                       const std::vector<std::string> &options);
    std::vector<double> numbers(const std::string &key, const std::vector<double> &def, double lo,
                                double hi, bool open_lo, bool open_hi, std::size_t min_len,
                                std::size_t max_len);
    std::vector<long> integers(const std::string &key, const std::vector<long> &def, long lo,
                               long hi, std::size_t min_len, std::size_t max_len);
    std::vector<std::string> strings(const std::string &key, const std::vector<std::string> &def,
                                     std::size_t min_len, std::size_t max_len);
    /// Raw sub-object; {} if absent. Marks the key as known.
    const Json *object(const std::string &key);
    /// Raw array; nullptr if absent. Marks the key as known.
    const Json *array(const std::string &key);

    void issue(const std::string &key, const std::string &what);
    std::string path(const std::string &key) const;
    Issues &issues() { return issues_; }
    /// Reports every key that no accessor asked for.
    void finish();

    Json out = Json::object();

private:
    const Json *src_;
    std::string path_;
    Issues &issues_;
    std::set<std::string> known_;
    const Json *get(const std::string &key);
};

struct Command {
    std::string name;
    // Validates the section and returns it normalized.
    std::function<Json(Section &)> validate;
    // Whether the normalized parameters draw random numbers.
    std::function<bool(const Json &)> needs_seed;
    std::function<std::vector<Record>(const RunConfig &)> run;
};

const std::vector<Command> &commands();
const Command *find_command(const std::string &name);

// Runs f(0..count-1) on up to `jobs` threads. Each index is handled by exactly
// one call, so results written to slot i are independent of scheduling.
void parallel_for(int count, int jobs, const std::function<void(int)> &f);

} // namespace ncq::cli::detail
