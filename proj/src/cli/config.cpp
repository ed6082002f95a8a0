#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "ncq/linalg.hpp"
#include "schema.hpp"

namespace ncq::cli {

namespace {

std::string join_issues(const std::vector<std::string> &issues) {
    std::string s = "invalid config:";
    for (const auto &i : issues)
        s += "\n  " + i;
    return s;
}

constexpr std::size_t kMaxDimensionCap = std::size_t{1} << 16;

} // namespace

ConfigError::ConfigError(std::vector<std::string> issues)
    : DomainError(join_issues(issues)), issues_(std::move(issues)) {}

namespace detail {

Section::Section(const Json *src, std::string path, Issues &issues)
    : src_(src), path_(std::move(path)), issues_(issues) {
    if (src_ && !src_->is_object()) {
        issues_.push_back(path_ + ": expected an object");
        src_ = nullptr;
    }
}

std::string Section::path(const std::string &key) const {
    return path_.empty() ? key : path_ + "." + key;
}

void Section::issue(const std::string &key, const std::string &what) {
    issues_.push_back(path(key) + ": " + what);
}

const Json *Section::get(const std::string &key) {
    known_.insert(key);
    if (!src_)
        return nullptr;
    auto it = src_->find(key);
    if (it == src_->end() || it->is_null())
        return nullptr;
    return &*it;
}

namespace {

std::string range_text(double lo, double hi, bool open_lo, bool open_hi) {
    std::ostringstream s;
    s << (open_lo ? "(" : "[") << lo << ", " << hi << (open_hi ? ")" : "]");
    return s.str();
}

bool in_range(double v, double lo, double hi, bool open_lo, bool open_hi) {
    if (!std::isfinite(v))
        return false;
    if (open_lo ? !(v > lo) : !(v >= lo))
        return false;
    return open_hi ? v < hi : v <= hi;
}

} // namespace

double Section::number(const std::string &key, double def, double lo, double hi, bool open_lo,
                       bool open_hi) {
    double v = def;
    if (const Json *j = get(key)) {
        if (!j->is_number())
            issue(key, "expected a number");
        else if (!in_range(j->get<double>(), lo, hi, open_lo, open_hi))
            issue(key, "value " + j->dump() + " outside " + range_text(lo, hi, open_lo, open_hi));
        else
            v = j->get<double>();
    }
    out[key] = v;
    return v;
}

long Section::integer(const std::string &key, long def, long lo, long hi) {
    long v = def;
    if (const Json *j = get(key)) {
        if (!j->is_number_integer())
            issue(key, "expected an integer");
        else if (j->get<long>() < lo || j->get<long>() > hi)
            issue(key, "value " + j->dump() + " outside [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
        else
            v = j->get<long>();
    }
    out[key] = v;
    return v;
}

bool Section::boolean(const std::string &key, bool def) {
    bool v = def;
    if (const Json *j = get(key)) {
        if (!j->is_boolean())
            issue(key, "expected true or false");
        else
            v = j->get<bool>();
    }
    out[key] = v;
    return v;
}

std::string Section::choice(const std::string &key, const std::string &def,
                            const std::vector<std::string> &options) {
    std::string v = def;
    if (const Json *j = get(key)) {
        if (!j->is_string() ||
            std::find(options.begin(), options.end(), j->get<std::string>()) == options.end()) {
            std::string opts;
            for (const auto &o : options)
                opts += (opts.empty() ? "" : ", ") + o;
            issue(key, "expected one of " + opts);
        } else {
            v = j->get<std::string>();
        }
    }
    out[key] = v;
    return v;
}

std::vector<double> Section::numbers(const std::string &key, const std::vector<double> &def,
                                     double lo, double hi, bool open_lo, bool open_hi,
                                     std::size_t min_len, std::size_t max_len) {
    std::vector<double> v = def;
    if (const Json *j = get(key)) {
        if (!j->is_array()) {
            issue(key, "expected a list of numbers");
        } else if (j->size() < min_len || j->size() > max_len) {
            issue(key, "length " + std::to_string(j->size()) + " outside [" +
                           std::to_string(min_len) + ", " + std::to_string(max_len) + "]");
        } else {
            std::vector<double> got;
            bool ok = true;
            for (std::size_t i = 0; i < j->size(); ++i) {
                const auto &e = (*j)[i];
                const std::string p = key + "[" + std::to_string(i) + "]";
                if (!e.is_number()) {
                    issue(p, "expected a number");
                    ok = false;
                } else if (!in_range(e.get<double>(), lo, hi, open_lo, open_hi)) {
                    issue(p, "value " + e.dump() + " outside " + range_text(lo, hi, open_lo, open_hi));
                    ok = false;
                } else {
                    got.push_back(e.get<double>());
                }
            }
            if (ok)
                v = got;
        }
    }
    out[key] = v;
    return v;
}

std::vector<long> Section::integers(const std::string &key, const std::vector<long> &def, long lo,
                                    long hi, std::size_t min_len, std::size_t max_len) {
    std::vector<long> v = def;
    if (const Json *j = get(key)) {
        if (!j->is_array()) {
            issue(key, "expected a list of integers");
        } else if (j->size() < min_len || j->size() > max_len) {
            issue(key, "length " + std::to_string(j->size()) + " outside [" +
                           std::to_string(min_len) + ", " + std::to_string(max_len) + "]");
        } else {
            std::vector<long> got;
            bool ok = true;
            for (std::size_t i = 0; i < j->size(); ++i) {
                const auto &e = (*j)[i];
                const std::string p = key + "[" + std::to_string(i) + "]";
                if (!e.is_number_integer() || e.get<long>() < lo || e.get<long>() > hi) {
                    issue(p, "expected an integer in [" + std::to_string(lo) + ", " +
                                 std::to_string(hi) + "]");
                    ok = false;
                } else {
                    got.push_back(e.get<long>());
                }
            }
            if (ok)
                v = got;
        }
    }
    out[key] = v;
    return v;
}

std::vector<std::string> Section::strings(const std::string &key,
                                          const std::vector<std::string> &def,
                                          std::size_t min_len, std::size_t max_len) {
    std::vector<std::string> v = def;
    if (const Json *j = get(key)) {
        if (!j->is_array() || j->size() < min_len || j->size() > max_len) {
            issue(key, "expected a list of " + std::to_string(min_len) + " to " +
                           std::to_string(max_len) + " strings");
        } else {
            std::vector<std::string> got;
            for (std::size_t i = 0; i < j->size(); ++i) {
                if (!(*j)[i].is_string())
                    issue(key + "[" + std::to_string(i) + "]", "expected a string");
                else
                    got.push_back((*j)[i].get<std::string>());
            }
            if (got.size() == j->size())
                v = got;
        }
    }
    out[key] = v;
    return v;
}

const Json *Section::object(const std::string &key) {
    static const Json empty = Json::object();
    const Json *j = get(key);
    if (!j)
        return &empty;
    if (!j->is_object()) {
        issue(key, "expected an object");
        return &empty;
    }
    return j;
}

const Json *Section::array(const std::string &key) {
    const Json *j = get(key);
    if (j && !j->is_array()) {
        issue(key, "expected a list");
        return nullptr;
    }
    return j;
}

void Section::finish() {
    if (!src_)
        return;
    for (auto it = src_->begin(); it != src_->end(); ++it)
        if (!known_.count(it.key()))
            issues_.push_back(path(it.key()) + ": unknown key");
}

const Command *find_command(const std::string &name) {
    for (const auto &c : commands())
        if (c.name == name)
            return &c;
    return nullptr;
}

void parallel_for(int count, int jobs, const std::function<void(int)> &f) {
    jobs = std::max(1, std::min(jobs, count));
    if (jobs == 1) {
        for (int i = 0; i < count; ++i)
            f(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t)
        pool.emplace_back([&, t] {
            try {
                for (int i = t; i < count; i += jobs)
                    f(i);
            } catch (...) {
                errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
        });
    for (auto &th : pool)
        th.join();
    for (auto &e : errors)
        if (e)
            std::rethrow_exception(e);
}

} // namespace detail

const std::vector<std::string> &command_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto &c : detail::commands())
            n.push_back(c.name);
        return n;
    }();
    return names;
}

Json RunConfig::echo() const {
    Json j = Json::object();
    j["command"] = command;
    if (seed)
        j["seed"] = *seed;
    j["caps"] = {{"dimension", dimension_cap}};
    j[command] = params;
    return j;
}

RunConfig load_config(const Json &tree, const Overrides &o) {
    detail::Issues issues;
    if (!tree.is_object())
        throw ConfigError({"config: expected an object at the top level"});
    RunConfig cfg;

    std::string command;
    if (auto it = tree.find("command"); it != tree.end()) {
        if (!it->is_string())
            issues.push_back("command: expected a string");
        else
            command = it->get<std::string>();
    }
    if (o.command) {
        if (!command.empty() && command != *o.command)
            issues.push_back("command: config says '" + command + "' but '" + *o.command +
                             "' was requested");
        command = *o.command;
    }
    const detail::Command *cmd = detail::find_command(command);
    if (command.empty())
        issues.push_back("command: missing");
    else if (!cmd)
        issues.push_back("command: unknown command '" + command + "'");

    for (auto it = tree.begin(); it != tree.end(); ++it) {
        const auto &k = it.key();
        if (k == "command" || k == "seed" || k == "caps" || k == "jobs" || k == "out" ||
            k == "format")
            continue;
        if (!detail::find_command(k))
            issues.push_back(k + ": unknown key");
        else if (!it->is_object())
            issues.push_back(k + ": expected an object");
    }

    if (auto it = tree.find("seed"); it != tree.end() && !it->is_null()) {
        if (it->is_number_unsigned())
            cfg.seed = it->get<std::uint64_t>();
        else
            issues.push_back("seed: expected a non-negative 64-bit integer");
    }
    if (o.seed)
        cfg.seed = *o.seed;

    detail::Section top(&tree, "", issues);
    {
        detail::Section caps(top.object("caps"), "caps", issues);
        cfg.dimension_cap = static_cast<std::size_t>(
            caps.integer("dimension", static_cast<long>(linalg::dimension_cap()), 1,
                         static_cast<long>(kMaxDimensionCap)));
        caps.finish();
    }
    cfg.jobs = static_cast<int>(top.integer("jobs", 1, 1, 256));
    if (o.jobs) {
        if (*o.jobs < 1 || *o.jobs > 256)
            issues.push_back("jobs: value " + std::to_string(*o.jobs) + " outside [1, 256]");
        else
            cfg.jobs = *o.jobs;
    }
    std::string format = top.choice("format", "json", {"json", "csv"});
    if (o.format) {
        if (*o.format != "json" && *o.format != "csv")
            issues.push_back("format: expected json or csv, got '" + *o.format + "'");
        else
            format = *o.format;
    }
    cfg.format = format == "csv" ? Format::csv : Format::json;
    if (auto it = tree.find("out"); it != tree.end() && !it->is_null()) {
        if (!it->is_string())
            issues.push_back("out: expected a path string");
        else
            cfg.out = it->get<std::string>();
    }
    if (o.out)
        cfg.out = *o.out;

    if (cmd) {
        cfg.command = command;
        const Json *sec = nullptr;
        if (auto it = tree.find(command); it != tree.end() && it->is_object())
            sec = &*it;
        detail::Section s(sec, command, issues);
        cfg.params = cmd->validate(s);
        s.finish();
        if (issues.empty() && cmd->needs_seed(cfg.params) && !cfg.seed)
            issues.push_back("seed: required for '" + command + "' with these parameters");
    }
    if (!issues.empty())
        throw ConfigError(issues);
    return cfg;
}

RunConfig load_config_text(const std::string &text, const Overrides &o) {
    Json tree;
    try {
        tree = Json::parse(text);
    } catch (const Json::parse_error &e) {
        throw ConfigError({std::string("config: not valid JSON: ") + e.what()});
    }
    return load_config(tree, o);
}

RunConfig load_config_file(const std::string &path, const Overrides &o) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError({"config: cannot read '" + path + "'"});
    std::ostringstream s;
    s << in.rdbuf();
    return load_config_text(s.str(), o);
}

} // namespace ncq::cli
