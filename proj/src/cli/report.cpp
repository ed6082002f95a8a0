#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ncq/cli.hpp"

namespace ncq::cli {

namespace {

Json number_or_null(const std::optional<double> &v) {
    if (!v || !std::isfinite(*v))
        return nullptr;
    return *v;
}

std::optional<double> read_number(const Json &j, const char *key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null())
        return std::nullopt;
    return it->get<double>();
}

Json summary(const Report &r) {
    std::vector<double> ratios;
    int passed = 0, errors = 0;
    for (const auto &rec : r.records) {
        passed += rec.pass ? 1 : 0;
        errors += rec.error.empty() ? 0 : 1;
        if (rec.lhs && rec.rhs && std::isfinite(*rec.lhs) && std::isfinite(*rec.rhs) && *rec.rhs != 0)
            ratios.push_back(*rec.lhs / *rec.rhs);
    }
    Json s = Json::object();
    s["records"] = r.records.size();
    s["passed"] = passed;
    s["failed"] = static_cast<int>(r.records.size()) - passed;
    s["errors"] = errors;
    if (ratios.empty()) {
        s["ratio_min"] = nullptr;
        s["ratio_max"] = nullptr;
        s["ratio_median"] = nullptr;
    } else {
        std::sort(ratios.begin(), ratios.end());
        const std::size_t n = ratios.size();
        s["ratio_min"] = ratios.front();
        s["ratio_max"] = ratios.back();
        s["ratio_median"] = n % 2 ? ratios[n / 2] : 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);
    }
    return s;
}

Json versions() {
    Json v = Json::object();
    v["ncq"] = kVersion;
    v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                 "." + std::to_string(EIGEN_MINOR_VERSION);
    v["json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                std::to_string(NLOHMANN_JSON_VERSION_PATCH);
#if defined(__clang__)
    v["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
    v["compiler"] = std::string("gcc ") + __VERSION__;
#else
    v["compiler"] = "unknown";
#endif
    return v;
}

std::string csv_field(const std::string &s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

std::string csv_number(const std::optional<double> &v) {
    const Json j = number_or_null(v);
    return j.is_null() ? "" : j.dump();
}

} // namespace

int Report::failures() const {
    return static_cast<int>(std::count_if(records.begin(), records.end(),
                                          [](const Record &r) { return !r.pass; }));
}

Json report_json(const Report &r, bool include_wall_time) {
    Json j = Json::object();
    j["command"] = r.command;
    j["config"] = r.config;
    Json recs = Json::array();
    for (const auto &rec : r.records) {
        Json e = Json::object();
        e["id"] = rec.id;
        e["kind"] = rec.kind;
        e["inputs"] = rec.inputs;
        e["lhs"] = number_or_null(rec.lhs);
        e["rhs"] = number_or_null(rec.rhs);
        e["metric"] = number_or_null(rec.metric);
        e["bound"] = number_or_null(rec.bound);
        e["pass"] = rec.pass;
        e["error"] = rec.error.empty() ? Json(nullptr) : Json(rec.error);
        recs.push_back(std::move(e));
    }
    j["records"] = std::move(recs);
    j["summary"] = summary(r);
    if (include_wall_time)
        j["wall_time_s"] = r.wall_time_s;
    j["versions"] = versions();
    return j;
}

Report report_from_json(const Json &j) {
    Report r;
    r.command = j.at("command").get<std::string>();
    r.config = j.at("config");
    for (const auto &e : j.at("records")) {
        Record rec;
        rec.id = e.at("id").get<std::string>();
        rec.kind = e.at("kind").get<std::string>();
        rec.inputs = e.at("inputs");
        rec.lhs = read_number(e, "lhs");
        rec.rhs = read_number(e, "rhs");
        rec.metric = read_number(e, "metric");
        rec.bound = read_number(e, "bound");
        rec.pass = e.at("pass").get<bool>();
        if (!e.at("error").is_null())
            rec.error = e.at("error").get<std::string>();
        r.records.push_back(std::move(rec));
    }
    if (auto it = j.find("wall_time_s"); it != j.end())
        r.wall_time_s = it->get<double>();
    return r;
}

std::string emit_report(const Report &r, Format f) {
    if (f == Format::json)
        return report_json(r).dump(2) + "\n";
    std::ostringstream s;
    for (std::size_t i = 0; i < kCsvColumns.size(); ++i)
        s << (i ? "," : "") << kCsvColumns[i];
    s << "\n";
    for (const auto &rec : r.records) {
        s << csv_field(rec.id) << "," << csv_field(rec.kind) << "," << csv_number(rec.lhs) << ","
          << csv_number(rec.rhs) << "," << csv_number(rec.metric) << "," << csv_number(rec.bound)
          << "," << (rec.pass ? "true" : "false") << "," << csv_field(rec.error) << ","
          << csv_field(rec.inputs.dump()) << "\n";
    }
    return s.str();
}

void write_report(const Report &r, Format f, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    out << emit_report(r, f);
    if (!out)
        throw std::runtime_error("failed writing '" + path + "'");
}

} // namespace ncq::cli
