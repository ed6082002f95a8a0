#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "ncq/cli.hpp"
#include "ncq/linalg.hpp"

using namespace ncq;
using namespace ncq::cli;

namespace {

bool mentions(const ConfigError &e, const std::string &needle) {
    return std::any_of(e.issues().begin(), e.issues().end(),
                       [&](const std::string &s) { return s.find(needle) != std::string::npos; });
}

ConfigError config_error(const std::string &text) {
    try {
        load_config_text(text);
    } catch (const ConfigError &e) {
        return e;
    }
    FAIL("config was accepted: " << text);
    return ConfigError({});
}

std::string canonical(const Report &r) { return report_json(r, false).dump(2); }

Report run_text(const std::string &text, const Overrides &o = {}) {
    return run_command(load_config_text(text, o));
}

} // namespace

TEST_CASE("config: minimal verify-car is valid") {
    const auto cfg = load_config_text(R"({"command": "verify-car", "verify-car": {"K": 3}})");
    CHECK(cfg.command == "verify-car");
    CHECK(cfg.params.at("K") == 3);
    CHECK(cfg.params.at("mu").size() == 3);
    CHECK_FALSE(cfg.seed.has_value());
    CHECK(cfg.jobs == 1);
    CHECK(cfg.format == Format::json);
}

TEST_CASE("config: out-of-range values are rejected with their path") {
    const auto e = config_error(R"({"command": "verify-car", "verify-car": {"K": 1, "mu": [1.2]}})");
    CHECK(mentions(e, "verify-car.mu"));
    const auto k = config_error(R"({"command": "verify-car", "verify-car": {"K": 9}})");
    CHECK(mentions(k, "verify-car.K"));
    const auto n = config_error(
        R"({"command": "clt-exact", "clt-exact": {"kernel": {"type": "ccr", "mu": 1.5}}})");
    CHECK(mentions(n, "clt-exact.kernel.mu"));
}

TEST_CASE("config: stochastic commands need a seed") {
    const auto e = config_error(R"({"command": "clt-mc"})");
    CHECK(mentions(e, "seed"));
    CHECK(load_config_text(R"({"command": "clt-mc", "seed": 3})").seed == 3u);
    Overrides o;
    o.seed = 11;
    CHECK(load_config_text(R"({"command": "clt-mc"})", o).seed == 11u);
    // kh-ratio draws only when random instances are requested
    CHECK_NOTHROW(load_config_text(R"({"command": "kh-ratio"})"));
    CHECK(mentions(config_error(R"({"command": "kh-ratio", "kh-ratio": {"random_instances": 2}})"),
                   "seed"));
}

TEST_CASE("config: every unknown key is named") {
    const auto e = config_error(
        R"({"command": "oh-scan", "bogus": 1, "oh-scan": {"n_maxx": 3, "n_max": 4}, "caps": {"dim": 3}})");
    CHECK(mentions(e, "bogus"));
    CHECK(mentions(e, "oh-scan.n_maxx"));
    CHECK(mentions(e, "caps.dim"));
    CHECK(e.issues().size() == 3);
}

TEST_CASE("config: malformed input and command mismatch") {
    CHECK(mentions(config_error("{not json"), "parse"));
    CHECK(mentions(config_error(R"({"command": "no-such"})"), "command"));
    Overrides o;
    o.command = "oh-scan";
    CHECK_THROWS_AS(load_config_text(R"({"command": "verify-car"})", o), ConfigError);
    CHECK_THROWS_AS(load_config_file("/nonexistent/config.json"), ConfigError);
    const auto w = config_error(R"({"command": "clt-exact", "clt-exact": {"word": ["a3"]}})");
    CHECK(mentions(w, "clt-exact.word"));
}

TEST_CASE("report: empty instance list") {
    Report r;
    r.command = "oh-scan";
    r.config = Json::object();
    const auto j = Json::parse(emit_report(r, Format::json));
    CHECK(j.at("records").empty());
    CHECK(j.at("summary").at("records") == 0);
    CHECK(j.at("summary").at("ratio_min").is_null());
    CHECK(r.failures() == 0);
}

TEST_CASE("report: JSON round trip is byte-identical") {
    const Report r = run_text(R"({"command": "rp-weights"})");
    const std::string once = emit_report(r, Format::json);
    const std::string twice = emit_report(report_from_json(Json::parse(once)), Format::json);
    CHECK(once == twice);
    CHECK(Json::parse(once).dump(2) + "\n" == once);
}

TEST_CASE("report: CSV header and rows") {
    const Report r = run_text(R"({"command": "oh-scan", "oh-scan": {"n_max": 3}})");
    const std::string csv = emit_report(r, Format::csv);
    CHECK(csv.substr(0, csv.find('\n')) == "instance_id,kind,lhs,rhs,metric,bound,pass,error,inputs");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK_THROWS_AS(write_report(r, Format::csv, "/nonexistent/dir/out.csv"), std::runtime_error);
}

TEST_CASE("run: replaying the echo reproduces the report") {
    for (const char *text :
         {R"({"command": "kh-ratio", "seed": 5, "kh-ratio": {"random_instances": 4, "scalar_mu": [0.3]}})",
          R"({"command": "clt-mc", "seed": 9, "clt-mc": {"samples": 500}})",
          R"({"command": "verify-car", "seed": 2, "verify-car": {"determinant_instances": 3}})"}) {
        const Report a = run_text(text);
        const Report b = run_command(load_config(a.config));
        CHECK(canonical(a) == canonical(b));
    }
}

TEST_CASE("run: results do not depend on --jobs") {
    for (const char *text :
         {R"({"command": "kh-ratio", "seed": 5, "kh-ratio": {"random_instances": 5}})",
          R"({"command": "clt-mc", "seed": 9, "clt-mc": {"samples": 800}})",
          R"({"command": "kh-copies", "seed": 1, "kh-copies": {"shapes": [{"n": 2, "count": 3}], "updown_instances": 2, "rechnen_instances": 1}})"}) {
        Overrides one, many;
        one.jobs = 1;
        many.jobs = 3;
        CHECK(canonical(run_text(text, one)) == canonical(run_text(text, many)));
    }
}

TEST_CASE("run: verify-car K=4 passes") {
    const Report r = run_text(R"({"command": "verify-car", "verify-car": {"K": 4}})");
    CHECK(r.failures() == 0);
    CHECK(r.records.front().kind == "car-relations");
    CHECK(*r.records.front().metric <= 1e-13);
}

TEST_CASE("run: oh-scan follows n^(1/4)") {
    const Report r = run_text(R"({"command": "oh-scan", "oh-scan": {"n_max": 8}})");
    REQUIRE(r.records.size() == 8);
    for (std::size_t i = 0; i < 8; ++i)
        CHECK(std::abs(*r.records[i].lhs - std::pow(static_cast<double>(i + 1), 0.25)) <= 1e-10);
}

TEST_CASE("run: kh-ratio scalar battery") {
    const Report r = run_text(R"({"command": "kh-ratio"})");
    CHECK(r.failures() == 0);
    for (const auto &rec : r.records) {
        CHECK(*rec.metric >= 0.70);
        CHECK(*rec.metric <= 1.42);
    }
}

TEST_CASE("run: module errors are captured per instance") {
    const std::size_t cap = linalg::dimension_cap();
    const Report r = run_text(
        R"({"command": "kh-copies", "seed": 1, "caps": {"dimension": 64},
            "kh-copies": {"shapes": [{"n": 2, "count": 1}, {"n": 6, "dM": 4, "dN": 4, "count": 1}],
                          "updown_instances": 0, "rechnen_instances": 0}})");
    REQUIRE(r.records.size() == 2);
    CHECK(r.records[0].pass);
    CHECK_FALSE(r.records[1].pass);
    CHECK_FALSE(r.records[1].error.empty());
    CHECK(r.failures() == 1);
    CHECK(linalg::dimension_cap() == cap);
}

TEST_CASE("run: growth certificate expectations") {
    CHECK(run_text(R"({"command": "growth-cert"})").failures() == 0);
    const Report bad = run_text(
        R"({"command": "growth-cert", "growth-cert": {"source": "explicit", "moments": [1, 1e30, 1, 1e300]}})");
    CHECK(bad.failures() == 1);
    CHECK(run_text(R"({"command": "growth-cert", "growth-cert": {"source": "explicit", "moments": [1, 1e30, 1, 1e300], "expect": "fails"}})")
              .failures() == 0);
}
