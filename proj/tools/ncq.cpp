#include <iostream>

#include <CLI11.hpp>

#include "ncq/cli.hpp"

int main(int argc, char **argv) {
    using namespace ncq::cli;

    CLI::App app{"Quasi-free moment and Khintchine verification suites"};
    app.set_version_flag("--version", kVersion);
    std::string command, config_path;
    Overrides o;
    app.add_option("command", command, "Suite to run")
        ->required()
        ->check(CLI::IsMember(command_names()));
    app.add_option("--config", config_path, "JSON config file")->required();
    app.add_option("--seed", o.seed, "Run seed (overrides the config)");
    app.add_option("--jobs", o.jobs, "Worker threads")->check(CLI::Range(1, 256));
    app.add_option("--out", o.out, "Report path (default stdout)");
    app.add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
    CLI11_PARSE(app, argc, argv);
    o.command = command;

    RunConfig cfg;
    try {
        cfg = load_config_file(config_path, o);
    } catch (const ConfigError &e) {
        std::cerr << "invalid config:\n";
        for (const auto &i : e.issues())
            std::cerr << "  " << i << "\n";
        return 2;
    }

    const Report r = run_command(cfg);
    try {
        if (cfg.out.empty())
            std::cout << emit_report(r, cfg.format);
        else
            write_report(r, cfg.format, cfg.out);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    const int failed = r.failures();
    if (failed > 0)
        std::cerr << failed << " of " << r.records.size() << " records failed\n";
    return failed == 0 ? 0 : 1;
}
