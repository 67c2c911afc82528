// nplap: command-line driver for the pointwise suites, the grid solver, the
// estimate sweeps and the radial counterexample.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "nplap/config.hpp"
#include "nplap/dispatch.hpp"

namespace {

std::string read_file(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw nplap::ConfigError({"--config: cannot open " + path});
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void report_config_error(const nplap::ConfigError& e)
{
    nlohmann::json j{{"status", "config_error"}, {"violations", e.violations()}};
    std::cerr << j.dump() << "\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Regularized normalized p-Laplacian experiments"};
    app.set_help_flag("--help", "print this help message and exit");
    std::string subcommand, config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out;
    std::optional<double> h;
    app.add_option("subcommand", subcommand, "check-point | solve | sweep | counterexample | holder");
    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--out", out, "output directory");
    app.add_option("--threads", threads, "worker threads");
    app.add_option("--h", h, "grid spacing");
    CLI11_PARSE(app, argc, argv);

    try {
        auto cfg = nplap::parse_config(config_path.empty() ? std::string("{}") : read_file(config_path));
        if (!subcommand.empty()) {
            if (!cfg.subcommand.empty() && cfg.subcommand != subcommand)
                throw nplap::ConfigError({"subcommand: command line says \"" + subcommand + "\" but config says \"" +
                                          cfg.subcommand + "\""});
            cfg.subcommand = subcommand;
        }
        if (cfg.subcommand.empty()) throw nplap::ConfigError({"subcommand: none given"});
        const auto& names = nplap::subcommand_names();
        if (std::find(names.begin(), names.end(), cfg.subcommand) == names.end())
            throw nplap::ConfigError({"subcommand: unknown \"" + cfg.subcommand + "\""});
        nplap::apply_overrides(cfg, {seed, threads, out, h});
        return nplap::dispatch(cfg);
    } catch (const nplap::ConfigError& e) {
        report_config_error(e);
        return nplap::kExitConfig;
    }
}
