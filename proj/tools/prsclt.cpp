#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "cli/commands.hpp"

using prsclt::cli::Format;
using prsclt::cli::Options;

int main(int argc, char** argv) {
    CLI::App app{"Asymptotic laws and Monte Carlo checks for polygenic risk score predictions"};
    app.set_version_flag("--version", prsclt::cli::tool_version());
    app.require_subcommand(1);

    Options opts;
    std::string format;
    const std::map<std::string, Format> formats{{"json", Format::json}, {"csv", Format::csv}};

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config_path, "JSON config file")->required();
        sub->add_option("--out", opts.out, "Output path (stdout when omitted; required for simulate)");
        sub->add_option("--seed", opts.seed, "Override simulation.master_seed");
        sub->add_option("--workers", opts.workers, "Worker threads (0 = logical cores)")->check(CLI::NonNegativeNumber);
        sub->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv"}));
    };

    CLI::App* analytic = app.add_subcommand("analytic", "Evaluate the analytic Gaussian limits");
    CLI::App* simulate = app.add_subcommand("simulate", "Run a replication batch and write CSV plus manifest");
    CLI::App* verify = app.add_subcommand("verify", "Simulate and compare against configured thresholds");
    CLI::App* sweep = app.add_subcommand("sweep", "Tabulate analytic limits over a parameter grid");
    for (CLI::App* sub : {analytic, simulate, verify, sweep}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : prsclt::cli::kConfigError;
    }
    if (!format.empty()) opts.format = formats.at(format);

    if (analytic->parsed()) return prsclt::cli::cmd_analytic(opts, std::cout, std::cerr);
    if (simulate->parsed()) return prsclt::cli::cmd_simulate(opts, std::cout, std::cerr);
    if (verify->parsed()) return prsclt::cli::cmd_verify(opts, std::cout, std::cerr);
    return prsclt::cli::cmd_sweep(opts, std::cout, std::cerr);
}
