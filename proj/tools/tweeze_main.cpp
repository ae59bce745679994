#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "tweeze/config.hpp"
#include "tweeze/errors.hpp"
#include "tweeze/runner.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    long long seed = -1;
    bool seed_set = false;
    bool no_trace = false;
    bool quiet = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "run configuration file")->required();
    cmd->add_option("--out", flags.out_dir, "output directory (overrides output_dir)");
    cmd->add_option("--seed", flags.seed, "seed override")->each([&flags](const std::string&) {
        flags.seed_set = true;
    });
    cmd->add_flag("--no-trace", flags.no_trace, "skip trajectory export");
    cmd->add_flag("--quiet", flags.quiet, "suppress progress output");
}

tweeze::ExperimentConfig load_config(const CommonFlags& flags) {
    tweeze::ExperimentConfig config = tweeze::parse_config_file(flags.config_path);
    if (flags.seed_set) config.seed = static_cast<std::uint64_t>(flags.seed);
    if (!flags.out_dir.empty()) config.output_dir = flags.out_dir;
    if (flags.no_trace) config.no_trace = true;
    if (flags.quiet) config.quiet = true;
    config.validate();
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Inversion-free direct-path editing over analytic denoisers"};
    app.require_subcommand(1);

    CommonFlags edit_flags, sweep_flags, bench_flags, verify_flags, plot_flags;
    CLI::App* edit = app.add_subcommand("edit", "run one edit and export its trajectory");
    CLI::App* sweep = app.add_subcommand("sweep", "grid over regularization steps and strength");
    CLI::App* bench = app.add_subcommand("bench", "compare against the DDIM inversion baseline");
    CLI::App* verify = app.add_subcommand("verify", "gradient and posterior-mean oracle checks");
    CLI::App* plot = app.add_subcommand("plot", "render trajectories (SVG) or grids (PGM)");
    add_common_flags(edit, edit_flags);
    add_common_flags(sweep, sweep_flags);
    add_common_flags(bench, bench_flags);
    add_common_flags(verify, verify_flags);
    add_common_flags(plot, plot_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (edit->parsed()) return tweeze::run_edit(load_config(edit_flags), std::cout);
        if (sweep->parsed()) return tweeze::run_sweep(load_config(sweep_flags), std::cout);
        if (bench->parsed()) return tweeze::run_bench(load_config(bench_flags), std::cout);
        if (verify->parsed()) return tweeze::run_verify(load_config(verify_flags), std::cout);
        if (plot->parsed()) return tweeze::run_plot(load_config(plot_flags), std::cout);
    } catch (const tweeze::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return tweeze::kExitConfigError;
    } catch (const tweeze::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return tweeze::kExitIoError;
    } catch (const tweeze::VerificationError& e) {
        std::cerr << "verification failure: " << e.what() << "\n";
        return tweeze::kExitVerificationFailure;
    } catch (const tweeze::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return tweeze::kExitNumericError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
