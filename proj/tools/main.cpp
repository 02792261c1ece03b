#include <cstdint>
#include <limits>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "ergokit/config.hpp"
#include "ergokit/errors.hpp"
#include "ergokit/runner.hpp"

namespace {

// <config> is a file path or the name of a bundled preset
ergo::ExperimentConfig resolve_config(const std::string& arg) {
    if (std::filesystem::exists(arg)) return ergo::load_config_file(arg);
    if (ergo::is_preset(arg)) return ergo::parse_config_text(ergo::preset_text(arg));
    throw ergo::config_error("no such config file or preset: " + arg);
}

int execute(const std::string& config_arg, bool fuzz_mode, const ergo::RunOptions& opt) {
    try {
        ergo::ExperimentConfig cfg = resolve_config(config_arg);
        ergo::RunResult res =
            fuzz_mode ? ergo::run_fuzz(cfg, opt) : ergo::run_experiment(cfg, opt);
        std::cout << res.summary_text;
        if (res.outcome == "error") std::cerr << "error: config rejected" << "\n";
        return res.exit_code;
    } catch (const ergo::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic averaging experiments over group actions"};
    app.require_subcommand(0, 1);

    std::string config_arg;
    ergo::RunOptions opt;
    std::uint64_t seed = 0;
    bool list_presets = false;

    app.add_flag("--list-presets", list_presets, "list the bundled presets and exit");
    CLI::Option* out_opt =
        app.add_option("--out", opt.out_dir, "output directory (overrides the config)");
    CLI::Option* seed_opt =
        app.add_option("--seed", seed, "seed override for randomized runs");
    app.add_option("--threads", opt.threads, "worker threads (averages stay single-pass)")
        ->check(CLI::Range(std::uint32_t{1}, std::numeric_limits<std::uint32_t>::max()));

    CLI::App* run = app.add_subcommand("run", "execute the experiment a config describes");
    run->add_option("config", config_arg, "config file or preset name")->required();
    run->fallthrough();

    CLI::App* fuzz = app.add_subcommand("fuzz", "run the randomized inequality trials");
    fuzz->add_option("config", config_arg, "config file or preset name")->required();
    fuzz->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (list_presets) {
        for (const std::string& name : ergo::preset_names()) std::cout << name << "\n";
        return 0;
    }
    (void)out_opt;
    if (seed_opt->count() > 0) opt.seed = seed;

    if (run->parsed()) return execute(config_arg, false, opt);
    if (fuzz->parsed()) return execute(config_arg, true, opt);

    std::cerr << "error: expected a subcommand (run or fuzz) or --list-presets\n";
    std::cerr << app.help();
    return 2;
}
