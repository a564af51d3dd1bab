// ncsim: batch runner for the moduli-perturbation experiments.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nc/parallel.hpp"
#include "nc/verify.hpp"

namespace {

struct Common {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_given = false;
    unsigned threads = 0;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, Common& c)
{
    sub->add_option("config", c.config_path, "configuration file (key = value)")->required();
    sub->add_option("--seed", c.seed, "override the configured 64-bit seed")
        ->each([&c](const std::string&) { c.seed_given = true; });
    sub->add_option("--out-dir", c.out_dir, "directory for CSV and JSON artifacts");
    sub->add_option("--threads", c.threads, "worker threads (0: hardware concurrency)");
    sub->add_option("--override", c.overrides, "key=value, repeatable");
}

nc::Config load(const Common& c)
{
    nc::Config cfg = nc::Config::load(c.config_path);
    for (const auto& o : c.overrides) cfg.apply_override(o);
    if (c.seed_given) cfg.set("seed", std::to_string(c.seed));
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"ncsim: stochastic moduli-perturbation experiments"};
    app.require_subcommand(1);
    Common run_opts, verify_opts;
    CLI::App* run = app.add_subcommand("run", "run an experiment and write its artifacts");
    CLI::App* ver = app.add_subcommand("verify", "run the experiment's checks; nonzero exit on failure");
    CLI::App* list = app.add_subcommand("list-experiments", "print the available experiments");
    add_common(run, run_opts);
    add_common(ver, verify_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (list->parsed()) {
            for (const auto& name : nc::experiment_names()) std::cout << name << '\n';
            return 0;
        }
        const bool is_run = run->parsed();
        const Common& opts = is_run ? run_opts : verify_opts;
        nc::set_thread_count(opts.threads);
        const nc::Config cfg = load(opts);
        if (is_run) {
            const nc::RunResult r = nc::run_experiment(cfg);
            for (const auto& p : nc::write_artifacts(r, cfg, opts.out_dir)) std::cout << "wrote " << p << '\n';
            return 0;
        }
        const nc::VerifyOutcome v = nc::verify(cfg, std::cout);
        nc::write_artifacts(v.result, cfg, opts.out_dir);
        return v.exit_code;
    } catch (const nc::config_error& e) {
        std::cerr << nc::error_json("config_error", e.what(), e.key()) << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << nc::error_json("invalid_argument", e.what()) << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << nc::error_json("runtime_error", e.what()) << '\n';
        return 3;
    }
}
