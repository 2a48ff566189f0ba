#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "plapvar/config.hpp"
#include "plapvar/run.hpp"

namespace {

std::string slurp(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw plapvar::Error("cli", "read_config", "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void print_config_error(const plapvar::ConfigError &e) {
    std::cerr << "error: cli::parse_config: " << e.errors().size() << " problem(s)\n";
    for (const auto &m : e.errors()) std::cerr << "  " << m << "\n";
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"p-Laplacian variational toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    bool quiet = false;
    auto *run = app.add_subcommand("run", "run the pipeline described by a config file");
    run->add_option("config", config_path, "config file")->required();
    auto *out_opt = run->add_option("--out", out_dir, "output directory (overrides the config)");
    auto *seed_opt = run->add_option("--seed", seed, "random seed (overrides the config)");
    run->add_flag("--quiet", quiet, "suppress progress output");

    std::string check_path;
    auto *check = app.add_subcommand("check-config", "validate a config file and print the resolved keys");
    check->add_option("file", check_path, "config file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*check) {
            const auto cfg = plapvar::parse_config(slurp(check_path));
            for (const auto &[k, v] : cfg.resolved) std::cout << k << " = " << v << "\n";
            return 0;
        }
        auto cfg = plapvar::parse_config(slurp(config_path));
        if (*out_opt) cfg.output = out_dir;
        if (*seed_opt) cfg.seed = seed;
        const auto status = plapvar::run(cfg, quiet ? nullptr : &std::cerr);
        if (!quiet) std::cerr << "wrote " << cfg.output << "\n";
        return static_cast<int>(status);
    } catch (const plapvar::ConfigError &e) {
        print_config_error(e);
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
