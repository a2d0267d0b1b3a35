#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sdlab/cli/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"sdlab: degenerate/singular parabolic experiments"};
    std::string subcommand;
    std::string config;
    std::vector<std::string> overrides;
    app.add_option("subcommand", subcommand, "audit | hardy | solve | carleman | observability | control")->required();
    app.add_option("config", config, "JSON experiment config")->required();
    app.add_option("--set", overrides, "override a config value, e.g. --set mesh.n_cells=512");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << sdlab::cli::usage();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << sdlab::cli::usage();
        return sdlab::cli::kUsage;
    }
    return sdlab::cli::run(subcommand, config, overrides, std::cout, std::cerr);
}
