#include "instascope/config.hpp"
#include "instascope/experiments.hpp"

#include <exception>
#include <iostream>

int main(int argc, char** argv) {
    const auto cmd = instascope::parse_command_line(argc, argv);
    if (!cmd.config) {
        (cmd.exit_code == 0 ? std::cout : std::cerr) << cmd.message << "\n";
        return cmd.exit_code;
    }
    try {
        return instascope::run_experiment(*cmd.config, std::cerr);
    } catch (const instascope::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
