// Copyright 2026 The pcsq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// pcsq <command> --config <path> [--set key=value]... [--out <dir>]

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pcsq/cli.hpp"

int main(int argc, char **argv) {
    CLI::App app{"Squared non-monotonic probabilistic circuits"};
    app.require_subcommand(1, 1);
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir = "out";
    for (const auto &name : pcsq::cli::commands()) {
        auto *sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "INI configuration file");
        sub->add_option("--set", overrides, "override as key=value (repeatable)");
        sub->add_option("--out", out_dir, "output directory");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    pcsq::Config cfg;
    try {
        if (!config_path.empty()) cfg.load_file(config_path);
        for (const auto &o : overrides) cfg.set(o);
    } catch (const pcsq::Error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    }
    return pcsq::cli::run_guarded(command, cfg, out_dir, std::cout, std::cerr);
}
