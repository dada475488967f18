#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ehrenfest/config.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
    CLI::App app{
        "Derives closed expectation-value ODE systems for multi-mode bosonic Hamiltonians, "
        "integrates them and writes trajectory / spectral-peak CSVs."};

    std::string config_path;
    std::string out_dir;
    bool derive_only = false;
    bool check_oracle = false;
    int bch_order = -1;
    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_flag("--derive-only", derive_only, "print the derived ODE listing and exit");
    app.add_flag("--check-oracle", check_oracle,
                 "compare against dense Fock-space evolution (small instances)");
    app.add_option("--bch-order", bch_order, "also write a power-series <q0> trajectory");
    app.add_option("--out-dir", out_dir, "directory prefix for output files");

    CLI11_PARSE(app, argc, argv);

    ehrenfest::RunConfig cfg;
    try {
        cfg = ehrenfest::load_config(config_path);
    } catch (const ehrenfest::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return ehrenfest::kExitConfig;
    }

    if (derive_only) cfg.outputs.derive_only = true;
    if (check_oracle) cfg.outputs.oracle_check = true;
    if (bch_order >= 0) cfg.outputs.bch_order = bch_order;
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        auto prefix = [&](std::string& p) {
            if (!p.empty()) p = (fs::path(out_dir) / fs::path(p).filename()).string();
        };
        prefix(cfg.outputs.trajectory_csv);
        prefix(cfg.outputs.peaks_csv);
    }

    return ehrenfest::run(cfg);
}
