#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gridsec/pipeline.hpp"

using namespace gridsec;

int main(int argc, char** argv) {
    CLI::App app{"power system security state generation, labeling and ensemble classification"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string algorithms;
    long long seed_override = -1;
    int threads = 0;

    app.add_option("--config", config_path, "configuration file (key = value sections)");
    app.add_option("--seed", seed_override, "override the master seed");
    app.add_option("--out", out_dir, "override the output directory");
    app.add_option("--algorithms", algorithms, "comma-separated algorithm list override");
    app.add_option("--threads", threads, "worker threads (results are identical at any count)");

    auto* generate = app.add_subcommand("generate", "simulate the scenario database and write dataset.csv");
    auto* train_eval = app.add_subcommand("train-eval", "train the selected classifiers and write reports");
    auto* gap = app.add_subcommand("gap-experiment", "missing-data robustness table");
    auto* curves = app.add_subcommand("curves", "staged test error and variable importance CSVs");
    auto* print_config = app.add_subcommand("print-config", "dump the effective configuration");
    auto* verify = app.add_subcommand("verify-manifest", "check all artifacts recorded in the manifest");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        PipelineConfig config = config_path.empty() ? PipelineConfig() : load_config_file(config_path);
        if (seed_override >= 0) {
            config.master_seed = static_cast<std::uint64_t>(seed_override);
            config.refresh_derived_seeds();
        }
        if (!out_dir.empty()) config.output_dir = out_dir;
        if (threads > 0) config.workers = threads;
        if (!algorithms.empty()) {
            config.algorithms.clear();
            std::string cur;
            for (char ch : algorithms + ",") {
                if (ch == ',') {
                    if (!cur.empty()) config.algorithms.push_back(algorithm_from_name(cur));
                    cur.clear();
                } else {
                    cur.push_back(ch);
                }
            }
        }

        if (generate->parsed()) cmd_generate(config);
        else if (train_eval->parsed()) cmd_train_eval(config);
        else if (gap->parsed()) cmd_gap_experiment(config);
        else if (curves->parsed()) cmd_curves(config);
        else if (print_config->parsed()) cmd_print_config(config);
        else if (verify->parsed()) cmd_verify_manifest(config);
        return 0;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const CaseParseError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    }
}
