#pragma once

#include <stdexcept>
#include <string>

#include "gridsec/config.hpp"
#include "gridsec/dataset.hpp"
#include "gridsec/evaluation.hpp"

namespace gridsec {

// exit-code taxonomy: 1 usage, 2 data, 3 numeric failure
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Pipeline stages behind the CLI subcommands. Each writes its artifacts
// under config.output_dir and records them in the run manifest.

// states.csv + dataset.csv
void cmd_generate(const PipelineConfig& config);

// model_<alg>.json + report_<alg>.txt/json + comparison table
void cmd_train_eval(const PipelineConfig& config);

// gap_experiment.{txt,csv}: {% gaps, imputation seconds, test error}
void cmd_gap_experiment(const PipelineConfig& config);

// staged_error_<alg>.csv + importance_<alg>.csv
void cmd_curves(const PipelineConfig& config);

void cmd_print_config(const PipelineConfig& config);

// checks every artifact listed in the manifest (existence, size, sha256)
void cmd_verify_manifest(const PipelineConfig& config);

// helpers shared with the test suites
SplitResult load_and_split(const PipelineConfig& config);
double test_error_of(const EnsembleModel& model, const Dataset& test);

std::string sha256_file(const std::string& path);

}  // namespace gridsec
