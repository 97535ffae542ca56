#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gridsec/ensemble.hpp"
#include "gridsec/scenario.hpp"

namespace gridsec {

// Whole-pipeline configuration. Parsed from a flat key=value file with
// [section] headers; every knob has an embedded default (dump with the
// print-config command). One master seed feeds every random stage.
struct PipelineConfig {
    std::string case_source = "builtin:ieee118";  // builtin:<name> or a path
    std::uint64_t master_seed = 118118;
    int workers = 4;

    ScenarioConfig scenario;  // scenario.master_seed is derived
    LoadModel load_model;
    SolverSettings solver;
    SecurityWeights weights;

    double test_fraction = 0.1996;
    std::vector<EnsembleAlgorithm> algorithms = {EnsembleAlgorithm::SingleJ48,   EnsembleAlgorithm::SingleCart,
                                                 EnsembleAlgorithm::BaggedCart,  EnsembleAlgorithm::RandomForest,
                                                 EnsembleAlgorithm::ExtraTrees,  EnsembleAlgorithm::Sgb};
    std::map<EnsembleAlgorithm, EnsembleParams> ensemble;  // per-algorithm knobs

    std::vector<double> gap_fractions = {0.1, 0.3, 0.5};
    std::string output_dir = "out";

    PipelineConfig();  // fills per-algorithm defaults and derived seeds

    // seeds derived from the master seed (stable role tags)
    std::uint64_t scenario_seed() const;
    std::uint64_t split_seed() const;
    std::uint64_t training_seed(EnsembleAlgorithm a) const;
    std::uint64_t gap_seed(std::size_t fraction_index) const;

    void refresh_derived_seeds();
};

PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config_file(const std::string& path);
std::string dump_config(const PipelineConfig& config);

NetworkCase load_case_source(const std::string& source);

}  // namespace gridsec
