#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gridsec/scenario.hpp"
#include "gridsec/security_index.hpp"

namespace gridsec {

inline constexpr int kNumClasses = 4;

struct FeatureVector {
    std::vector<double> values;
    std::vector<std::uint8_t> missing;  // parallel to values

    bool is_missing(std::size_t i) const { return !missing.empty() && missing[i] != 0; }
};

struct LabeledSample {
    FeatureVector features;
    SecurityClass label = SecurityClass::Normal;
    double si = 0.0;  // percent
};

struct Dataset {
    std::vector<std::string> schema;  // attribute names
    std::vector<LabeledSample> samples;

    std::size_t n_attributes() const { return schema.size(); }
    std::size_t size() const { return samples.size(); }
    std::vector<std::size_t> class_histogram() const;
};

// Fixed attribute ordering: bus voltages, branch P flows, branch Q flows
// (sending end), so importance rankings are comparable across runs.
std::vector<std::string> feature_schema(const NetworkCase& grid);

// Features of one solved state in schema order.
FeatureVector extract_features(const SystemState& state, const NetworkCase& grid);

// All records of a generation run turned into labeled samples. Non-converged
// records contribute prefault quantities (outaged line zeroed) and the
// synthetic collapse SI.
Dataset build_dataset(const GenerateResult& result, const NetworkCase& grid, const SecurityWeights& weights);

struct SplitResult {
    Dataset train;
    Dataset test;
    std::vector<std::string> diagnostics;
};

// Stratified random partition; falls back to unstratified when a class has
// fewer than 2 samples.
SplitResult split(const Dataset& data, double test_fraction, std::uint64_t seed);

// Marks exactly round(gap_fraction * cells) feature cells missing, uniformly
// over (sample, attribute) pairs. Labels are never touched.
Dataset inject_gaps(const Dataset& data, double gap_fraction, std::uint64_t seed);

// Replaces missing cells with per-attribute medians computed on `reference`
// (the training set). Output has an empty missing mask.
Dataset impute(const Dataset& data, const Dataset& reference);

void write_dataset_csv(std::ostream& out, const Dataset& data);
Dataset read_dataset_csv(std::istream& in);

}  // namespace gridsec
