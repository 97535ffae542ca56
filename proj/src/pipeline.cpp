#include "gridsec/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "gridsec/numeric_io.hpp"

namespace gridsec {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << content;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// run manifest: config snapshot, seeds, artifacts with hashes, wall times.
// Times are informational and machine-dependent; they are never asserted.
class Manifest {
public:
    explicit Manifest(const PipelineConfig& config) : dir_(config.output_dir) {
        path_ = fs::path(dir_) / "manifest.json";
        if (fs::exists(path_)) {
            j_ = json::parse(read_file(path_));
        } else {
            j_["format"] = "gridsec-manifest";
            j_["version"] = 1;
            j_["artifacts"] = json::object();
            j_["stage_seconds"] = json::object();
        }
        j_["master_seed"] = config.master_seed;
        j_["config"] = dump_config(config);
    }

    void add_artifact(const fs::path& p) {
        json entry;
        entry["bytes"] = fs::file_size(p);
        entry["sha256"] = sha256_file(p.string());
        j_["artifacts"][p.filename().string()] = entry;
    }

    void add_stage_time(const std::string& stage, double seconds) { j_["stage_seconds"][stage] = seconds; }

    void save() { write_file(path_, j_.dump(1) + "\n"); }

private:
    std::string dir_;
    fs::path path_;
    json j_;
};

Dataset load_dataset(const PipelineConfig& config) {
    const fs::path p = fs::path(config.output_dir) / "dataset.csv";
    std::ifstream in(p);
    if (!in) throw DataError("dataset not found at '" + p.string() + "' (run generate first)");
    return read_dataset_csv(in);
}

std::vector<SecurityClass> predict_all(const EnsembleModel& model, const Dataset& data) {
    std::vector<SecurityClass> out;
    out.reserve(data.size());
    for (const auto& s : data.samples) out.push_back(predict_ensemble(model, s.features).label);
    return out;
}

json report_to_json(const EvaluationReport& rep) {
    json j;
    j["class_order"] = ConfusionMatrix::class_names();
    j["confusion_matrix"] = json::array();
    for (int r = 0; r < ConfusionMatrix::kClasses; ++r) {
        json row = json::array();
        for (int c = 0; c < ConfusionMatrix::kClasses; ++c)
            row.push_back(rep.matrix.counts[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
        j["confusion_matrix"].push_back(row);
    }
    j["accuracy"] = rep.observed_accuracy;
    j["expected_accuracy"] = rep.expected_accuracy;
    j["kappa"] = rep.kappa;
    j["per_class_error"] = rep.per_class_error;
    return j;
}

}  // namespace

std::string sha256_file(const std::string& path) {
    const std::string content = read_file(path);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(content.data(), content.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

SplitResult load_and_split(const PipelineConfig& config) {
    Dataset data = load_dataset(config);
    auto result = split(data, config.test_fraction, config.split_seed());
    for (const auto& d : result.diagnostics) std::cerr << "split: " << d << "\n";
    return result;
}

double test_error_of(const EnsembleModel& model, const Dataset& test) {
    int miss = 0;
    for (const auto& s : test.samples)
        if (predict_ensemble(model, s.features).label != s.label) ++miss;
    return static_cast<double>(miss) / static_cast<double>(test.size());
}

void cmd_generate(const PipelineConfig& config) {
    NetworkCase grid = load_case_source(config.case_source);
    Manifest manifest(config);

    const auto t0 = std::chrono::steady_clock::now();
    GenerateResult result;
    try {
        result = generate_states(grid, config.scenario, config.load_model, config.solver, config.workers);
    } catch (const std::runtime_error& e) {
        throw NumericError(e.what());
    }
    const double gen_seconds = seconds_since(t0);

    for (const auto& d : result.diagnostics) std::cerr << "generate: " << d << "\n";

    const fs::path states_path = fs::path(config.output_dir) / "states.csv";
    {
        std::ostringstream buf;
        write_states_csv(buf, result, grid, config.weights);
        write_file(states_path, buf.str());
    }

    Dataset data = build_dataset(result, grid, config.weights);
    const fs::path dataset_path = fs::path(config.output_dir) / "dataset.csv";
    {
        std::ostringstream buf;
        write_dataset_csv(buf, data);
        write_file(dataset_path, buf.str());
    }

    const auto hist = data.class_histogram();
    std::cout << "generated " << data.size() << " states (" << result.records.size() << " records, "
              << result.diagnostics.size() << " diagnostics) in " << format_fixed(gen_seconds, 1) << " s\n";
    for (int k = 0; k < kNumClasses; ++k)
        std::cout << "  " << class_name(static_cast<SecurityClass>(k)) << ": " << hist[static_cast<std::size_t>(k)]
                  << "\n";

    manifest.add_stage_time("generate", gen_seconds);
    manifest.add_artifact(states_path);
    manifest.add_artifact(dataset_path);
    manifest.save();
}

void cmd_train_eval(const PipelineConfig& config) {
    if (config.algorithms.empty()) throw UsageError("no algorithms selected");
    Manifest manifest(config);
    auto splits = load_and_split(config);
    std::cout << "train " << splits.train.size() << " / test " << splits.test.size() << " samples\n";

    std::vector<std::string> names;
    std::vector<double> accuracies, kappas;

    for (EnsembleAlgorithm alg : config.algorithms) {
        const auto t0 = std::chrono::steady_clock::now();
        EnsembleModel model = train_algorithm(alg, splits.train, config.ensemble.at(alg), config.workers);
        const double train_seconds = seconds_since(t0);

        const fs::path model_path = fs::path(config.output_dir) / ("model_" + std::string(algorithm_name(alg)) + ".json");
        {
            std::ostringstream buf;
            save_model(buf, model);
            write_file(model_path, buf.str());
        }

        EvaluationReport rep = evaluate(predict_all(model, splits.test),
                                        [&] {
                                            std::vector<SecurityClass> t;
                                            for (const auto& s : splits.test.samples) t.push_back(s.label);
                                            return t;
                                        }());
        const fs::path report_txt = fs::path(config.output_dir) / ("report_" + std::string(algorithm_name(alg)) + ".txt");
        const fs::path report_json =
            fs::path(config.output_dir) / ("report_" + std::string(algorithm_name(alg)) + ".json");
        write_file(report_txt, format_report(rep));
        write_file(report_json, report_to_json(rep).dump(1) + "\n");

        names.push_back(algorithm_name(alg));
        accuracies.push_back(rep.observed_accuracy * 100.0);
        kappas.push_back(rep.kappa * 100.0);

        std::cout << algorithm_name(alg) << ": accuracy " << format_fixed(rep.observed_accuracy * 100.0, 2)
                  << "% kappa " << format_fixed(rep.kappa * 100.0, 2) << "% (" << format_fixed(train_seconds, 1)
                  << " s";
        if (model.oob_error) std::cout << ", oob error " << format_fixed(*model.oob_error * 100.0, 2) << "%";
        std::cout << ")\n";

        manifest.add_stage_time("train_" + std::string(algorithm_name(alg)), train_seconds);
        manifest.add_artifact(model_path);
        manifest.add_artifact(report_txt);
        manifest.add_artifact(report_json);
    }

    // comparison table shaped like the accuracy/kappa summary
    std::string table = "metric";
    for (const auto& n : names) table += "," + n;
    table += "\naccuracy_percent";
    for (double a : accuracies) table += "," + format_fixed(a, 2);
    table += "\nkappa_percent";
    for (double k : kappas) table += "," + format_fixed(k, 2);
    table += "\n";
    const fs::path cmp_path = fs::path(config.output_dir) / "comparison.csv";
    write_file(cmp_path, table);
    manifest.add_artifact(cmp_path);
    manifest.save();
    std::cout << table;
}

void cmd_gap_experiment(const PipelineConfig& config) {
    Manifest manifest(config);
    auto splits = load_and_split(config);

    // baseline and per-fraction models are retrained on the (corrupted,
    // imputed) training set; the held-out test set stays clean
    const EnsembleAlgorithm alg = EnsembleAlgorithm::RandomForest;
    const EnsembleParams& params = config.ensemble.at(alg);

    std::string csv = "gap_fraction,impute_seconds,test_error_percent\n";
    std::string txt = "% of gaps | time in sec | test error, %\n";
    double baseline_error = -1.0;

    std::vector<double> fractions = {0.0};
    fractions.insert(fractions.end(), config.gap_fractions.begin(), config.gap_fractions.end());
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        const double f = fractions[i];
        Dataset train = splits.train;
        double impute_seconds = 0.0;
        if (f > 0.0) {
            train = inject_gaps(train, f, config.gap_seed(i));
            const auto t0 = std::chrono::steady_clock::now();
            train = impute(train, splits.train);
            impute_seconds = seconds_since(t0);
        }
        EnsembleModel model = train_algorithm(alg, train, params, config.workers);
        const double err = test_error_of(model, splits.test) * 100.0;
        if (f == 0.0) baseline_error = err;
        csv += format_double(f) + "," + format_double(impute_seconds) + "," + format_fixed(err, 4) + "\n";
        txt += format_fixed(f * 100.0, 0) + " | " + format_fixed(impute_seconds, 4) + " | " + format_fixed(err, 2) +
               "\n";
        std::cout << "gaps " << format_fixed(f * 100.0, 0) << "%: impute " << format_fixed(impute_seconds, 4)
                  << " s, test error " << format_fixed(err, 2) << "% (baseline " << format_fixed(baseline_error, 2)
                  << "%)\n";
    }

    const fs::path csv_path = fs::path(config.output_dir) / "gap_experiment.csv";
    const fs::path txt_path = fs::path(config.output_dir) / "gap_experiment.txt";
    write_file(csv_path, csv);
    write_file(txt_path, txt);
    manifest.add_artifact(csv_path);
    manifest.add_artifact(txt_path);
    manifest.save();
}

void cmd_curves(const PipelineConfig& config) {
    Manifest manifest(config);
    auto splits = load_and_split(config);

    bool any = false;
    for (EnsembleAlgorithm alg : config.algorithms) {
        if (alg == EnsembleAlgorithm::SingleCart || alg == EnsembleAlgorithm::SingleJ48) continue;
        const fs::path model_path = fs::path(config.output_dir) / ("model_" + std::string(algorithm_name(alg)) + ".json");
        if (!fs::exists(model_path)) continue;
        any = true;
        std::ifstream in(model_path);
        EnsembleModel model = load_model(in);

        auto table = staged_test_error(model, splits.test);
        std::string csv = "t,error_normal,error_alarm,error_emergency1,error_emergency2,error_overall\n";
        for (std::size_t row = 0; row < table.t.size(); ++row) {
            csv += std::to_string(table.t[row]);
            for (SecurityClass c : {SecurityClass::Normal, SecurityClass::Alarm, SecurityClass::Emergency1,
                                    SecurityClass::Emergency2})
                csv += "," + format_double(table.class_error[static_cast<std::size_t>(c)][row]);
            csv += "," + format_double(table.overall_error[row]) + "\n";
        }
        const fs::path staged_path =
            fs::path(config.output_dir) / ("staged_error_" + std::string(algorithm_name(alg)) + ".csv");
        write_file(staged_path, csv);
        manifest.add_artifact(staged_path);

        auto importance = variable_importance(model);
        std::string imp = "attribute,importance,normal,alarm,emergency1,emergency2\n";
        for (std::size_t i = 0; i < importance.attribute.size(); ++i) {
            imp += model.schema[static_cast<std::size_t>(importance.attribute[i])] + "," +
                   format_double(importance.overall[i]);
            for (SecurityClass c : {SecurityClass::Normal, SecurityClass::Alarm, SecurityClass::Emergency1,
                                    SecurityClass::Emergency2})
                imp += "," + format_double(importance.per_class[static_cast<std::size_t>(c)][i]);
            imp += "\n";
        }
        const fs::path imp_path =
            fs::path(config.output_dir) / ("importance_" + std::string(algorithm_name(alg)) + ".csv");
        write_file(imp_path, imp);
        manifest.add_artifact(imp_path);

        std::cout << algorithm_name(alg) << ": staged error (t=1 " << format_fixed(table.overall_error.front() * 100, 2)
                  << "% -> t=" << table.t.back() << " " << format_fixed(table.overall_error.back() * 100, 2)
                  << "%), top attribute " << model.schema[static_cast<std::size_t>(importance.attribute[0])] << "\n";
    }
    if (!any) throw DataError("no trained ensemble model found (run train-eval first)");
    manifest.save();
}

void cmd_print_config(const PipelineConfig& config) { std::cout << dump_config(config); }

void cmd_verify_manifest(const PipelineConfig& config) {
    const fs::path path = fs::path(config.output_dir) / "manifest.json";
    if (!fs::exists(path)) throw DataError("manifest not found at '" + path.string() + "'");
    json j = json::parse(read_file(path));
    if (j.value("format", "") != "gridsec-manifest") throw DataError("not a gridsec manifest");
    int checked = 0;
    for (const auto& [name, entry] : j.at("artifacts").items()) {
        const fs::path p = fs::path(config.output_dir) / name;
        if (!fs::exists(p)) throw DataError("missing artifact: " + name);
        if (fs::file_size(p) != entry.at("bytes").get<std::uintmax_t>())
            throw DataError("size mismatch for artifact: " + name);
        if (sha256_file(p.string()) != entry.at("sha256").get<std::string>())
            throw DataError("sha256 mismatch for artifact: " + name);
        ++checked;
    }
    std::cout << "manifest ok: " << checked << " artifacts verified\n";
}

}  // namespace gridsec
