#include "gridsec/config.hpp"

#include <fstream>
#include <sstream>

#include "gridsec/numeric_io.hpp"

namespace gridsec {

namespace {

EnsembleParams algorithm_defaults(EnsembleAlgorithm a) {
    EnsembleParams p;
    switch (a) {
        case EnsembleAlgorithm::SingleCart:
        case EnsembleAlgorithm::SingleJ48:
            p.n_trees = 1;
            p.bootstrap = false;
            break;
        case EnsembleAlgorithm::BaggedCart:
            p.n_trees = 100;
            p.bootstrap = true;
            break;
        case EnsembleAlgorithm::RandomForest:
            p.n_trees = 100;
            p.bootstrap = true;
            break;
        case EnsembleAlgorithm::ExtraTrees:
            p.n_trees = 100;
            p.bootstrap = false;
            break;
        case EnsembleAlgorithm::AdaBoost:
            p.n_trees = 200;
            p.bootstrap = false;
            p.tree_params.max_depth = 3;
            break;
        case EnsembleAlgorithm::Sgb:
            p.n_trees = 200;
            p.bootstrap = false;
            p.sample_fraction = 0.5;
            p.learning_rate = 0.1;
            p.tree_params.max_depth = 5;
            break;
    }
    return p;
}

const std::vector<EnsembleAlgorithm>& all_algorithms() {
    static const std::vector<EnsembleAlgorithm> all = {
        EnsembleAlgorithm::SingleCart, EnsembleAlgorithm::SingleJ48, EnsembleAlgorithm::BaggedCart,
        EnsembleAlgorithm::RandomForest, EnsembleAlgorithm::ExtraTrees, EnsembleAlgorithm::AdaBoost,
        EnsembleAlgorithm::Sgb};
    return all;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(ch))) {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace

PipelineConfig::PipelineConfig() {
    for (EnsembleAlgorithm a : all_algorithms()) ensemble[a] = algorithm_defaults(a);
    refresh_derived_seeds();
}

std::uint64_t PipelineConfig::scenario_seed() const { return mix_seed(master_seed, 0xA1); }
std::uint64_t PipelineConfig::split_seed() const { return mix_seed(master_seed, 0xA2); }
std::uint64_t PipelineConfig::training_seed(EnsembleAlgorithm a) const {
    return mix_seed(master_seed, 0xB0 + static_cast<std::uint64_t>(a));
}
std::uint64_t PipelineConfig::gap_seed(std::size_t fraction_index) const {
    return mix_seed(master_seed, 0xC0 + fraction_index);
}

void PipelineConfig::refresh_derived_seeds() {
    scenario.master_seed = scenario_seed();
    for (auto& [a, p] : ensemble) p.master_seed = training_seed(a);
}

PipelineConfig parse_config(const std::string& text) {
    PipelineConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        if (line.front() == '[') {
            if (line.back() != ']') throw std::runtime_error("config line " + std::to_string(lineno) + ": bad section");
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string path = section.empty() ? key : section + "." + key;

        try {
            if (path == "case.source") cfg.case_source = value;
            else if (path == "run.master_seed") cfg.master_seed = static_cast<std::uint64_t>(parse_int(value));
            else if (path == "run.workers") cfg.workers = static_cast<int>(parse_int(value));
            else if (path == "run.output_dir") cfg.output_dir = value;
            else if (path == "scenario.scale_start") cfg.scenario.scale_start = parse_double(value);
            else if (path == "scenario.scale_end") cfg.scenario.scale_end = parse_double(value);
            else if (path == "scenario.scale_step") cfg.scenario.scale_step = parse_double(value);
            else if (path == "scenario.contingencies_per_step")
                cfg.scenario.contingencies_per_step = static_cast<int>(parse_int(value));
            else if (path == "scenario.include_base_state")
                cfg.scenario.include_base_state = parse_int(value) != 0;
            else if (path == "load_model.alpha_p") cfg.load_model.alpha_p = parse_double(value);
            else if (path == "load_model.alpha_q") cfg.load_model.alpha_q = parse_double(value);
            else if (path == "load_model.v_critical") cfg.load_model.v_critical = parse_double(value);
            else if (path == "solver.tolerance") cfg.solver.tolerance = parse_double(value);
            else if (path == "solver.max_iterations") cfg.solver.max_iterations = static_cast<int>(parse_int(value));
            else if (path == "security.w1") cfg.weights.w1 = parse_double(value);
            else if (path == "security.w2") cfg.weights.w2 = parse_double(value);
            else if (path == "split.test_fraction") cfg.test_fraction = parse_double(value);
            else if (path == "train.algorithms") {
                cfg.algorithms.clear();
                for (const auto& name : split_list(value)) cfg.algorithms.push_back(algorithm_from_name(name));
            } else if (path == "gaps.fractions") {
                cfg.gap_fractions.clear();
                for (const auto& f : split_list(value)) cfg.gap_fractions.push_back(parse_double(f));
            } else if (!section.empty()) {
                // per-algorithm sections: [rf] n_trees = 100
                EnsembleAlgorithm alg = algorithm_from_name(section);
                auto& p = cfg.ensemble.at(alg);
                if (key == "n_trees") p.n_trees = static_cast<int>(parse_int(value));
                else if (key == "bootstrap") p.bootstrap = parse_int(value) != 0;
                else if (key == "sample_fraction") p.sample_fraction = parse_double(value);
                else if (key == "learning_rate") p.learning_rate = parse_double(value);
                else if (key == "max_depth") p.tree_params.max_depth = static_cast<int>(parse_int(value));
                else if (key == "min_samples_leaf") p.tree_params.min_samples_leaf = static_cast<int>(parse_int(value));
                else if (key == "mtry") p.tree_params.mtry = static_cast<int>(parse_int(value));
                else throw std::runtime_error("unknown key '" + key + "'");
            } else {
                throw std::runtime_error("unknown key '" + path + "'");
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    cfg.refresh_derived_seeds();
    return cfg;
}

PipelineConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string dump_config(const PipelineConfig& cfg) {
    std::string out;
    out += "# gridsec pipeline configuration (all values shown are in effect)\n";
    out += "[case]\nsource = " + cfg.case_source + "\n\n";
    out += "[run]\nmaster_seed = " + std::to_string(cfg.master_seed) + "\nworkers = " + std::to_string(cfg.workers) +
           "\noutput_dir = " + cfg.output_dir + "\n\n";
    out += "[scenario]\n";
    out += "scale_start = " + format_double(cfg.scenario.scale_start) + "\n";
    out += "scale_end = " + format_double(cfg.scenario.scale_end) + "\n";
    out += "scale_step = " + format_double(cfg.scenario.scale_step) + "\n";
    out += "contingencies_per_step = " + std::to_string(cfg.scenario.contingencies_per_step) + "\n";
    out += "include_base_state = " + std::string(cfg.scenario.include_base_state ? "1" : "0") + "\n\n";
    out += "[load_model]\n";
    out += "alpha_p = " + format_double(cfg.load_model.alpha_p) + "\n";
    out += "alpha_q = " + format_double(cfg.load_model.alpha_q) + "\n";
    out += "v_critical = " + format_double(cfg.load_model.v_critical) + "\n\n";
    out += "[solver]\n";
    out += "tolerance = " + format_double(cfg.solver.tolerance) + "\n";
    out += "max_iterations = " + std::to_string(cfg.solver.max_iterations) + "\n\n";
    out += "[security]\nw1 = " + format_double(cfg.weights.w1) + "\nw2 = " + format_double(cfg.weights.w2) + "\n\n";
    out += "[split]\ntest_fraction = " + format_double(cfg.test_fraction) + "\n\n";
    out += "[train]\nalgorithms = ";
    for (std::size_t i = 0; i < cfg.algorithms.size(); ++i)
        out += std::string(i ? "," : "") + algorithm_name(cfg.algorithms[i]);
    out += "\n\n[gaps]\nfractions = ";
    for (std::size_t i = 0; i < cfg.gap_fractions.size(); ++i)
        out += std::string(i ? "," : "") + format_double(cfg.gap_fractions[i]);
    out += "\n";
    for (EnsembleAlgorithm a : {EnsembleAlgorithm::SingleCart, EnsembleAlgorithm::SingleJ48,
                                EnsembleAlgorithm::BaggedCart, EnsembleAlgorithm::RandomForest,
                                EnsembleAlgorithm::ExtraTrees, EnsembleAlgorithm::AdaBoost, EnsembleAlgorithm::Sgb}) {
        const auto& p = cfg.ensemble.at(a);
        out += "\n[" + std::string(algorithm_name(a)) + "]\n";
        out += "n_trees = " + std::to_string(p.n_trees) + "\n";
        out += "bootstrap = " + std::string(p.bootstrap ? "1" : "0") + "\n";
        out += "sample_fraction = " + format_double(p.sample_fraction) + "\n";
        out += "learning_rate = " + format_double(p.learning_rate) + "\n";
        out += "max_depth = " + std::to_string(p.tree_params.max_depth) + "\n";
        out += "min_samples_leaf = " + std::to_string(p.tree_params.min_samples_leaf) + "\n";
        out += "mtry = " + std::to_string(p.tree_params.mtry) + "\n";
    }
    return out;
}

NetworkCase load_case_source(const std::string& source) {
    const std::string builtin_prefix = "builtin:";
    if (source.rfind(builtin_prefix, 0) == 0) return load_embedded_case(source.substr(builtin_prefix.size()));
    std::ifstream in(source);
    if (!in) throw std::runtime_error("cannot open case file '" + source + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_case(buf.str());
}

}  // namespace gridsec
