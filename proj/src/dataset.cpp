#include "gridsec/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "gridsec/numeric_io.hpp"
#include "gridsec/rng.hpp"

namespace gridsec {

std::vector<std::size_t> Dataset::class_histogram() const {
    std::vector<std::size_t> h(kNumClasses, 0);
    for (const auto& s : samples) ++h[static_cast<std::size_t>(s.label)];
    return h;
}

std::vector<std::string> feature_schema(const NetworkCase& grid) {
    std::vector<std::string> names;
    names.reserve(grid.buses.size() + 2 * grid.branches.size());
    for (const auto& b : grid.buses) names.push_back("V_" + std::to_string(b.id));
    // parallel circuits share endpoints; suffix repeats to keep names unique
    std::unordered_map<std::string, int> seen;
    std::vector<std::string> pair_names;
    for (const auto& br : grid.branches) {
        std::string pair = std::to_string(br.from_bus) + "_" + std::to_string(br.to_bus);
        const int n = ++seen[pair];
        if (n > 1) pair += "_" + std::to_string(n);
        pair_names.push_back(std::move(pair));
    }
    for (const auto& pair : pair_names) names.push_back("P_" + pair);
    for (const auto& pair : pair_names) names.push_back("Q_" + pair);
    return names;
}

FeatureVector extract_features(const SystemState& state, const NetworkCase& grid) {
    if (state.v_mag.size() != grid.buses.size() || state.branch_p_from.size() != grid.branches.size())
        throw std::invalid_argument("state does not match case topology");
    FeatureVector f;
    const std::size_t p = grid.buses.size() + 2 * grid.branches.size();
    f.values.reserve(p);
    f.values.insert(f.values.end(), state.v_mag.begin(), state.v_mag.end());
    f.values.insert(f.values.end(), state.branch_p_from.begin(), state.branch_p_from.end());
    f.values.insert(f.values.end(), state.branch_q_from.begin(), state.branch_q_from.end());
    f.missing.assign(p, 0);
    return f;
}

Dataset build_dataset(const GenerateResult& result, const NetworkCase& grid, const SecurityWeights& weights) {
    Dataset data;
    data.schema = feature_schema(grid);
    data.samples.reserve(result.records.size());
    const std::size_t nb = grid.buses.size();
    const std::size_t nbr = grid.branches.size();
    for (std::size_t idx = 0; idx < result.records.size(); ++idx) {
        const StateRecord& rec = result.records[idx];
        LabeledSample s;
        s.features = extract_features(result.backing_state(idx), grid);
        if (rec.state.converged) {
            auto score = security_index(rec.state, grid, weights);
            s.si = score.si;
            s.label = score.class_label;
        } else {
            s.si = kCollapseSi;
            s.label = classify(s.si);
            if (rec.state.outage.kind == OutageKind::Line) {
                // the faulted line is already open in the state right before
                // collapse: zero its flow features
                const std::size_t k = static_cast<std::size_t>(rec.state.outage.element_id);
                s.features.values[nb + k] = 0.0;
                s.features.values[nb + nbr + k] = 0.0;
            }
        }
        data.samples.push_back(std::move(s));
    }
    return data;
}

SplitResult split(const Dataset& data, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw std::invalid_argument("test_fraction must be in (0, 1)");
    SplitResult out;
    out.train.schema = data.schema;
    out.test.schema = data.schema;

    std::vector<std::vector<std::size_t>> by_class(kNumClasses);
    for (std::size_t i = 0; i < data.samples.size(); ++i)
        by_class[static_cast<std::size_t>(data.samples[i].label)].push_back(i);

    bool stratify = true;
    for (const auto& group : by_class)
        if (group.size() == 1) {
            stratify = false;
            out.diagnostics.push_back("a class has a single sample; falling back to unstratified split");
        }

    Rng rng(seed);
    std::vector<char> in_test(data.samples.size(), 0);
    auto assign = [&](std::vector<std::size_t>& group) {
        rng.shuffle(group);
        const std::size_t n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(group.size())));
        for (std::size_t k = 0; k < n_test && k < group.size(); ++k) in_test[group[k]] = 1;
    };
    if (stratify) {
        for (auto& group : by_class)
            if (!group.empty()) assign(group);
    } else {
        std::vector<std::size_t> all(data.samples.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        assign(all);
    }
    for (std::size_t i = 0; i < data.samples.size(); ++i)
        (in_test[i] ? out.test : out.train).samples.push_back(data.samples[i]);
    return out;
}

Dataset inject_gaps(const Dataset& data, double gap_fraction, std::uint64_t seed) {
    if (gap_fraction < 0.0 || gap_fraction >= 1.0)
        throw std::invalid_argument("gap_fraction must be in [0, 1)");
    Dataset out = data;
    const std::size_t p = data.n_attributes();
    const std::size_t cells = data.size() * p;
    const std::size_t target = static_cast<std::size_t>(std::llround(gap_fraction * static_cast<double>(cells)));
    if (target == 0) return out;

    std::vector<std::uint32_t> pool(cells);
    for (std::size_t i = 0; i < cells; ++i) pool[i] = static_cast<std::uint32_t>(i);
    Rng rng(seed);
    for (std::size_t k = 0; k < target; ++k) {
        const std::size_t j = k + static_cast<std::size_t>(rng.next_below(cells - k));
        std::swap(pool[k], pool[j]);
        const std::size_t cell = pool[k];
        auto& f = out.samples[cell / p].features;
        if (f.missing.empty()) f.missing.assign(p, 0);
        f.missing[cell % p] = 1;
    }
    return out;
}

Dataset impute(const Dataset& data, const Dataset& reference) {
    if (reference.schema != data.schema) throw std::invalid_argument("impute: schema mismatch");
    const std::size_t p = data.n_attributes();

    // lazily computed per-attribute medians of the reference set
    std::vector<double> median(p, 0.0);
    std::vector<char> have(p, 0);
    std::vector<double> scratch;
    auto median_of = [&](std::size_t attr) {
        if (have[attr]) return median[attr];
        scratch.clear();
        for (const auto& s : reference.samples)
            if (!s.features.is_missing(attr)) scratch.push_back(s.features.values[attr]);
        if (scratch.empty())
            throw std::runtime_error("impute: attribute '" + data.schema[attr] + "' has no values in reference");
        const std::size_t mid = scratch.size() / 2;
        std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(mid), scratch.end());
        double m = scratch[mid];
        if (scratch.size() % 2 == 0) {
            const double lo = *std::max_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(mid));
            m = 0.5 * (lo + m);
        }
        median[attr] = m;
        have[attr] = 1;
        return m;
    };

    Dataset out = data;
    for (auto& s : out.samples) {
        if (s.features.missing.empty()) continue;
        for (std::size_t a = 0; a < p; ++a)
            if (s.features.missing[a]) s.features.values[a] = median_of(a);
        s.features.missing.assign(p, 0);
    }
    return out;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
    for (const auto& name : data.schema) out << name << ",";
    out << "SI,class\n";
    for (const auto& s : data.samples) {
        for (std::size_t a = 0; a < data.schema.size(); ++a) {
            if (!s.features.is_missing(a)) out << format_double(s.features.values[a]);
            out << ",";
        }
        out << format_double(s.si) << "," << class_name(s.label) << "\n";
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(std::move(cur));
    return out;
}

}  // namespace

Dataset read_dataset_csv(std::istream& in) {
    Dataset data;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("dataset CSV is empty");
    auto header = split_csv_line(line);
    if (header.size() < 3 || header[header.size() - 2] != "SI" || header.back() != "class")
        throw std::runtime_error("dataset CSV header must end with SI,class");
    data.schema.assign(header.begin(), header.end() - 2);

    const std::size_t p = data.schema.size();
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != p + 2)
            throw std::runtime_error("dataset CSV line " + std::to_string(lineno) + ": expected " +
                                     std::to_string(p + 2) + " cells, got " + std::to_string(cells.size()));
        LabeledSample s;
        s.features.values.resize(p, 0.0);
        s.features.missing.assign(p, 0);
        for (std::size_t a = 0; a < p; ++a) {
            if (cells[a].empty())
                s.features.missing[a] = 1;
            else
                s.features.values[a] = parse_double(cells[a]);
        }
        s.si = parse_double(cells[p]);
        s.label = class_from_name(cells[p + 1]);
        if (s.label != classify(s.si))
            throw std::runtime_error("dataset CSV line " + std::to_string(lineno) +
                                     ": class does not match classify(SI)");
        data.samples.push_back(std::move(s));
    }
    return data;
}

}  // namespace gridsec
