#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "gridsec/dataset.hpp"
#include "gridsec/rng.hpp"
#include "test_helpers.hpp"

using namespace gridsec;

namespace {

Dataset synthetic_dataset(std::size_t n, std::size_t p, std::uint64_t seed) {
    Dataset d;
    for (std::size_t a = 0; a < p; ++a) d.schema.push_back("a" + std::to_string(a));
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        LabeledSample s;
        for (std::size_t a = 0; a < p; ++a) s.features.values.push_back(rng.next_double() * 10.0);
        s.features.missing.assign(p, 0);
        const int cls = static_cast<int>(rng.next_below(4));
        s.label = static_cast<SecurityClass>(cls);
        const double si_for_class[] = {0.0, 3.0, 10.0, 20.0};
        s.si = si_for_class[cls];
        d.samples.push_back(std::move(s));
    }
    return d;
}

}  // namespace

TEST_CASE("feature schema and extraction") {
    NetworkCase c118 = load_embedded_case("ieee118");
    auto schema = feature_schema(c118);
    CHECK(schema.size() == 118 + 186 + 186);  // the 490 candidate attributes
    CHECK(schema[0] == "V_1");
    CHECK(schema[118].rfind("P_", 0) == 0);
    CHECK(schema[118 + 186].rfind("Q_", 0) == 0);

    NetworkCase c2 = testing::twobus_case();
    CHECK(feature_schema(c2).size() == 4);  // 2 + 1 + 1

    SUBCASE("flat zero-load state extracts ones and zeros") {
        SystemState st = solve(c2, 0.0, Outage::none(), LoadModel{}, SolverSettings{});
        REQUIRE(st.converged);
        FeatureVector f = extract_features(st, c2);
        REQUIRE(f.values.size() == 4);
        CHECK(f.values[0] == doctest::Approx(1.0));
        CHECK(f.values[1] == doctest::Approx(1.0));
        CHECK(std::abs(f.values[2]) < 1e-6);
        CHECK(std::abs(f.values[3]) < 1e-6);
    }
    SUBCASE("schema mismatch throws") {
        SystemState st = solve(c2, 0.0, Outage::none(), LoadModel{}, SolverSettings{});
        CHECK_THROWS_AS(extract_features(st, c118), std::invalid_argument);
    }
}

TEST_CASE("build_dataset matches the record list and label rule") {
    NetworkCase c = load_embedded_case("ieee118");
    ScenarioConfig cfg;
    cfg.scale_start = 1.0;
    cfg.scale_end = 1.05;
    cfg.scale_step = 0.05;
    cfg.contingencies_per_step = 8;
    cfg.master_seed = 31;
    auto result = generate_states(c, cfg, LoadModel{}, SolverSettings{}, 2);
    Dataset d = build_dataset(result, c, SecurityWeights{});
    CHECK(d.size() == result.records.size());
    CHECK(d.n_attributes() == 490);
    for (const auto& s : d.samples) CHECK(s.label == classify(s.si));
}

TEST_CASE("stratified split") {
    Dataset d = synthetic_dataset(1000, 3, 5);
    SUBCASE("partition covers the set exactly") {
        auto r = split(d, 0.25, 9);
        CHECK(r.train.size() + r.test.size() == d.size());
        CHECK(r.test.size() == doctest::Approx(250).epsilon(0.02));
        auto h = d.class_histogram();
        auto ht = r.test.class_histogram();
        auto hr = r.train.class_histogram();
        for (int k = 0; k < kNumClasses; ++k) {
            CHECK(ht[static_cast<std::size_t>(k)] + hr[static_cast<std::size_t>(k)] == h[static_cast<std::size_t>(k)]);
            // class proportions preserved within a sample
            CHECK(std::llabs(static_cast<long long>(ht[static_cast<std::size_t>(k)]) -
                             std::llround(0.25 * static_cast<double>(h[static_cast<std::size_t>(k)]))) <= 1);
        }
    }
    SUBCASE("deterministic for a fixed seed") {
        auto a = split(d, 0.3, 42);
        auto b = split(d, 0.3, 42);
        REQUIRE(a.test.size() == b.test.size());
        for (std::size_t i = 0; i < a.test.size(); ++i)
            CHECK(a.test.samples[i].features.values == b.test.samples[i].features.values);
    }
    SUBCASE("half split of a single-class tiny set") {
        Dataset one;
        one.schema = {"x"};
        for (int i = 0; i < 10; ++i) {
            LabeledSample s;
            s.features.values = {static_cast<double>(i)};
            s.features.missing = {0};
            s.label = SecurityClass::Normal;
            s.si = 0.0;
            one.samples.push_back(s);
        }
        auto r = split(one, 0.5, 3);
        CHECK(r.test.size() == 5);
        CHECK(r.train.size() == 5);
    }
    SUBCASE("a single-sample class falls back to unstratified") {
        Dataset d2 = synthetic_dataset(50, 2, 6);
        for (auto& s : d2.samples)
            if (s.label == SecurityClass::Emergency2) {
                s.label = SecurityClass::Normal;
                s.si = 0.0;
            }
        d2.samples[0].label = SecurityClass::Emergency2;
        d2.samples[0].si = 20.0;
        auto r = split(d2, 0.2, 7);
        CHECK_FALSE(r.diagnostics.empty());
        CHECK(r.train.size() + r.test.size() == d2.size());
    }
    SUBCASE("invalid fraction throws") {
        CHECK_THROWS_AS(split(d, 0.0, 1), std::invalid_argument);
        CHECK_THROWS_AS(split(d, 1.0, 1), std::invalid_argument);
    }
}

TEST_CASE("gap injection") {
    Dataset d = synthetic_dataset(100, 4, 11);
    SUBCASE("zero fraction is the identity") {
        Dataset g = inject_gaps(d, 0.0, 1);
        for (std::size_t i = 0; i < d.size(); ++i) CHECK_FALSE(g.samples[i].features.is_missing(0));
    }
    SUBCASE("exact cell count") {
        Dataset g = inject_gaps(d, 0.5, 2);
        std::size_t missing = 0;
        for (const auto& s : g.samples)
            for (std::size_t a = 0; a < 4; ++a)
                if (s.features.is_missing(a)) ++missing;
        CHECK(missing == 200);  // round(0.5 * 400)
    }
    SUBCASE("labels are untouched") {
        Dataset g = inject_gaps(d, 0.3, 3);
        for (std::size_t i = 0; i < d.size(); ++i) {
            CHECK(g.samples[i].label == d.samples[i].label);
            CHECK(g.samples[i].si == d.samples[i].si);
        }
    }
    SUBCASE("deterministic for a fixed seed") {
        Dataset a = inject_gaps(d, 0.2, 9);
        Dataset b = inject_gaps(d, 0.2, 9);
        for (std::size_t i = 0; i < d.size(); ++i) CHECK(a.samples[i].features.missing == b.samples[i].features.missing);
    }
}

TEST_CASE("median imputation") {
    Dataset ref;
    ref.schema = {"x"};
    for (double v : {1.0, 2.0, 100.0}) {
        LabeledSample s;
        s.features.values = {v};
        s.features.missing = {0};
        s.label = SecurityClass::Normal;
        s.si = 0.0;
        ref.samples.push_back(s);
    }
    SUBCASE("no gaps is the identity") {
        Dataset out = impute(ref, ref);
        for (std::size_t i = 0; i < ref.size(); ++i) CHECK(out.samples[i].features.values == ref.samples[i].features.values);
    }
    SUBCASE("missing cell takes the reference median") {
        Dataset gapped = ref;
        gapped.samples[0].features.missing = {1};
        Dataset out = impute(gapped, ref);
        CHECK(out.samples[0].features.values[0] == doctest::Approx(2.0));
        CHECK_FALSE(out.samples[0].features.is_missing(0));
        // non-missing cells and labels untouched
        CHECK(out.samples[1].features.values[0] == doctest::Approx(2.0));
        CHECK(out.samples[2].features.values[0] == doctest::Approx(100.0));
    }
    SUBCASE("even-count median averages the central pair") {
        Dataset ref4 = ref;
        LabeledSample s;
        s.features.values = {4.0};
        s.features.missing = {0};
        s.label = SecurityClass::Normal;
        s.si = 0.0;
        ref4.samples.push_back(s);  // values {1, 2, 100, 4} -> median 3
        Dataset gapped = ref4;
        gapped.samples[0].features.missing = {1};
        CHECK(impute(gapped, ref4).samples[0].features.values[0] == doctest::Approx(3.0));
    }
    SUBCASE("schema mismatch throws") {
        Dataset other;
        other.schema = {"y"};
        CHECK_THROWS_AS(impute(ref, other), std::invalid_argument);
    }
}

TEST_CASE("dataset csv round trip") {
    Dataset d = synthetic_dataset(50, 5, 13);
    d = inject_gaps(d, 0.2, 17);
    std::ostringstream out;
    write_dataset_csv(out, d);
    std::istringstream in(out.str());
    Dataset back = read_dataset_csv(in);
    REQUIRE(back.size() == d.size());
    REQUIRE(back.schema == d.schema);
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(back.samples[i].label == d.samples[i].label);
        CHECK(back.samples[i].si == d.samples[i].si);
        for (std::size_t a = 0; a < d.n_attributes(); ++a) {
            CHECK(back.samples[i].features.is_missing(a) == d.samples[i].features.is_missing(a));
            if (!d.samples[i].features.is_missing(a))
                CHECK(back.samples[i].features.values[a] == d.samples[i].features.values[a]);
        }
    }
    SUBCASE("label must match classify(si)") {
        std::string text = out.str();
        // corrupt the first data row's class cell
        auto pos = text.find("\n") + 1;
        auto eol = text.find("\n", pos);
        std::string row = text.substr(pos, eol - pos);
        auto comma = row.rfind(',');
        std::string cls = row.substr(comma + 1);
        row = row.substr(0, comma + 1) + (cls == "normal" ? "emergency2" : "normal");
        std::istringstream bad(text.substr(0, pos) + row + text.substr(eol));
        CHECK_THROWS_AS(read_dataset_csv(bad), std::runtime_error);
    }
}
