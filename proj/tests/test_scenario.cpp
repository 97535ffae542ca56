#include <doctest.h>

#include <sstream>

#include "gridsec/scenario.hpp"
#include "test_helpers.hpp"

using namespace gridsec;

TEST_CASE("ramp schedule") {
    ScenarioConfig cfg;
    SUBCASE("even steps") {
        cfg.scale_start = 1.0;
        cfg.scale_end = 1.2;
        cfg.scale_step = 0.1;
        auto s = ramp_schedule(cfg);
        REQUIRE(s.size() == 3);
        CHECK(s[0] == doctest::Approx(1.0));
        CHECK(s[1] == doctest::Approx(1.1));
        CHECK(s[2] == doctest::Approx(1.2));
    }
    SUBCASE("degenerate range") {
        cfg.scale_start = cfg.scale_end = 1.0;
        cfg.scale_step = 0.1;
        auto s = ramp_schedule(cfg);
        REQUIRE(s.size() == 1);
        CHECK(s[0] == doctest::Approx(1.0));
    }
    SUBCASE("clipped terminal step") {
        cfg.scale_start = 1.0;
        cfg.scale_end = 1.25;
        cfg.scale_step = 0.1;
        auto s = ramp_schedule(cfg);
        REQUIRE(s.size() == 4);
        CHECK(s[3] == doctest::Approx(1.25));
    }
    SUBCASE("bad config throws") {
        cfg.scale_step = 0.0;
        CHECK_THROWS_AS(ramp_schedule(cfg), std::invalid_argument);
        cfg.scale_step = 0.1;
        cfg.scale_start = 2.0;
        cfg.scale_end = 1.0;
        CHECK_THROWS_AS(ramp_schedule(cfg), std::invalid_argument);
    }
}

TEST_CASE("contingency sampling") {
    NetworkCase c118 = load_embedded_case("ieee118");
    SUBCASE("two-bus case: the only line islands, so the draw comes back empty") {
        NetworkCase c = testing::twobus_case();
        auto sample = sample_contingencies(c, 1, 7);
        CHECK(sample.outages.empty());
        CHECK_FALSE(sample.diagnostics.empty());
    }
    SUBCASE("determinism for a fixed seed") {
        auto a = sample_contingencies(c118, 25, 42);
        auto b = sample_contingencies(c118, 25, 42);
        REQUIRE(a.outages.size() == b.outages.size());
        for (std::size_t i = 0; i < a.outages.size(); ++i) CHECK(a.outages[i] == b.outages[i]);
    }
    SUBCASE("different seeds give different draws") {
        auto a = sample_contingencies(c118, 10, 1);
        auto b = sample_contingencies(c118, 10, 2);
        bool differ = a.outages.size() != b.outages.size();
        for (std::size_t i = 0; !differ && i < a.outages.size(); ++i) differ = !(a.outages[i] == b.outages[i]);
        CHECK(differ);
    }
    SUBCASE("draws are distinct and never island") {
        auto s = sample_contingencies(c118, 120, 99);
        CHECK(s.outages.size() == 120);
        for (std::size_t i = 0; i < s.outages.size(); ++i) {
            if (s.outages[i].kind == OutageKind::Line) CHECK(connected_without(c118, s.outages[i].element_id));
            for (std::size_t j = i + 1; j < s.outages.size(); ++j) CHECK_FALSE(s.outages[i] == s.outages[j]);
        }
    }
    SUBCASE("slack generator is never drawn") {
        auto s = sample_contingencies(c118, 230, 5);
        for (const auto& o : s.outages)
            if (o.kind == OutageKind::Generator)
                CHECK(c118.generators[static_cast<std::size_t>(o.element_id)].bus != 69);
    }
    SUBCASE("requesting more than the population throws") {
        CHECK_THROWS_AS(sample_contingencies(c118, 10000, 1), std::invalid_argument);
    }
}

namespace {

ScenarioConfig small_run() {
    ScenarioConfig cfg;
    cfg.scale_start = 1.0;
    cfg.scale_end = 1.1;
    cfg.scale_step = 0.05;
    cfg.contingencies_per_step = 12;
    cfg.master_seed = 777;
    cfg.include_base_state = true;
    return cfg;
}

}  // namespace

TEST_CASE("generate_states on the embedded 118-bus case") {
    NetworkCase c = load_embedded_case("ieee118");
    auto result = generate_states(c, small_run(), LoadModel{}, SolverSettings{}, 2);
    // 3 steps x (12 contingencies + base)
    CHECK(result.records.size() == 39);
    CHECK(result.base_states.size() == 3);

    SUBCASE("record ids are sequential and step-major") {
        for (std::size_t i = 0; i < result.records.size(); ++i)
            CHECK(result.records[i].scenario_id == static_cast<int>(i));
        CHECK(result.records[0].step == 0);
        CHECK(result.records[13].step == 1);
    }
    SUBCASE("prefault reference is a converged base at the same scale") {
        for (const auto& rec : result.records) {
            const auto& base = result.base_states[static_cast<std::size_t>(rec.step)];
            if (rec.prefault_record >= 0) {
                CHECK(base.converged);
                CHECK(base.load_scale == doctest::Approx(rec.state.load_scale));
            }
        }
    }
    SUBCASE("deterministic across worker counts") {
        auto again = generate_states(c, small_run(), LoadModel{}, SolverSettings{}, 8);
        REQUIRE(again.records.size() == result.records.size());
        for (std::size_t i = 0; i < result.records.size(); ++i) {
            CHECK(again.records[i].state.outage == result.records[i].state.outage);
            CHECK(again.records[i].state.converged == result.records[i].state.converged);
            for (std::size_t b = 0; b < again.records[i].state.v_mag.size(); ++b)
                CHECK(again.records[i].state.v_mag[b] == result.records[i].state.v_mag[b]);
        }
    }
    SUBCASE("csv emission is byte-identical across runs and worker counts") {
        std::ostringstream a, b;
        write_states_csv(a, result, c, SecurityWeights{});
        write_states_csv(b, generate_states(c, small_run(), LoadModel{}, SolverSettings{}, 8), c, SecurityWeights{});
        CHECK(a.str() == b.str());
        // header + one line per record
        std::size_t lines = 0;
        for (char ch : a.str())
            if (ch == '\n') ++lines;
        CHECK(lines == result.records.size() + 1);
    }
}

TEST_CASE("two-bus single-step run keeps the counting contract") {
    NetworkCase c = testing::twobus_case(20.0, 5.0);
    ScenarioConfig cfg;
    cfg.scale_start = cfg.scale_end = 1.0;
    cfg.scale_step = 0.1;
    cfg.contingencies_per_step = 1;
    cfg.include_base_state = true;
    auto result = generate_states(c, cfg, LoadModel{}, SolverSettings{});
    // base record only: the sole line islands, so the contingency is skipped
    CHECK(result.records.size() == 1);
    CHECK_FALSE(result.diagnostics.empty());
    CHECK(result.records[0].state.converged);
}

TEST_CASE("base-case divergence at the first step is fatal") {
    // load far beyond the nose with constant-power behavior
    NetworkCase c = testing::twobus_case(900.0, 0.0);
    ScenarioConfig cfg;
    cfg.scale_start = cfg.scale_end = 1.0;
    cfg.scale_step = 0.1;
    cfg.contingencies_per_step = 1;
    CHECK_THROWS_AS(generate_states(c, cfg, LoadModel{0.0, 0.0, 1e-6}, SolverSettings{}), std::runtime_error);
}

TEST_CASE("minimum voltage is non-increasing along the no-outage ramp") {
    NetworkCase c = load_embedded_case("ieee118");
    ScenarioConfig cfg;
    cfg.scale_start = 1.0;
    cfg.scale_end = 1.3;
    cfg.scale_step = 0.05;
    cfg.contingencies_per_step = 1;
    auto result = generate_states(c, cfg, LoadModel{}, SolverSettings{}, 2);
    double prev_min = 2.0;
    for (const auto& base : result.base_states) {
        REQUIRE(base.converged);
        double vmin = 2.0;
        for (double v : base.v_mag) vmin = std::min(vmin, v);
        CHECK(vmin <= prev_min + 1e-9);
        prev_min = vmin;
    }
}
