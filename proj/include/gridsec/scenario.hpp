#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gridsec/power_flow.hpp"
#include "gridsec/security_index.hpp"

namespace gridsec {

// Load-ramp schedule with randomized N-1 disturbances at every step.
struct ScenarioConfig {
    double scale_start = 1.0;
    double scale_end = 1.5;
    double scale_step = 0.01;
    int contingencies_per_step = 168;
    std::uint64_t master_seed = 118118;
    bool include_base_state = true;
};

struct StateRecord {
    SystemState state;
    int scenario_id = 0;       // deterministic global order
    int step = 0;              // ramp step index
    int prefault_record = -1;  // record index of this step's base state,
                               // -1 when this record is itself the base
};

std::vector<double> ramp_schedule(const ScenarioConfig& config);

struct ContingencySample {
    std::vector<Outage> outages;
    std::vector<std::string> diagnostics;
};

// Uniform draw of `count` distinct outages over in-service lines and
// non-slack generators. Line outages that would split the grid are
// discarded and redrawn. Throws when count exceeds the candidate pool.
ContingencySample sample_contingencies(const NetworkCase& grid, int count, std::uint64_t seed);

struct GenerateResult {
    std::vector<StateRecord> records;
    std::vector<SystemState> base_states;  // per ramp step
    std::vector<int> prefault_step;        // per step: step whose converged
                                           // base serves as prefault state
    std::vector<std::string> diagnostics;

    // solved quantities backing a record: its own state when converged,
    // otherwise the prefault base ("state immediately before collapse")
    const SystemState& backing_state(std::size_t record_idx) const;
};

// Full database generation: per ramp step, solve the base state, then all
// sampled post-contingency states starting from that base. Deterministic
// for a fixed master seed at any worker count. Throws if the base case
// diverges at the first step.
GenerateResult generate_states(const NetworkCase& grid, const ScenarioConfig& config, const LoadModel& load_model,
                               const SolverSettings& settings, int workers = 1);

// Raw state database CSV (one row per record). Rows of non-converged
// states carry their prefault quantities with the outaged element zeroed,
// and the synthetic collapse SI.
void write_states_csv(std::ostream& out, const GenerateResult& result, const NetworkCase& grid,
                      const SecurityWeights& weights);

}  // namespace gridsec
