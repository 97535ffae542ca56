#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "gridsec/grid_model.hpp"

namespace gridsec {

// Exponential static load characteristic. Below v_critical the load turns
// into the constant admittance matching its value at v_critical.
struct LoadModel {
    double alpha_p = 1.0;
    double alpha_q = 2.0;
    double v_critical = 0.7;  // pu
};

struct SolverSettings {
    double tolerance = 1e-8;  // pu max power mismatch
    int max_iterations = 30;
    bool flat_start = true;
};

enum class OutageKind { None, Line, Generator };

struct Outage {
    OutageKind kind = OutageKind::None;
    int element_id = -1;  // branch / generator index for Line / Generator

    static Outage none() { return {}; }
    static Outage line(int branch_index) { return {OutageKind::Line, branch_index}; }
    static Outage generator(int gen_index) { return {OutageKind::Generator, gen_index}; }
    bool operator==(const Outage&) const = default;
};

enum class SolveStatus { Converged, Diverged, Islanded };

// One operating point. Branch quantities are in MW/MVAr/MVA on both ends;
// out-of-service (or outaged) branches carry zeros.
struct SystemState {
    std::vector<double> v_mag;   // pu, case bus order
    std::vector<double> v_ang;   // rad, slack at 0
    std::vector<double> branch_p_from, branch_q_from;  // MW / MVAr
    std::vector<double> branch_p_to, branch_q_to;
    std::vector<double> branch_s;  // sending-end MVA
    double load_scale = 1.0;
    Outage outage;
    bool converged = false;
    SolveStatus status = SolveStatus::Diverged;
    int iterations = 0;
};

// Effective load drawn at voltage v (MW, MVAr). Exponential characteristic
// above model.v_critical, frozen constant admittance below it.
std::pair<double, double> effective_load(double base_p, double base_q, double v, double scale,
                                         const LoadModel& model);

// Newton-Raphson AC power flow in polar form with generator Q-limit
// enforcement (PV->PQ switching). Non-convergence and islanding come back
// as flags, not exceptions; `initial` seeds the iteration when
// settings.flat_start is false.
SystemState solve(const NetworkCase& grid, double load_scale, const Outage& outage, const LoadModel& load_model,
                  const SolverSettings& settings, const SystemState* initial = nullptr);

}  // namespace gridsec
