#pragma once

#include <string>
#include <vector>

#include "gridsec/power_flow.hpp"

namespace gridsec {

struct SecurityWeights {
    double w1 = 1.0;  // line overload weight
    double w2 = 1.0;  // voltage deviation weight
};

// Severity-ordered: Normal < Alarm < Emergency1 < Emergency2.
enum class SecurityClass { Normal = 0, Alarm = 1, Emergency1 = 2, Emergency2 = 3 };

inline const char* class_name(SecurityClass c) {
    switch (c) {
        case SecurityClass::Normal: return "normal";
        case SecurityClass::Alarm: return "alarm";
        case SecurityClass::Emergency1: return "emergency1";
        case SecurityClass::Emergency2: return "emergency2";
    }
    return "?";
}

SecurityClass class_from_name(const std::string& name);

struct SecurityScore {
    double si = 0.0;                   // percent
    std::vector<double> loi_per_line;  // percent, in-service branches in case order
    std::vector<double> vdi_per_bus;   // percent, case bus order
    SecurityClass class_label = SecurityClass::Normal;
};

// percent overload of one branch: (s - s_lim)/s * 100 when s exceeds the
// limit, else 0. The denominator is the flow itself.
double line_overload_index(double s_km, double s_lim);

// percent distance outside the closed voltage band [u_min, u_max], relative
// to the violated limit; 0 inside the band.
double voltage_deviation_index(double u, double u_min, double u_max);

// SI threshold classes: 0 -> Normal, (0,5] -> Alarm, (5,15] -> Emergency1,
// >15 -> Emergency2. Boundaries are exact.
SecurityClass classify(double si);

// Aggregate index over all buses and in-service branches of a converged
// state. Non-converged states never reach here; the scenario layer assigns
// them the synthetic collapse score.
SecurityScore security_index(const SystemState& state, const NetworkCase& grid, const SecurityWeights& weights);

// synthetic score for states the solver could not converge (voltage
// collapse endpoint): SI pinned above the Emergency2 threshold
constexpr double kCollapseSi = 100.0;

}  // namespace gridsec
