#include "gridsec/security_index.hpp"

#include <cmath>
#include <stdexcept>

namespace gridsec {

SecurityClass class_from_name(const std::string& name) {
    if (name == "normal") return SecurityClass::Normal;
    if (name == "alarm") return SecurityClass::Alarm;
    if (name == "emergency1") return SecurityClass::Emergency1;
    if (name == "emergency2") return SecurityClass::Emergency2;
    throw std::invalid_argument("unknown security class '" + name + "'");
}

double line_overload_index(double s_km, double s_lim) {
    if (s_km > s_lim) return (s_km - s_lim) / s_km * 100.0;
    return 0.0;
}

double voltage_deviation_index(double u, double u_min, double u_max) {
    if (u < u_min) return (u_min - u) / u_min * 100.0;
    if (u > u_max) return (u - u_max) / u_max * 100.0;
    return 0.0;
}

SecurityClass classify(double si) {
    if (si <= 0.0) return SecurityClass::Normal;
    if (si <= 5.0) return SecurityClass::Alarm;
    if (si <= 15.0) return SecurityClass::Emergency1;
    return SecurityClass::Emergency2;
}

SecurityScore security_index(const SystemState& state, const NetworkCase& grid, const SecurityWeights& weights) {
    SecurityScore score;
    double loi_sum = 0.0, vdi_sum = 0.0;
    std::size_t n_lines = 0;
    for (std::size_t k = 0; k < grid.branches.size(); ++k) {
        const auto& br = grid.branches[k];
        if (!br.in_service || (state.outage.kind == OutageKind::Line && state.outage.element_id == static_cast<int>(k)))
            continue;
        const double loi = line_overload_index(state.branch_s[k], br.s_lim);
        score.loi_per_line.push_back(loi);
        loi_sum += loi;
        ++n_lines;
    }
    for (std::size_t i = 0; i < grid.buses.size(); ++i) {
        const auto& b = grid.buses[i];
        const double vdi = voltage_deviation_index(state.v_mag[i], b.v_min, b.v_max);
        score.vdi_per_bus.push_back(vdi);
        vdi_sum += vdi;
    }
    score.si = (weights.w1 * loi_sum + weights.w2 * vdi_sum) /
               static_cast<double>(n_lines + grid.buses.size());
    score.class_label = classify(score.si);
    return score;
}

}  // namespace gridsec
