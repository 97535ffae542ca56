#include "gridsec/power_flow.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <cmath>
#include <complex>
#include <queue>

namespace gridsec {

std::pair<double, double> effective_load(double base_p, double base_q, double v, double scale,
                                         const LoadModel& model) {
    const double vc = model.v_critical;
    if (v >= vc) {
        return {scale * base_p * std::pow(v, model.alpha_p), scale * base_q * std::pow(v, model.alpha_q)};
    }
    // constant admittance frozen at v_critical: value at vc times (v/vc)^2
    const double ratio2 = (v / vc) * (v / vc);
    return {scale * base_p * std::pow(vc, model.alpha_p) * ratio2, scale * base_q * std::pow(vc, model.alpha_q) * ratio2};
}

namespace {

// d(effective load)/dV for one component with exponent alpha
double load_derivative(double base, double v, double scale, double alpha, double vc) {
    if (v >= vc) return scale * base * alpha * std::pow(v, alpha - 1.0);
    return scale * base * std::pow(vc, alpha) * 2.0 * v / (vc * vc);
}

enum class Mode { Slack, PV, PQ };

struct GenAggregate {
    double p_set = 0.0;   // pu
    double q_min = 0.0;   // pu
    double q_max = 0.0;   // pu
    double v_set = 1.0;
    bool present = false;
};

bool island_free(const NetworkCase& grid, const Outage& outage) {
    int skip = outage.kind == OutageKind::Line ? outage.element_id : -1;
    return connected_without(grid, skip);
}

}  // namespace

SystemState solve(const NetworkCase& grid, double load_scale, const Outage& outage, const LoadModel& load_model,
                  const SolverSettings& settings, const SystemState* initial) {
    const int n = static_cast<int>(grid.buses.size());
    const int nbr = static_cast<int>(grid.branches.size());
    const double base = grid.base_mva;

    SystemState st;
    st.load_scale = load_scale;
    st.outage = outage;
    st.v_mag.assign(static_cast<std::size_t>(n), 1.0);
    st.v_ang.assign(static_cast<std::size_t>(n), 0.0);
    st.branch_p_from.assign(static_cast<std::size_t>(nbr), 0.0);
    st.branch_q_from.assign(static_cast<std::size_t>(nbr), 0.0);
    st.branch_p_to.assign(static_cast<std::size_t>(nbr), 0.0);
    st.branch_q_to.assign(static_cast<std::size_t>(nbr), 0.0);
    st.branch_s.assign(static_cast<std::size_t>(nbr), 0.0);

    // outage preconditions
    if (outage.kind == OutageKind::Line) {
        if (outage.element_id < 0 || outage.element_id >= nbr)
            throw std::invalid_argument("line outage index out of range");
        if (!grid.branches[static_cast<std::size_t>(outage.element_id)].in_service)
            throw std::invalid_argument("line outage references an out-of-service branch");
    } else if (outage.kind == OutageKind::Generator) {
        if (outage.element_id < 0 || outage.element_id >= static_cast<int>(grid.generators.size()))
            throw std::invalid_argument("generator outage index out of range");
        const auto& g = grid.generators[static_cast<std::size_t>(outage.element_id)];
        if (!g.in_service) throw std::invalid_argument("generator outage references an out-of-service unit");
        if (grid.buses[static_cast<std::size_t>(grid.bus_index(g.bus))].kind == BusKind::Slack)
            throw std::invalid_argument("slack generator cannot be outaged");
    }

    if (!island_free(grid, outage)) {
        st.status = SolveStatus::Islanded;
        return st;
    }

    // aggregate in-service generation per bus, minus the outaged unit
    std::vector<GenAggregate> gen(static_cast<std::size_t>(n));
    for (std::size_t g = 0; g < grid.generators.size(); ++g) {
        const auto& unit = grid.generators[g];
        if (!unit.in_service) continue;
        if (outage.kind == OutageKind::Generator && outage.element_id == static_cast<int>(g)) continue;
        auto& agg = gen[static_cast<std::size_t>(grid.bus_index(unit.bus))];
        agg.p_set += unit.p_set / base;
        agg.q_min += unit.q_min / base;
        agg.q_max += unit.q_max / base;
        agg.v_set = unit.v_set;
        agg.present = true;
    }

    const int slack = grid.slack_index();
    std::vector<Mode> mode(static_cast<std::size_t>(n), Mode::PQ);
    for (int i = 0; i < n; ++i)
        if (i == slack)
            mode[static_cast<std::size_t>(i)] = Mode::Slack;
        else if (gen[static_cast<std::size_t>(i)].present)
            mode[static_cast<std::size_t>(i)] = Mode::PV;

    // admittance matrix as adjacency (skip outaged line)
    std::vector<std::vector<std::pair<int, std::complex<double>>>> Y(static_cast<std::size_t>(n));
    auto yadd = [&Y](int i, int j, std::complex<double> v) {
        for (auto& e : Y[static_cast<std::size_t>(i)])
            if (e.first == j) {
                e.second += v;
                return;
            }
        Y[static_cast<std::size_t>(i)].emplace_back(j, v);
    };
    for (int k = 0; k < nbr; ++k) {
        const auto& br = grid.branches[static_cast<std::size_t>(k)];
        if (!br.in_service || (outage.kind == OutageKind::Line && outage.element_id == k)) continue;
        int i = grid.bus_index(br.from_bus);
        int j = grid.bus_index(br.to_bus);
        std::complex<double> y = 1.0 / std::complex<double>(br.r, br.x);
        std::complex<double> sh(0.0, br.b_charging / 2.0);
        yadd(i, i, y + sh);
        yadd(j, j, y + sh);
        yadd(i, j, -y);
        yadd(j, i, -y);
    }
    for (int i = 0; i < n; ++i) yadd(i, i, std::complex<double>(0.0, grid.buses[static_cast<std::size_t>(i)].shunt_b));

    std::vector<double>& vm = st.v_mag;
    std::vector<double>& va = st.v_ang;
    if (!settings.flat_start && initial && initial->v_mag.size() == static_cast<std::size_t>(n)) {
        vm = initial->v_mag;
        va = initial->v_ang;
    }
    // PV and slack buses start on their setpoints
    for (int i = 0; i < n; ++i)
        if (mode[static_cast<std::size_t>(i)] != Mode::PQ) vm[static_cast<std::size_t>(i)] = gen[static_cast<std::size_t>(i)].present ? gen[static_cast<std::size_t>(i)].v_set : 1.0;
    va[static_cast<std::size_t>(slack)] = 0.0;

    // buses switched to PQ at a Q limit: fixed generator Q. flip budget
    // avoids PV<->PQ limit cycling.
    std::vector<double> q_fixed(static_cast<std::size_t>(n), 0.0);
    std::vector<char> at_qmax(static_cast<std::size_t>(n), 0);
    std::vector<int> flips(static_cast<std::size_t>(n), 0);

    std::vector<double> pinj(static_cast<std::size_t>(n)), qinj(static_cast<std::size_t>(n));
    auto compute_injections = [&] {
        for (int i = 0; i < n; ++i) {
            double p = 0.0, q = 0.0;
            const double vi = vm[static_cast<std::size_t>(i)];
            const double ai = va[static_cast<std::size_t>(i)];
            for (const auto& [j, y] : Y[static_cast<std::size_t>(i)]) {
                const double vj = vm[static_cast<std::size_t>(j)];
                const double t = ai - va[static_cast<std::size_t>(j)];
                const double c = std::cos(t), s = std::sin(t);
                p += vi * vj * (y.real() * c + y.imag() * s);
                q += vi * vj * (y.real() * s - y.imag() * c);
            }
            pinj[static_cast<std::size_t>(i)] = p;
            qinj[static_cast<std::size_t>(i)] = q;
        }
    };

    auto load_at = [&](int i, double v) {
        const auto& b = grid.buses[static_cast<std::size_t>(i)];
        auto [p, q] = effective_load(b.base_load_p, b.base_load_q, v, load_scale, load_model);
        return std::make_pair(p / base, q / base);
    };

    bool solved = false;
    int it = 0;
    for (; it < settings.max_iterations; ++it) {
        compute_injections();

        // mismatch under current bus modes
        std::vector<int> p_rows, q_rows;
        p_rows.reserve(static_cast<std::size_t>(n));
        q_rows.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            if (mode[static_cast<std::size_t>(i)] != Mode::Slack) p_rows.push_back(i);
            if (mode[static_cast<std::size_t>(i)] == Mode::PQ) q_rows.push_back(i);
        }
        std::vector<int> pos_p(static_cast<std::size_t>(n), -1), pos_q(static_cast<std::size_t>(n), -1);
        for (std::size_t k = 0; k < p_rows.size(); ++k) pos_p[static_cast<std::size_t>(p_rows[k])] = static_cast<int>(k);
        for (std::size_t k = 0; k < q_rows.size(); ++k) pos_q[static_cast<std::size_t>(q_rows[k])] = static_cast<int>(k + p_rows.size());
        const int m = static_cast<int>(p_rows.size() + q_rows.size());

        Eigen::VectorXd f(m);
        double max_mis = 0.0;
        for (int i : p_rows) {
            auto [pl, ql] = load_at(i, vm[static_cast<std::size_t>(i)]);
            (void)ql;
            const double p_spec = gen[static_cast<std::size_t>(i)].p_set - pl;
            const double mis = pinj[static_cast<std::size_t>(i)] - p_spec;
            f(pos_p[static_cast<std::size_t>(i)]) = mis;
            max_mis = std::max(max_mis, std::abs(mis));
        }
        for (int i : q_rows) {
            auto [pl, ql] = load_at(i, vm[static_cast<std::size_t>(i)]);
            (void)pl;
            const double qg = gen[static_cast<std::size_t>(i)].present && flips[static_cast<std::size_t>(i)] > 0 ? q_fixed[static_cast<std::size_t>(i)] : 0.0;
            const double q_spec = qg - ql;
            const double mis = qinj[static_cast<std::size_t>(i)] - q_spec;
            f(pos_q[static_cast<std::size_t>(i)] - static_cast<int>(p_rows.size()) + static_cast<int>(p_rows.size())) = mis;
            max_mis = std::max(max_mis, std::abs(mis));
        }

        if (max_mis < settings.tolerance) {
            // check Q limits before declaring victory
            bool switched = false;
            for (int i = 0; i < n; ++i) {
                auto& agg = gen[static_cast<std::size_t>(i)];
                if (!agg.present || i == slack) continue;
                if (mode[static_cast<std::size_t>(i)] == Mode::PV) {
                    auto [pl, ql] = load_at(i, vm[static_cast<std::size_t>(i)]);
                    (void)pl;
                    const double qg = qinj[static_cast<std::size_t>(i)] + ql;
                    if (qg > agg.q_max + 1e-9 && flips[static_cast<std::size_t>(i)] < 4) {
                        mode[static_cast<std::size_t>(i)] = Mode::PQ;
                        q_fixed[static_cast<std::size_t>(i)] = agg.q_max;
                        at_qmax[static_cast<std::size_t>(i)] = 1;
                        ++flips[static_cast<std::size_t>(i)];
                        switched = true;
                    } else if (qg < agg.q_min - 1e-9 && flips[static_cast<std::size_t>(i)] < 4) {
                        mode[static_cast<std::size_t>(i)] = Mode::PQ;
                        q_fixed[static_cast<std::size_t>(i)] = agg.q_min;
                        at_qmax[static_cast<std::size_t>(i)] = 0;
                        ++flips[static_cast<std::size_t>(i)];
                        switched = true;
                    }
                } else if (flips[static_cast<std::size_t>(i)] > 0 && flips[static_cast<std::size_t>(i)] < 4) {
                    // released when the bus voltage recovers past the setpoint
                    const bool release = at_qmax[static_cast<std::size_t>(i)] ? vm[static_cast<std::size_t>(i)] > agg.v_set + 1e-9
                                                                              : vm[static_cast<std::size_t>(i)] < agg.v_set - 1e-9;
                    if (release) {
                        mode[static_cast<std::size_t>(i)] = Mode::PV;
                        vm[static_cast<std::size_t>(i)] = agg.v_set;
                        ++flips[static_cast<std::size_t>(i)];
                        switched = true;
                    }
                }
            }
            if (!switched) {
                solved = true;
                break;
            }
            continue;  // re-enter with new modes, plenty of iterations left
        }

        // Jacobian: rows/cols ordered [dP rows | dQ rows] x [theta | V]
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(m) * 8);
        const double vc = load_model.v_critical;
        for (int i = 0; i < n; ++i) {
            if (mode[static_cast<std::size_t>(i)] == Mode::Slack) continue;
            const double vi = vm[static_cast<std::size_t>(i)];
            const double ai = va[static_cast<std::size_t>(i)];
            const int rp = pos_p[static_cast<std::size_t>(i)];
            const int rq = pos_q[static_cast<std::size_t>(i)];
            double Gii = 0.0, Bii = 0.0;
            for (const auto& [j, y] : Y[static_cast<std::size_t>(i)]) {
                if (j == i) {
                    Gii = y.real();
                    Bii = y.imag();
                    continue;
                }
                const double vj = vm[static_cast<std::size_t>(j)];
                const double t = ai - va[static_cast<std::size_t>(j)];
                const double c = std::cos(t), s = std::sin(t);
                const double dp_da = vi * vj * (y.real() * s - y.imag() * c);   // dPi/dtheta_j
                const double dp_dv = vi * (y.real() * c + y.imag() * s);        // dPi/dVj
                const double dq_da = -vi * vj * (y.real() * c + y.imag() * s);  // dQi/dtheta_j
                const double dq_dv = vi * (y.real() * s - y.imag() * c);        // dQi/dVj
                if (pos_p[static_cast<std::size_t>(j)] >= 0) {
                    trip.emplace_back(rp, pos_p[static_cast<std::size_t>(j)], dp_da);
                    if (rq >= 0) trip.emplace_back(rq, pos_p[static_cast<std::size_t>(j)], dq_da);
                }
                if (pos_q[static_cast<std::size_t>(j)] >= 0) {
                    trip.emplace_back(rp, pos_q[static_cast<std::size_t>(j)], dp_dv);
                    if (rq >= 0) trip.emplace_back(rq, pos_q[static_cast<std::size_t>(j)], dq_dv);
                }
            }
            const double pi = pinj[static_cast<std::size_t>(i)];
            const double qi = qinj[static_cast<std::size_t>(i)];
            // diagonal entries
            const double dpi_dai = -qi - Bii * vi * vi;
            const double dpi_dvi = pi / vi + Gii * vi;
            const double dqi_dai = pi - Gii * vi * vi;
            const double dqi_dvi = qi / vi - Bii * vi;
            const auto& b = grid.buses[static_cast<std::size_t>(i)];
            const double dpl = load_derivative(b.base_load_p, vi, load_scale, load_model.alpha_p, vc) / base;
            const double dql = load_derivative(b.base_load_q, vi, load_scale, load_model.alpha_q, vc) / base;
            trip.emplace_back(rp, rp, dpi_dai);
            if (rq >= 0) {
                trip.emplace_back(rp, rq, dpi_dvi + dpl);  // F = Pinj - (Pgen - Pload(V))
                trip.emplace_back(rq, rp, dqi_dai);
                trip.emplace_back(rq, rq, dqi_dvi + dql);
            }
        }

        Eigen::SparseMatrix<double> J(m, m);
        J.setFromTriplets(trip.begin(), trip.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.analyzePattern(J);
        lu.factorize(J);
        if (lu.info() != Eigen::Success) {
            st.iterations = it + 1;
            st.status = SolveStatus::Diverged;
            return st;
        }
        Eigen::VectorXd dx = lu.solve(f);
        if (!dx.allFinite()) {
            st.iterations = it + 1;
            st.status = SolveStatus::Diverged;
            return st;
        }

        for (int i : p_rows) va[static_cast<std::size_t>(i)] -= dx(pos_p[static_cast<std::size_t>(i)]);
        for (int i : q_rows) {
            double& v = vm[static_cast<std::size_t>(i)];
            v -= dx(pos_q[static_cast<std::size_t>(i)]);
            if (v < 0.05) v = 0.05;
            if (v > 2.0) v = 2.0;
        }
    }

    st.iterations = it + (solved ? 1 : 0);
    if (!solved) {
        st.status = SolveStatus::Diverged;
        return st;
    }
    st.converged = true;
    st.status = SolveStatus::Converged;

    // branch flows at the solution
    for (int k = 0; k < nbr; ++k) {
        const auto& br = grid.branches[static_cast<std::size_t>(k)];
        if (!br.in_service || (outage.kind == OutageKind::Line && outage.element_id == k)) continue;
        const int i = grid.bus_index(br.from_bus);
        const int j = grid.bus_index(br.to_bus);
        const std::complex<double> vi = std::polar(vm[static_cast<std::size_t>(i)], va[static_cast<std::size_t>(i)]);
        const std::complex<double> vj = std::polar(vm[static_cast<std::size_t>(j)], va[static_cast<std::size_t>(j)]);
        const std::complex<double> y = 1.0 / std::complex<double>(br.r, br.x);
        const std::complex<double> sh(0.0, br.b_charging / 2.0);
        const std::complex<double> s_from = vi * std::conj((vi - vj) * y + vi * sh) * base;
        const std::complex<double> s_to = vj * std::conj((vj - vi) * y + vj * sh) * base;
        st.branch_p_from[static_cast<std::size_t>(k)] = s_from.real();
        st.branch_q_from[static_cast<std::size_t>(k)] = s_from.imag();
        st.branch_p_to[static_cast<std::size_t>(k)] = s_to.real();
        st.branch_q_to[static_cast<std::size_t>(k)] = s_to.imag();
        st.branch_s[static_cast<std::size_t>(k)] = std::abs(s_from);
    }
    return st;
}

}  // namespace gridsec
