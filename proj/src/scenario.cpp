#include "gridsec/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "gridsec/dataset.hpp"
#include "gridsec/numeric_io.hpp"
#include "gridsec/parallel.hpp"
#include "gridsec/rng.hpp"

namespace gridsec {

std::vector<double> ramp_schedule(const ScenarioConfig& config) {
    if (!(config.scale_step > 0)) throw std::invalid_argument("scale_step must be positive");
    if (config.scale_start > config.scale_end) throw std::invalid_argument("scale_start exceeds scale_end");
    std::vector<double> out;
    const double eps = config.scale_step * 1e-9;
    for (int k = 0;; ++k) {
        const double s = config.scale_start + k * config.scale_step;
        if (s >= config.scale_end - eps) break;
        out.push_back(s);
    }
    out.push_back(config.scale_end);
    return out;
}

ContingencySample sample_contingencies(const NetworkCase& grid, int count, std::uint64_t seed) {
    ContingencySample result;
    struct Candidate {
        Outage outage;
        std::string label;
    };
    std::vector<Candidate> pool;
    const int slack = grid.slack_index();
    for (std::size_t k = 0; k < grid.branches.size(); ++k) {
        const auto& br = grid.branches[k];
        if (!br.in_service) continue;
        pool.push_back({Outage::line(static_cast<int>(k)),
                        "line " + std::to_string(br.from_bus) + "-" + std::to_string(br.to_bus)});
    }
    for (std::size_t g = 0; g < grid.generators.size(); ++g) {
        const auto& unit = grid.generators[g];
        if (!unit.in_service) continue;
        if (grid.bus_index(unit.bus) == slack) continue;  // slack unit is never outaged
        pool.push_back({Outage::generator(static_cast<int>(g)), "generator at bus " + std::to_string(unit.bus)});
    }
    if (count > static_cast<int>(pool.size()))
        throw std::invalid_argument("requested " + std::to_string(count) + " contingencies but only " +
                                    std::to_string(pool.size()) + " removable elements exist");

    Rng rng(seed);
    const int cap = 10 * std::max(count, 1);
    int discarded = 0;
    std::size_t head = 0;  // pool[0..head) already consumed
    while (static_cast<int>(result.outages.size()) < count && head < pool.size() && discarded < cap) {
        const std::size_t pick = head + static_cast<std::size_t>(rng.next_below(pool.size() - head));
        std::swap(pool[head], pool[pick]);
        const Candidate& cand = pool[head];
        ++head;
        if (cand.outage.kind == OutageKind::Line && !connected_without(grid, cand.outage.element_id)) {
            result.diagnostics.push_back("skipped islanding outage of " + cand.label);
            ++discarded;
            continue;
        }
        result.outages.push_back(cand.outage);
    }
    if (static_cast<int>(result.outages.size()) < count)
        result.diagnostics.push_back("only " + std::to_string(result.outages.size()) + " of " +
                                     std::to_string(count) + " requested outages are feasible");
    return result;
}

const SystemState& GenerateResult::backing_state(std::size_t record_idx) const {
    const StateRecord& rec = records[record_idx];
    if (rec.state.converged) return rec.state;
    return base_states[static_cast<std::size_t>(prefault_step[static_cast<std::size_t>(rec.step)])];
}

GenerateResult generate_states(const NetworkCase& grid, const ScenarioConfig& config, const LoadModel& load_model,
                               const SolverSettings& settings, int workers) {
    auto report = validate(grid);
    if (!report.ok()) throw std::invalid_argument("invalid case: " + report.issues.front().what);

    GenerateResult out;
    const auto schedule = ramp_schedule(config);
    out.base_states.reserve(schedule.size());
    out.prefault_step.assign(schedule.size(), 0);

    SolverSettings warm = settings;
    warm.flat_start = false;

    int last_converged_step = -1;

    for (std::size_t step = 0; step < schedule.size(); ++step) {
        const double scale = schedule[step];
        const SystemState* seed_state =
            last_converged_step >= 0 ? &out.base_states[static_cast<std::size_t>(last_converged_step)] : nullptr;
        SystemState base = seed_state == nullptr ? solve(grid, scale, Outage::none(), load_model, settings)
                                                 : solve(grid, scale, Outage::none(), load_model, warm, seed_state);
        if (step == 0 && !base.converged)
            throw std::runtime_error("base case diverged at the first ramp step (scale " + format_double(scale) +
                                     "); check case and ramp configuration");
        out.base_states.push_back(base);
        if (base.converged) last_converged_step = static_cast<int>(step);
        out.prefault_step[step] = last_converged_step;

        int base_record = -1;
        if (config.include_base_state) {
            StateRecord rec;
            rec.state = base;
            rec.step = static_cast<int>(step);
            rec.prefault_record = -1;
            rec.scenario_id = static_cast<int>(out.records.size());
            base_record = rec.scenario_id;
            out.records.push_back(std::move(rec));
        }

        if (!base.converged) {
            out.diagnostics.push_back("base state diverged at scale " + format_double(scale) +
                                      "; contingencies for this step skipped");
            continue;
        }

        auto sampled = sample_contingencies(grid, config.contingencies_per_step,
                                            mix_seed(config.master_seed, static_cast<std::uint64_t>(step)));
        for (auto& d : sampled.diagnostics)
            out.diagnostics.push_back("step " + std::to_string(step) + ": " + std::move(d));

        std::vector<SystemState> post(sampled.outages.size());
        const SystemState& base_ref = out.base_states.back();
        parallel_for(static_cast<int>(sampled.outages.size()), workers, [&](int i) {
            post[static_cast<std::size_t>(i)] =
                solve(grid, scale, sampled.outages[static_cast<std::size_t>(i)], load_model, warm, &base_ref);
        });

        for (std::size_t i = 0; i < post.size(); ++i) {
            if (post[i].status == SolveStatus::Islanded) {
                out.diagnostics.push_back("step " + std::to_string(step) + ": islanded network, scenario skipped");
                continue;
            }
            StateRecord rec;
            rec.state = std::move(post[i]);
            rec.step = static_cast<int>(step);
            rec.prefault_record = base_record;
            rec.scenario_id = static_cast<int>(out.records.size());
            out.records.push_back(std::move(rec));
        }
    }
    return out;
}

void write_states_csv(std::ostream& out, const GenerateResult& result, const NetworkCase& grid,
                      const SecurityWeights& weights) {
    out << "scenario_id,step,load_scale,outage_kind,outage_element,converged,iterations,si,class";
    for (const auto& name : feature_schema(grid)) out << "," << name;
    out << "\n";
    for (std::size_t idx = 0; idx < result.records.size(); ++idx) {
        const StateRecord& rec = result.records[idx];
        const SystemState& backing = result.backing_state(idx);
        double si;
        SecurityClass label;
        if (rec.state.converged) {
            auto score = security_index(rec.state, grid, weights);
            si = score.si;
            label = score.class_label;
        } else {
            si = kCollapseSi;
            label = classify(si);
        }
        const char* kind = rec.state.outage.kind == OutageKind::None
                               ? "none"
                               : (rec.state.outage.kind == OutageKind::Line ? "line" : "generator");
        out << rec.scenario_id << "," << rec.step << "," << format_double(rec.state.load_scale) << "," << kind << ","
            << rec.state.outage.element_id << "," << (rec.state.converged ? 1 : 0) << "," << rec.state.iterations
            << "," << format_double(si) << "," << class_name(label);
        const bool zero_line = !rec.state.converged && rec.state.outage.kind == OutageKind::Line;
        for (double x : backing.v_mag) out << "," << format_double(x);
        for (std::size_t k = 0; k < grid.branches.size(); ++k) {
            const double p = (zero_line && static_cast<int>(k) == rec.state.outage.element_id) ? 0.0
                                                                                               : backing.branch_p_from[k];
            out << "," << format_double(p);
        }
        for (std::size_t k = 0; k < grid.branches.size(); ++k) {
            const double q = (zero_line && static_cast<int>(k) == rec.state.outage.element_id) ? 0.0
                                                                                               : backing.branch_q_from[k];
            out << "," << format_double(q);
        }
        out << "\n";
    }
}

}  // namespace gridsec
