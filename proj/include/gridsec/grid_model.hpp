#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace gridsec {

enum class BusKind { Slack, PV, PQ };

struct Bus {
    int id = 0;
    BusKind kind = BusKind::PQ;
    double base_load_p = 0.0;  // MW
    double base_load_q = 0.0;  // MVAr
    double shunt_b = 0.0;      // pu susceptance on system base
    double v_min = 0.95;       // pu
    double v_max = 1.05;       // pu
};

struct Branch {
    int from_bus = 0;
    int to_bus = 0;
    double r = 0.0;           // pu
    double x = 0.0;           // pu
    double b_charging = 0.0;  // pu total line charging
    double s_lim = 0.0;       // MVA rating
    bool in_service = true;
};

struct Generator {
    int bus = 0;
    double p_set = 0.0;  // MW
    double q_min = 0.0;  // MVAr
    double q_max = 0.0;  // MVAr
    double v_set = 1.0;  // pu
    bool in_service = true;
};

// Static grid description. Immutable after construction; shared freely
// across concurrent solves.
struct NetworkCase {
    std::string name;
    double base_mva = 100.0;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Generator> generators;

    int bus_index(int bus_id) const {
        auto it = bus_lookup_.find(bus_id);
        if (it == bus_lookup_.end())
            throw std::out_of_range("unknown bus id " + std::to_string(bus_id));
        return it->second;
    }
    bool has_bus(int bus_id) const { return bus_lookup_.count(bus_id) != 0; }

    int slack_index() const;

    // generators attached to a bus (indices into generators)
    const std::vector<int>& generators_at(int bus_idx) const { return gens_at_bus_[static_cast<std::size_t>(bus_idx)]; }

    void rebuild_indexes();

private:
    std::unordered_map<int, int> bus_lookup_;
    std::vector<std::vector<int>> gens_at_bus_;
};

struct ValidationIssue {
    std::string what;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
};

class CaseParseError : public std::runtime_error {
public:
    CaseParseError(int line, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

// Parses the columnar case format (sections CASE/BUS/BRANCH/GEN, '#'
// comments). Throws CaseParseError on syntax errors, dangling bus
// references, duplicate bus ids and zero-reactance branches.
NetworkCase parse_case(const std::string& text);

// Canonical text form; parse(serialize(c)) reproduces c field-for-field.
std::string serialize_case(const NetworkCase& c);

// Semantic checks (slack count, limit ordering, bus kind vs generators,
// connectivity). Violations are data, not exceptions.
ValidationReport validate(const NetworkCase& c);

// true if the in-service branch set leaves the grid connected after
// removing branch `skip_branch` (-1 = no removal)
bool connected_without(const NetworkCase& c, int skip_branch);

// Bundled cases: "ieee118" (modified IEEE 118-bus) and "twobus".
const std::vector<std::string>& embedded_case_names();
NetworkCase load_embedded_case(const std::string& name);

}  // namespace gridsec
