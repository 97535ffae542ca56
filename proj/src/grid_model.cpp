#include "gridsec/grid_model.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <sstream>

#include "gridsec/numeric_io.hpp"

namespace gridsec {

int NetworkCase::slack_index() const {
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (buses[i].kind == BusKind::Slack) return static_cast<int>(i);
    throw std::logic_error("case has no slack bus");
}

void NetworkCase::rebuild_indexes() {
    bus_lookup_.clear();
    for (std::size_t i = 0; i < buses.size(); ++i) bus_lookup_[buses[i].id] = static_cast<int>(i);
    gens_at_bus_.assign(buses.size(), {});
    for (std::size_t g = 0; g < generators.size(); ++g) {
        auto it = bus_lookup_.find(generators[g].bus);
        if (it != bus_lookup_.end()) gens_at_bus_[static_cast<std::size_t>(it->second)].push_back(static_cast<int>(g));
    }
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == '#') break;
        if (ch == ' ' || ch == '\t' || ch == '\r') {
            if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

double num(const std::vector<std::string>& tok, std::size_t i, int line) {
    try {
        return parse_double(tok.at(i));
    } catch (const std::exception&) {
        throw CaseParseError(line, "bad number in column " + std::to_string(i + 1) + ": '" + tok.at(i) + "'");
    }
}

int intval(const std::vector<std::string>& tok, std::size_t i, int line) {
    try {
        return static_cast<int>(parse_int(tok.at(i)));
    } catch (const std::exception&) {
        throw CaseParseError(line, "bad integer in column " + std::to_string(i + 1) + ": '" + tok.at(i) + "'");
    }
}

BusKind parse_kind(const std::string& s, int line) {
    std::string t;
    for (char ch : s) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    if (t == "slack" || t == "s") return BusKind::Slack;
    if (t == "pv") return BusKind::PV;
    if (t == "pq") return BusKind::PQ;
    throw CaseParseError(line, "unknown bus kind '" + s + "'");
}

}  // namespace

NetworkCase parse_case(const std::string& text) {
    NetworkCase c;
    enum class Section { None, Bus, Branch, Gen } section = Section::None;
    std::set<int> seen_ids;
    bool have_header = false;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto tok = tokenize(line);
        if (tok.empty()) continue;
        if (tok[0] == "CASE") {
            if (tok.size() != 3) throw CaseParseError(lineno, "CASE expects: CASE <name> <base_mva>");
            c.name = tok[1];
            c.base_mva = num(tok, 2, lineno);
            if (c.base_mva <= 0) throw CaseParseError(lineno, "base_mva must be positive");
            have_header = true;
            continue;
        }
        if (tok[0] == "BUS") { section = Section::Bus; continue; }
        if (tok[0] == "BRANCH") { section = Section::Branch; continue; }
        if (tok[0] == "GEN") { section = Section::Gen; continue; }

        switch (section) {
            case Section::None:
                throw CaseParseError(lineno, "data before any section header");
            case Section::Bus: {
                if (tok.size() != 5 && tok.size() != 7)
                    throw CaseParseError(lineno, "BUS row expects 5 or 7 columns, got " + std::to_string(tok.size()));
                Bus b;
                b.id = intval(tok, 0, lineno);
                if (!seen_ids.insert(b.id).second)
                    throw CaseParseError(lineno, "duplicate bus id " + std::to_string(b.id));
                b.kind = parse_kind(tok[1], lineno);
                b.base_load_p = num(tok, 2, lineno);
                b.base_load_q = num(tok, 3, lineno);
                b.shunt_b = num(tok, 4, lineno);
                if (tok.size() == 7) {
                    b.v_min = num(tok, 5, lineno);
                    b.v_max = num(tok, 6, lineno);
                }
                c.buses.push_back(b);
                break;
            }
            case Section::Branch: {
                if (tok.size() != 7)
                    throw CaseParseError(lineno, "BRANCH row expects 7 columns, got " + std::to_string(tok.size()));
                Branch br;
                br.from_bus = intval(tok, 0, lineno);
                br.to_bus = intval(tok, 1, lineno);
                br.r = num(tok, 2, lineno);
                br.x = num(tok, 3, lineno);
                br.b_charging = num(tok, 4, lineno);
                br.s_lim = num(tok, 5, lineno);
                br.in_service = intval(tok, 6, lineno) != 0;
                if (br.x == 0.0)
                    throw CaseParseError(lineno, "zero-reactance branch " + std::to_string(br.from_bus) + "-" +
                                                     std::to_string(br.to_bus));
                if (!seen_ids.count(br.from_bus))
                    throw CaseParseError(lineno, "branch references unknown bus " + std::to_string(br.from_bus));
                if (!seen_ids.count(br.to_bus))
                    throw CaseParseError(lineno, "branch references unknown bus " + std::to_string(br.to_bus));
                c.branches.push_back(br);
                break;
            }
            case Section::Gen: {
                if (tok.size() != 6)
                    throw CaseParseError(lineno, "GEN row expects 6 columns, got " + std::to_string(tok.size()));
                Generator g;
                g.bus = intval(tok, 0, lineno);
                g.p_set = num(tok, 1, lineno);
                g.q_min = num(tok, 2, lineno);
                g.q_max = num(tok, 3, lineno);
                g.v_set = num(tok, 4, lineno);
                g.in_service = intval(tok, 5, lineno) != 0;
                if (!seen_ids.count(g.bus))
                    throw CaseParseError(lineno, "generator references unknown bus " + std::to_string(g.bus));
                c.generators.push_back(g);
                break;
            }
        }
    }
    if (!have_header) throw CaseParseError(lineno, "missing CASE header");
    if (c.buses.empty()) throw CaseParseError(lineno, "case has no buses");
    c.rebuild_indexes();
    return c;
}

std::string serialize_case(const NetworkCase& c) {
    std::string out;
    out += "CASE " + c.name + " " + format_double(c.base_mva) + "\n";
    out += "BUS\n# id kind load_p_MW load_q_MVAr shunt_b_pu v_min_pu v_max_pu\n";
    for (const auto& b : c.buses) {
        const char* kind = b.kind == BusKind::Slack ? "slack" : (b.kind == BusKind::PV ? "PV" : "PQ");
        out += std::to_string(b.id) + " " + kind + " " + format_double(b.base_load_p) + " " +
               format_double(b.base_load_q) + " " + format_double(b.shunt_b) + " " + format_double(b.v_min) + " " +
               format_double(b.v_max) + "\n";
    }
    out += "BRANCH\n# from to r_pu x_pu b_charging_pu s_lim_MVA in_service\n";
    for (const auto& br : c.branches) {
        out += std::to_string(br.from_bus) + " " + std::to_string(br.to_bus) + " " + format_double(br.r) + " " +
               format_double(br.x) + " " + format_double(br.b_charging) + " " + format_double(br.s_lim) + " " +
               (br.in_service ? "1" : "0") + "\n";
    }
    out += "GEN\n# bus p_set_MW q_min_MVAr q_max_MVAr v_set_pu in_service\n";
    for (const auto& g : c.generators) {
        out += std::to_string(g.bus) + " " + format_double(g.p_set) + " " + format_double(g.q_min) + " " +
               format_double(g.q_max) + " " + format_double(g.v_set) + " " + (g.in_service ? "1" : "0") + "\n";
    }
    return out;
}

bool connected_without(const NetworkCase& c, int skip_branch) {
    const std::size_t n = c.buses.size();
    if (n == 0) return true;
    std::vector<std::vector<int>> adj(n);
    for (std::size_t k = 0; k < c.branches.size(); ++k) {
        if (static_cast<int>(k) == skip_branch || !c.branches[k].in_service) continue;
        int i = c.bus_index(c.branches[k].from_bus);
        int j = c.bus_index(c.branches[k].to_bus);
        adj[static_cast<std::size_t>(i)].push_back(j);
        adj[static_cast<std::size_t>(j)].push_back(i);
    }
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    std::size_t count = 1;
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v : adj[static_cast<std::size_t>(u)])
            if (!seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = 1;
                ++count;
                q.push(v);
            }
    }
    return count == n;
}

ValidationReport validate(const NetworkCase& c) {
    ValidationReport rep;
    auto add = [&rep](std::string msg) { rep.issues.push_back({std::move(msg)}); };

    int slack_count = 0;
    for (const auto& b : c.buses) {
        if (b.kind == BusKind::Slack) ++slack_count;
        if (!(b.v_min > 0)) add("bus " + std::to_string(b.id) + ": v_min must be positive");
        if (!(b.v_min < b.v_max)) add("bus " + std::to_string(b.id) + ": requires v_min < v_max");
    }
    if (slack_count != 1) add("case must have exactly one slack bus, found " + std::to_string(slack_count));

    for (std::size_t k = 0; k < c.branches.size(); ++k) {
        const auto& br = c.branches[k];
        if (br.from_bus == br.to_bus)
            add("branch " + std::to_string(k) + ": from_bus equals to_bus (" + std::to_string(br.from_bus) + ")");
        if (!(br.s_lim > 0)) add("branch " + std::to_string(k) + ": s_lim must be positive");
    }

    for (std::size_t g = 0; g < c.generators.size(); ++g) {
        const auto& gen = c.generators[g];
        if (gen.q_min > gen.q_max) add("generator " + std::to_string(g) + ": q_min > q_max");
    }

    // bus kind consistency with attached generation
    for (std::size_t i = 0; i < c.buses.size(); ++i) {
        const auto& b = c.buses[i];
        bool has_gen = false;
        for (int g : c.generators_at(static_cast<int>(i)))
            if (c.generators[static_cast<std::size_t>(g)].in_service) has_gen = true;
        if (b.kind == BusKind::PV && !has_gen)
            add("bus " + std::to_string(b.id) + ": PV bus without in-service generator");
        if (b.kind == BusKind::PQ && has_gen)
            add("bus " + std::to_string(b.id) + ": PQ bus with in-service generator");
    }

    if (slack_count == 1 && !c.buses.empty() && !connected_without(c, -1))
        add("grid is not connected with all in-service branches");
    return rep;
}

}  // namespace gridsec
