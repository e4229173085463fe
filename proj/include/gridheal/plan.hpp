#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridheal/errors.hpp"
#include "gridheal/geometry.hpp"
#include "gridheal/scenario.hpp"

namespace gridheal {

struct DscPlacement {
    std::string dsc;
    Point position;
    int candidate = -1; // index into the raw CandidateSet (-1 in continuous mode)
};

struct PQ {
    double p = 0.0;
    double q = 0.0;
};

/// Decided restoration: branch states, DSC deployment, switch assignments,
/// pickups and the operating point. All maps are keyed by entity id, which
/// keeps the JSON form deterministic.
struct RestorationPlan {
    std::string strategy;
    std::map<std::string, int> branch_state;       // alpha, every branch (faulted ones are 0)
    std::vector<DscPlacement> dsc_placements;      // sorted by dsc id
    std::vector<std::pair<std::string, std::string>> assignments; // (switch addr, dsc id), sorted
    std::map<std::string, int> operable;           // gamma per switch address
    std::map<std::string, int> switchable;         // mu per branch
    std::map<std::string, int> pickups;            // delta per node
    std::map<std::string, int> energized;          // e per node
    std::map<std::string, PQ> dg_dispatch;         // per DG node
    std::map<std::string, PQ> flows;               // per closed branch
    std::map<std::string, double> voltages;        // per energized node
    double restored_mw = 0.0;
    double travel_penalty = 0.0;
    double objective = 0.0;
};

inline nlohmann::json plan_to_json(const RestorationPlan& p) {
    using nlohmann::json;
    json j;
    j["strategy"] = p.strategy;
    j["branch_state"] = p.branch_state;
    json placements = json::array();
    for (const DscPlacement& d : p.dsc_placements)
        placements.push_back(json{{"dsc", d.dsc}, {"x_m", d.position.x}, {"y_m", d.position.y},
                                  {"candidate", d.candidate}});
    j["dsc_placements"] = std::move(placements);
    json assigns = json::array();
    for (const auto& [sw, dsc] : p.assignments)
        assigns.push_back(json{{"switch", sw}, {"dsc", dsc}});
    j["assignments"] = std::move(assigns);
    j["operable"] = p.operable;
    j["switchable"] = p.switchable;
    j["pickups"] = p.pickups;
    j["energized"] = p.energized;
    json dg = json::object();
    for (const auto& [id, pq] : p.dg_dispatch) dg[id] = json{{"p_mw", pq.p}, {"q_mvar", pq.q}};
    j["dg_dispatch"] = std::move(dg);
    json flows = json::object();
    for (const auto& [id, pq] : p.flows) flows[id] = json{{"p_mw", pq.p}, {"q_mvar", pq.q}};
    j["flows"] = std::move(flows);
    j["voltages"] = p.voltages;
    j["restored_mw"] = p.restored_mw;
    j["travel_penalty"] = p.travel_penalty;
    j["objective"] = p.objective;
    return j;
}

inline std::string serialize_plan(const RestorationPlan& p, int indent = 2) {
    return plan_to_json(p).dump(indent) + "\n";
}

inline RestorationPlan parse_plan(const std::string& text) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("plan is not valid JSON: ") + e.what());
    }
    RestorationPlan p;
    try {
        p.strategy = j.value("strategy", std::string{});
        p.branch_state = j.at("branch_state").get<std::map<std::string, int>>();
        for (const auto& jd : j.at("dsc_placements")) {
            p.dsc_placements.push_back(DscPlacement{jd.at("dsc").get<std::string>(),
                                                    Point{jd.at("x_m").get<double>(), jd.at("y_m").get<double>()},
                                                    jd.value("candidate", -1)});
        }
        for (const auto& ja : j.at("assignments"))
            p.assignments.emplace_back(ja.at("switch").get<std::string>(), ja.at("dsc").get<std::string>());
        p.operable = j.at("operable").get<std::map<std::string, int>>();
        p.switchable = j.at("switchable").get<std::map<std::string, int>>();
        p.pickups = j.at("pickups").get<std::map<std::string, int>>();
        p.energized = j.at("energized").get<std::map<std::string, int>>();
        for (const auto& [id, jpq] : j.at("dg_dispatch").items())
            p.dg_dispatch[id] = PQ{jpq.at("p_mw").get<double>(), jpq.at("q_mvar").get<double>()};
        for (const auto& [id, jpq] : j.at("flows").items())
            p.flows[id] = PQ{jpq.at("p_mw").get<double>(), jpq.at("q_mvar").get<double>()};
        p.voltages = j.at("voltages").get<std::map<std::string, double>>();
        p.restored_mw = j.at("restored_mw").get<double>();
        p.travel_penalty = j.at("travel_penalty").get<double>();
        p.objective = j.at("objective").get<double>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("plan: ") + e.what());
    }
    return p;
}

/// Connected components of the closed-branch subgraph restricted to
/// energized nodes. Returns one label per node index, -1 for nodes that are
/// not energized; labels are ordered by smallest member node index.
inline std::vector<int> energized_components(const Scenario& s, const RestorationPlan& plan) {
    const int n = static_cast<int>(s.nodes.size());
    std::vector<int> parent(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) parent[static_cast<std::size_t>(i)] = i;
    std::function<int(int)> find = [&](int v) {
        return parent[static_cast<std::size_t>(v)] == v ? v : parent[static_cast<std::size_t>(v)] = find(parent[static_cast<std::size_t>(v)]);
    };
    auto energized = [&](int i) {
        const auto it = plan.energized.find(s.nodes[static_cast<std::size_t>(i)].id);
        return it != plan.energized.end() && it->second != 0;
    };
    for (const Branch& b : s.branches) {
        const auto it = plan.branch_state.find(b.id);
        if (it == plan.branch_state.end() || it->second == 0) continue;
        const int u = s.node_index.at(b.from);
        const int v = s.node_index.at(b.to);
        if (!energized(u) || !energized(v)) continue;
        const int ru = find(u);
        const int rv = find(v);
        if (ru != rv) parent[static_cast<std::size_t>(ru)] = rv;
    }
    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    std::map<int, int> label_of_root;
    for (int i = 0; i < n; ++i) {
        if (!energized(i)) continue;
        const int r = find(i);
        auto [it, inserted] = label_of_root.emplace(r, static_cast<int>(label_of_root.size()));
        labels[static_cast<std::size_t>(i)] = it->second;
    }
    return labels;
}

inline int microgrid_count(const Scenario& s, const RestorationPlan& plan) {
    int count = 0;
    for (int label : energized_components(s, plan)) count = std::max(count, label + 1);
    return count;
}

} // namespace gridheal
