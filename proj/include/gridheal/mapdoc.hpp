#pragma once

#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "gridheal/plan.hpp"
#include "gridheal/scenario.hpp"
#include "gridheal/verify.hpp"

namespace gridheal {

/// Renders a verified plan as a GeoJSON-style feature collection in the
/// scenario's planar coordinates: nodes with microgrid labels, branches by
/// state, DSC positions with 64-gon coverage circles. Refuses plans that do
/// not verify.
inline nlohmann::json emit_map(const Scenario& scenario, const RestorationPlan& plan) {
    const VerificationReport report = verify_plan(scenario, plan);
    if (!report.pass()) {
        std::string families;
        for (const auto& [name, fam] : report.families)
            if (!fam.passed) families += (families.empty() ? "" : ", ") + name;
        throw Error("emit_map: plan fails verification (" + families + ")");
    }

    using nlohmann::json;
    const std::vector<int> mg = energized_components(scenario, plan);
    json features = json::array();

    for (std::size_t i = 0; i < scenario.nodes.size(); ++i) {
        const Node& n = scenario.nodes[i];
        json props{{"kind", "node"},
                   {"id", n.id},
                   {"energized", plan.energized.count(n.id) && plan.energized.at(n.id) != 0},
                   {"pickup", plan.pickups.count(n.id) && plan.pickups.at(n.id) != 0},
                   {"dg", n.dg.has_value()}};
        props["mg"] = mg[i] >= 0 ? json(mg[i]) : json(nullptr);
        features.push_back(json{{"type", "Feature"},
                                {"geometry", json{{"type", "Point"},
                                                  {"coordinates", json::array({n.position.x, n.position.y})}}},
                                {"properties", std::move(props)}});
    }

    const OperationalState state = apply_damage(scenario);
    for (std::size_t i = 0; i < scenario.branches.size(); ++i) {
        const Branch& b = scenario.branches[i];
        const char* bstate = "open";
        if (state.branch_faulted[i]) bstate = "faulted";
        else if (plan.branch_state.count(b.id) && plan.branch_state.at(b.id) != 0) bstate = "closed";
        const Point& u = scenario.node(b.from).position;
        const Point& v = scenario.node(b.to).position;
        features.push_back(json{
            {"type", "Feature"},
            {"geometry", json{{"type", "LineString"},
                              {"coordinates", json::array({json::array({u.x, u.y}), json::array({v.x, v.y})})}}},
            {"properties", json{{"kind", "branch"}, {"id", b.id}, {"state", bstate}}}});
    }

    std::map<std::string, const Dsc*> dsc_by_id;
    for (const Dsc& d : scenario.dscs) dsc_by_id[d.id] = &d;
    for (const DscPlacement& p : plan.dsc_placements) {
        features.push_back(json{{"type", "Feature"},
                                {"geometry", json{{"type", "Point"},
                                                  {"coordinates", json::array({p.position.x, p.position.y})}}},
                                {"properties", json{{"kind", "dsc"}, {"id", p.dsc}}}});
        const double radius = dsc_by_id.count(p.dsc) ? dsc_by_id.at(p.dsc)->radius_m : 0.0;
        json ring = json::array();
        for (const Point& v : circle_polygon(p.position, radius, 64))
            ring.push_back(json::array({v.x, v.y}));
        ring.push_back(ring.front()); // closed linear ring
        features.push_back(json{
            {"type", "Feature"},
            {"geometry", json{{"type", "Polygon"}, {"coordinates", json::array({std::move(ring)})}}},
            {"properties", json{{"kind", "dsc-coverage"}, {"id", p.dsc}, {"radius_m", radius}}}});
    }

    return json{{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

} // namespace gridheal
