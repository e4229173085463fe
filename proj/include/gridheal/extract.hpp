#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gridheal/backend.hpp"
#include "gridheal/build.hpp"
#include "gridheal/errors.hpp"
#include "gridheal/plan.hpp"

namespace gridheal {

/// Maps a raw solution back onto a RestorationPlan. Binaries are rounded at
/// 0.5 and the rounded assignment is re-checked against every linear
/// constraint: backends differ in integrality tolerance, so nothing is
/// trusted beyond this re-verification.
inline RestorationPlan extract_plan(const BuiltModel& bm, const SolveResult& solution,
                                    double tol = 1e-6) {
    const MilpModel& m = bm.model;
    const Scenario& s = bm.scenario;
    if (solution.values.size() != m.variables.size())
        throw ExtractionError("solution has no values (status: " +
                              std::string(status_name(solution.status)) + ")");
    if (bm.strategy == Strategy::MaxCommStage1)
        throw ExtractionError("stage-1 models carry no restoration decisions");

    std::vector<double> x = solution.values;
    for (std::size_t i = 0; i < m.variables.size(); ++i) {
        if (m.variables[i].kind == VarKind::Binary) x[i] = x[i] > 0.5 ? 1.0 : 0.0;
    }
    for (const LinCon& c : m.linear_constraints) {
        const double r = m.residual(c, x);
        if (r > tol)
            throw ExtractionError("rounded solution violates constraint family '" + c.tag +
                                      "' by " + fmt_double(r),
                                  c.tag);
    }

    auto val = [&](const std::string& name) { return x[static_cast<std::size_t>(m.var(name))]; };
    auto bin = [&](const std::string& name) { return val(name) > 0.5 ? 1 : 0; };

    RestorationPlan plan;
    plan.strategy = strategy_name(bm.strategy);

    for (std::size_t i = 0; i < s.branches.size(); ++i) {
        const Branch& b = s.branches[i];
        if (bm.state.branch_faulted[i]) {
            plan.branch_state[b.id] = 0;
            // mu keeps its semantic value gamma_ij * gamma_ji even though the
            // model carries no variable for a faulted branch
            int mu = 0;
            if (b.switchable) {
                mu = bin("gamma:" + b.id + "@" + b.from) && bin("gamma:" + b.id + "@" + b.to) ? 1 : 0;
            }
            plan.switchable[b.id] = mu;
        } else {
            plan.branch_state[b.id] = bin("alpha:" + b.id);
            plan.switchable[b.id] = bin("mu:" + b.id);
        }
    }

    for (const Switch& sw : s.switches) plan.operable[sw.addr()] = bin("gamma:" + sw.addr());

    for (const Node& n : s.nodes) {
        plan.pickups[n.id] = bin("delta:" + n.id);
        plan.energized[n.id] = bin("e:" + n.id);
        if (plan.energized[n.id]) plan.voltages[n.id] = val("V:" + n.id);
        if (n.dg) plan.dg_dispatch[n.id] = PQ{val("pg:" + n.id), val("qg:" + n.id)};
    }
    for (std::size_t i = 0; i < s.branches.size(); ++i) {
        const Branch& b = s.branches[i];
        if (!bm.state.branch_faulted[i] && plan.branch_state.at(b.id) == 1)
            plan.flows[b.id] = PQ{val("P:" + b.id), val("Q:" + b.id)};
    }

    double travel_total = 0.0;
    for (std::size_t k = 0; k < bm.fleet.size(); ++k) {
        const Dsc& d = bm.fleet[k];
        DscPlacement placement;
        placement.dsc = d.id;
        if (bm.mode == PositionMode::Discrete) {
            const DscCandidates& dc = bm.candidates[k];
            int chosen = -1;
            for (int c = 0; c < static_cast<int>(dc.positions.size()); ++c) {
                if (bin("z:" + d.id + ":" + detail::pad3(c))) {
                    if (chosen >= 0) throw ExtractionError("dsc " + d.id + " selects two candidates", "eq1");
                    chosen = c;
                }
            }
            if (chosen < 0) throw ExtractionError("dsc " + d.id + " selects no candidate", "eq1");
            placement.position = dc.positions[static_cast<std::size_t>(chosen)];
            placement.candidate = dc.source_index[static_cast<std::size_t>(chosen)];
            travel_total += dc.travel_sq[static_cast<std::size_t>(chosen)];

            for (std::size_t fs = 0; fs < bm.state.failed_switches.size(); ++fs) {
                const Switch& sw = s.switches[static_cast<std::size_t>(bm.state.failed_switches[fs])];
                if (bin("lambda:" + sw.addr() + ":" + d.id)) {
                    if (!dc.covers[static_cast<std::size_t>(chosen)][fs])
                        throw ExtractionError("lambda set for switch " + sw.addr() +
                                                  " outside coverage of dsc " + d.id,
                                              "eq8");
                    plan.assignments.emplace_back(sw.addr(), d.id);
                }
            }
        } else {
            placement.position = Point{val("xbar:" + d.id), val("ybar:" + d.id)};
            placement.candidate = -1;
            travel_total += val("tsq:" + d.id);
            for (std::size_t fs = 0; fs < bm.state.failed_switches.size(); ++fs) {
                const Switch& sw = s.switches[static_cast<std::size_t>(bm.state.failed_switches[fs])];
                if (bin("lambda:" + sw.addr() + ":" + d.id)) {
                    const double dist = euclidean_distance(placement.position, sw.position);
                    if (!is_covered(dist, d.radius_m, s.options.coverage_tol + tol))
                        throw ExtractionError("lambda set for switch " + sw.addr() +
                                                  " outside coverage of dsc " + d.id,
                                              "eq8");
                    plan.assignments.emplace_back(sw.addr(), d.id);
                }
            }
        }
        plan.dsc_placements.push_back(std::move(placement));
    }
    std::sort(plan.assignments.begin(), plan.assignments.end());
    std::sort(plan.dsc_placements.begin(), plan.dsc_placements.end(),
              [](const DscPlacement& a, const DscPlacement& b) { return a.dsc < b.dsc; });

    // restored load is recomputed from the pickups, never read off the
    // solver objective; node order fixes the summation order
    double restored = 0.0;
    for (const Node& n : s.nodes) {
        if (plan.pickups.at(n.id)) restored += n.load_p_mw;
    }
    plan.restored_mw = restored;
    plan.travel_penalty = travel_total / bm.bigm.m_objective;
    plan.objective = plan.restored_mw - plan.travel_penalty;
    return plan;
}

} // namespace gridheal
