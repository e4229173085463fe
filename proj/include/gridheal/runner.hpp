#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "gridheal/backend.hpp"
#include "gridheal/build.hpp"
#include "gridheal/extract.hpp"
#include "gridheal/plan.hpp"
#include "gridheal/scenario.hpp"

namespace gridheal {

struct StrategyOutcome {
    SolveStatus status = SolveStatus::Error;
    std::optional<RestorationPlan> plan;
    double wall_time_s = 0.0;
    std::string message;
};

namespace detail {

/// Reads the stage-1 optimum out of a solved stage-1 model: the integer
/// connection count and the exact travel of the chosen placement.
inline MaxCommStage1Result read_stage1(const BuiltModel& bm, const SolveResult& res) {
    MaxCommStage1Result out;
    auto rounded = [&](const std::string& name) {
        return res.values[static_cast<std::size_t>(bm.model.var(name))] > 0.5;
    };
    for (const Dsc& d : bm.fleet) {
        for (int fi : bm.state.failed_switches) {
            const Switch& sw = bm.scenario.switches[static_cast<std::size_t>(fi)];
            if (rounded("lambda:" + sw.addr() + ":" + d.id)) ++out.lambda_total;
        }
    }
    if (bm.mode == PositionMode::Discrete) {
        for (std::size_t k = 0; k < bm.fleet.size(); ++k) {
            const DscCandidates& dc = bm.candidates[k];
            for (int c = 0; c < static_cast<int>(dc.positions.size()); ++c) {
                if (rounded("z:" + bm.fleet[k].id + ":" + pad3(c)))
                    out.travel_sq_total += dc.travel_sq[static_cast<std::size_t>(c)];
            }
        }
    } else {
        for (const Dsc& d : bm.fleet)
            out.travel_sq_total += res.values[static_cast<std::size_t>(bm.model.var("tsq:" + d.id))];
    }
    return out;
}

} // namespace detail

/// Solves one strategy end to end and maps the optimum onto a plan.
/// MaxComm runs its two stages back to back on the same backend.
inline StrategyOutcome run_strategy(const Scenario& scenario, const std::string& strategy,
                                    SolverBackend& backend, const SolveParams& params = {}) {
    const OperationalState state = apply_damage(scenario);
    StrategyOutcome out;

    auto finish = [&](const BuiltModel& bm, const SolveResult& res) {
        out.wall_time_s += res.wall_time_s;
        out.status = res.status;
        out.message = res.message;
        if (res.status == SolveStatus::Optimal) out.plan = extract_plan(bm, res);
    };

    if (strategy == "proposed") {
        const BuiltModel bm = build_proposed(state, scenario.dscs);
        finish(bm, backend.solve(bm.model, params));
    } else if (strategy == "nodsc") {
        const BuiltModel bm = build_nodsc(state);
        finish(bm, backend.solve(bm.model, params));
    } else if (strategy == "maxcomm") {
        MaxCommStage1Result stage1;
        if (!scenario.dscs.empty()) {
            const BuiltModel s1 = build_maxcomm_stage1(state, scenario.dscs);
            const SolveResult r1 = backend.solve(s1.model, params);
            out.wall_time_s += r1.wall_time_s;
            if (r1.status != SolveStatus::Optimal) {
                out.status = r1.status;
                out.message = r1.message;
                return out;
            }
            stage1 = detail::read_stage1(s1, r1);
        }
        const BuiltModel s2 = build_maxcomm_stage2(state, scenario.dscs, stage1);
        finish(s2, backend.solve(s2.model, params));
    } else {
        throw Error("unknown strategy '" + strategy + "' (expected proposed|nodsc|maxcomm)");
    }
    return out;
}

} // namespace gridheal
