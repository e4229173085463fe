#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridheal/milp.hpp"
#include "gridheal/plan.hpp"
#include "gridheal/runner.hpp"

namespace gridheal {

struct StrategyRow {
    std::string name;
    bool feasible = false;
    double restored_mw = 0.0;
    std::vector<std::string> switches_restored;            // switch addrs assigned to a DSC
    std::vector<std::string> branches_closed_by_reconfig;  // closed now, open pre-disaster
    int mg_count = 0;
    double wall_time_s = 0.0;
};

struct ComparisonTable {
    std::vector<StrategyRow> rows; // nodsc, proposed, maxcomm

    nlohmann::json to_json() const {
        nlohmann::json jrows = nlohmann::json::array();
        for (const StrategyRow& r : rows) {
            jrows.push_back(nlohmann::json{{"name", r.name},
                                           {"feasible", r.feasible},
                                           {"restored_mw", r.restored_mw},
                                           {"switches_restored", r.switches_restored},
                                           {"branches_closed_by_reconfig", r.branches_closed_by_reconfig},
                                           {"mg_count", r.mg_count},
                                           {"wall_time_s", r.wall_time_s}});
        }
        return nlohmann::json{{"rows", std::move(jrows)}};
    }

    /// Aligned text rendering; numeric cells use the same shortest decimal
    /// form as the JSON output, so both carry identical values.
    std::string to_text() const {
        std::vector<std::vector<std::string>> cells;
        cells.push_back({"strategy", "restored_mw", "switches_restored", "closed_by_reconfig", "mgs",
                         "wall_time_s"});
        auto join = [](const std::vector<std::string>& v) {
            std::string s;
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) s += "; ";
                s += v[i];
            }
            return s.empty() ? "/" : s;
        };
        for (const StrategyRow& r : rows) {
            if (!r.feasible) {
                cells.push_back({r.name, "infeasible", "/", "/", "/", fmt_double(r.wall_time_s)});
                continue;
            }
            cells.push_back({r.name, fmt_double(r.restored_mw), join(r.switches_restored),
                             join(r.branches_closed_by_reconfig), std::to_string(r.mg_count),
                             fmt_double(r.wall_time_s)});
        }
        std::vector<std::size_t> width(cells.front().size(), 0);
        for (const auto& row : cells)
            for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
        std::string out;
        for (const auto& row : cells) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                out += row[c];
                if (c + 1 < row.size()) out += std::string(width[c] - row[c].size() + 2, ' ');
            }
            out += "\n";
        }
        return out;
    }
};

inline StrategyRow make_row(const Scenario& scenario, const std::string& name,
                            const StrategyOutcome& outcome) {
    StrategyRow row;
    row.name = name;
    row.wall_time_s = outcome.wall_time_s;
    if (!outcome.plan) return row;
    const RestorationPlan& plan = *outcome.plan;
    row.feasible = true;
    row.restored_mw = plan.restored_mw;
    std::set<std::string> switches;
    for (const auto& [sw, dsc] : plan.assignments) switches.insert(sw);
    row.switches_restored.assign(switches.begin(), switches.end());
    for (const Branch& b : scenario.branches) {
        const auto it = plan.branch_state.find(b.id);
        if (it != plan.branch_state.end() && it->second == 1 && !b.initial_closed)
            row.branches_closed_by_reconfig.push_back(b.id);
    }
    row.mg_count = microgrid_count(scenario, plan);
    return row;
}

/// Runs all three strategies and assembles the comparison. Any infeasible
/// strategy keeps its row, marked infeasible.
inline ComparisonTable run_compare(const Scenario& scenario, SolverBackend& backend,
                                   const SolveParams& params = {}) {
    ComparisonTable table;
    for (const char* name : {"nodsc", "proposed", "maxcomm"}) {
        const StrategyOutcome outcome = run_strategy(scenario, name, backend, params);
        table.rows.push_back(make_row(scenario, name, outcome));
    }
    return table;
}

} // namespace gridheal
