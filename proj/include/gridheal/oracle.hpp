#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gridheal/build.hpp"
#include "gridheal/candidates.hpp"
#include "gridheal/errors.hpp"
#include "gridheal/plan.hpp"
#include "gridheal/powerflow.hpp"
#include "gridheal/scenario.hpp"

namespace gridheal {

/// Enumeration guard rails. The oracle refuses instances whose search space
/// exceeds these bounds instead of silently running forever.
struct OracleLimits {
    int max_free_branches = 12;
    int max_loads = 8;
    int max_dscs = 2;
    int max_candidates = 8;
};

struct BruteForceResult {
    bool feasible = false;
    RestorationPlan plan;
    /// restored value -> (min, max) travel penalty over enumerated feasible
    /// plans; used by the objective-dominance check
    std::map<double, std::pair<double, double>> value_points;
    int stage1_lambda_total = 0;      // MaxComm variant only
    double stage1_travel_sq = 0.0;    // MaxComm variant only
};

namespace oracle_detail {

struct CommChoice {
    std::uint64_t mask = 0;        // recovered failed switches
    double travel_sq = 0.0;        // total squared displacement
    std::vector<int> candidate;    // per fleet index
    std::vector<std::uint64_t> lambda; // per fleet index, chosen switches
    int lambda_total = 0;
};

struct Instance {
    const OperationalState* state = nullptr;
    const std::vector<Dsc>* fleet = nullptr;
    const std::vector<DscCandidates>* candidates = nullptr;
    double m_objective = 1.0;
    std::map<int, int> col_of_switch; // switch index -> failed column
    std::vector<int> load_nodes;      // node indices with positive active load
};

inline void enumerate_lambda_combos(const std::vector<int>& coverable, int take,
                                    std::vector<std::uint64_t>& out) {
    // all subsets of `coverable` of size `take`, as bitmasks
    std::vector<int> pick(static_cast<std::size_t>(take));
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == take) {
            std::uint64_t m = 0;
            for (int i = 0; i < take; ++i)
                m |= std::uint64_t{1} << coverable[static_cast<std::size_t>(pick[static_cast<std::size_t>(i)])];
            out.push_back(m);
            return;
        }
        for (int i = start; i <= static_cast<int>(coverable.size()) - (take - depth); ++i) {
            pick[static_cast<std::size_t>(depth)] = i;
            rec(i + 1, depth + 1);
        }
    };
    if (take == 0) {
        out.push_back(0);
        return;
    }
    rec(0, 0);
}

/// All communication decisions worth enumerating: per DSC one candidate and
/// a maximum-size coverable subset (smaller subsets are dominated: gamma is
/// monotone and travel depends on the placement only).
inline std::vector<CommChoice> enumerate_comm_choices(const Instance& inst) {
    const std::vector<Dsc>& fleet = *inst.fleet;
    std::vector<CommChoice> out;
    CommChoice base;
    base.candidate.resize(fleet.size(), -1);
    base.lambda.resize(fleet.size(), 0);

    std::function<void(std::size_t, CommChoice&)> rec = [&](std::size_t k, CommChoice& acc) {
        if (k == fleet.size()) {
            out.push_back(acc);
            return;
        }
        const DscCandidates& dc = (*inst.candidates)[k];
        for (int c = 0; c < static_cast<int>(dc.positions.size()); ++c) {
            std::vector<int> coverable;
            for (std::size_t fs = 0; fs < dc.covers[static_cast<std::size_t>(c)].size(); ++fs)
                if (dc.covers[static_cast<std::size_t>(c)][fs]) coverable.push_back(static_cast<int>(fs));
            const int take = std::min<int>(fleet[k].capacity, static_cast<int>(coverable.size()));
            std::vector<std::uint64_t> combos;
            enumerate_lambda_combos(coverable, take, combos);
            for (std::uint64_t lam : combos) {
                CommChoice next = acc;
                next.candidate[k] = c;
                next.lambda[k] = lam;
                next.mask |= lam;
                next.travel_sq += dc.travel_sq[static_cast<std::size_t>(c)];
                next.lambda_total += take;
                rec(k + 1, next);
            }
        }
    };
    rec(0, base);
    return out;
}

struct TopologyEval {
    bool feasible = false;
    double restored = 0.0;
    std::vector<std::uint64_t> comp_pick_masks;  // aligned with comp list
    std::vector<std::vector<int>> comp_nodes;
    std::vector<std::vector<int>> comp_branches;
    std::vector<int> comp_root;
};

/// Given recovered switches (mask) and one alpha assignment, check the
/// forest/DG structure and find the best pickup set per microgrid by
/// exhaustive sweep with monotone pruning.
inline std::optional<TopologyEval> evaluate_topology(const Instance& inst,
                                                     const std::vector<bool>& closed,
                                                     std::vector<std::pair<double, double>>* points,
                                                     double travel_penalty) {
    const Scenario& s = inst.state->scenario;
    const int n = static_cast<int>(s.nodes.size());

    std::vector<int> parent(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) parent[static_cast<std::size_t>(i)] = i;
    std::function<int(int)> find = [&](int v) {
        return parent[static_cast<std::size_t>(v)] == v
                   ? v
                   : parent[static_cast<std::size_t>(v)] = find(parent[static_cast<std::size_t>(v)]);
    };
    for (std::size_t i = 0; i < s.branches.size(); ++i) {
        if (!closed[i]) continue;
        const int u = find(s.node_index.at(s.branches[i].from));
        const int v = find(s.node_index.at(s.branches[i].to));
        if (u == v) return std::nullopt; // cycle
        parent[static_cast<std::size_t>(u)] = v;
    }

    std::map<int, int> comp_of_root;
    std::vector<int> comp(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int r = find(i);
        auto [it, inserted] = comp_of_root.emplace(r, static_cast<int>(comp_of_root.size()));
        comp[static_cast<std::size_t>(i)] = it->second;
    }
    const int n_comp = static_cast<int>(comp_of_root.size());
    std::vector<std::vector<int>> comp_nodes(static_cast<std::size_t>(n_comp));
    std::vector<std::vector<int>> comp_branches(static_cast<std::size_t>(n_comp));
    std::vector<std::vector<int>> comp_dgs(static_cast<std::size_t>(n_comp));
    for (int i = 0; i < n; ++i) {
        comp_nodes[static_cast<std::size_t>(comp[static_cast<std::size_t>(i)])].push_back(i);
        if (s.nodes[static_cast<std::size_t>(i)].dg)
            comp_dgs[static_cast<std::size_t>(comp[static_cast<std::size_t>(i)])].push_back(i);
    }
    for (std::size_t i = 0; i < s.branches.size(); ++i) {
        if (!closed[i]) continue;
        comp_branches[static_cast<std::size_t>(comp[static_cast<std::size_t>(s.node_index.at(s.branches[i].from))])]
            .push_back(static_cast<int>(i));
    }

    TopologyEval ev;
    ev.comp_nodes = comp_nodes;
    ev.comp_branches = comp_branches;
    ev.comp_pick_masks.assign(static_cast<std::size_t>(n_comp), 0);
    ev.comp_root.assign(static_cast<std::size_t>(n_comp), -1);

    for (int c = 0; c < n_comp; ++c) {
        const auto& dgs = comp_dgs[static_cast<std::size_t>(c)];
        if (dgs.size() > 1)
            throw OracleError("brute_force: enumerated topology connects multiple DGs; "
                              "instance outside oracle scope");
        if (dgs.empty()) {
            if (!comp_branches[static_cast<std::size_t>(c)].empty())
                return std::nullopt; // closed branches in a dead island are unservable
            continue;
        }
        ev.comp_root[static_cast<std::size_t>(c)] = dgs.front();

        // best pickup subset for this microgrid
        std::vector<int> loads;
        for (int node : comp_nodes[static_cast<std::size_t>(c)])
            if (s.nodes[static_cast<std::size_t>(node)].load_p_mw > 0.0) loads.push_back(node);
        const int nl = static_cast<int>(loads.size());
        const std::uint32_t full = nl >= 31 ? 0 : (std::uint32_t{1} << nl);
        std::vector<bool> infeasible(full, false);
        double best_p = 0.0;
        std::uint64_t best_mask = 0;
        for (std::uint32_t mask = 0; mask < full; ++mask) {
            bool pruned = false;
            for (int b = 0; b < nl && !pruned; ++b) {
                if ((mask >> b) & 1u) pruned = infeasible[mask & ~(std::uint32_t{1} << b)];
            }
            if (pruned) {
                infeasible[mask] = true;
                continue;
            }
            std::set<int> picked;
            double total_p = 0.0;
            for (int b = 0; b < nl; ++b) {
                if ((mask >> b) & 1u) {
                    picked.insert(loads[static_cast<std::size_t>(b)]);
                    total_p += s.nodes[static_cast<std::size_t>(loads[static_cast<std::size_t>(b)])].load_p_mw;
                }
            }
            const SweepResult sweep =
                forward_sweep(s, comp_branches[static_cast<std::size_t>(c)], dgs.front(), picked);
            if (!sweep.feasible) {
                infeasible[mask] = true;
                continue;
            }
            if (points) points->emplace_back(total_p, travel_penalty);
            if (total_p > best_p) {
                best_p = total_p;
                best_mask = mask;
            }
        }
        ev.restored += best_p;
        ev.comp_pick_masks[static_cast<std::size_t>(c)] = best_mask;
    }
    ev.feasible = true;
    return ev;
}

inline RestorationPlan assemble_plan(const Instance& inst, const CommChoice& comm,
                                     const std::vector<bool>& closed, const TopologyEval& ev) {
    const Scenario& s = inst.state->scenario;
    RestorationPlan plan;
    plan.strategy = "oracle";

    for (const Switch& sw : s.switches) {
        const auto it = inst.col_of_switch.find(s.switch_index.at(sw.addr()));
        const bool failed = it != inst.col_of_switch.end();
        const bool recovered = failed && ((comm.mask >> it->second) & 1u);
        plan.operable[sw.addr()] = (!failed || recovered) ? 1 : 0;
    }
    for (std::size_t i = 0; i < s.branches.size(); ++i) {
        const Branch& b = s.branches[i];
        int mu = 0;
        if (b.switchable) {
            mu = plan.operable.at(b.id + "@" + b.from) && plan.operable.at(b.id + "@" + b.to) ? 1 : 0;
        }
        plan.switchable[b.id] = mu;
        plan.branch_state[b.id] = closed[i] ? 1 : 0;
    }

    double travel_total = 0.0;
    for (std::size_t k = 0; k < inst.fleet->size(); ++k) {
        const Dsc& d = (*inst.fleet)[k];
        const DscCandidates& dc = (*inst.candidates)[k];
        const int c = comm.candidate[k];
        plan.dsc_placements.push_back(
            DscPlacement{d.id, dc.positions[static_cast<std::size_t>(c)],
                         dc.source_index[static_cast<std::size_t>(c)]});
        travel_total += dc.travel_sq[static_cast<std::size_t>(c)];
        for (const auto& [sw_idx, col] : inst.col_of_switch) {
            if ((comm.lambda[k] >> col) & 1u)
                plan.assignments.emplace_back(s.switches[static_cast<std::size_t>(sw_idx)].addr(), d.id);
        }
    }
    std::sort(plan.assignments.begin(), plan.assignments.end());
    std::sort(plan.dsc_placements.begin(), plan.dsc_placements.end(),
              [](const DscPlacement& a, const DscPlacement& b) { return a.dsc < b.dsc; });

    for (const Node& n : s.nodes) {
        plan.pickups[n.id] = 0;
        plan.energized[n.id] = 0;
        if (n.dg) plan.dg_dispatch[n.id] = PQ{};
    }
    for (std::size_t c = 0; c < ev.comp_nodes.size(); ++c) {
        const int root = ev.comp_root[c];
        if (root < 0) continue;
        std::vector<int> loads;
        for (int node : ev.comp_nodes[c])
            if (s.nodes[static_cast<std::size_t>(node)].load_p_mw > 0.0) loads.push_back(node);
        std::set<int> picked;
        for (int b = 0; b < static_cast<int>(loads.size()); ++b) {
            if ((ev.comp_pick_masks[c] >> b) & 1u) picked.insert(loads[static_cast<std::size_t>(b)]);
        }
        for (int node : ev.comp_nodes[c]) plan.energized[s.nodes[static_cast<std::size_t>(node)].id] = 1;
        for (int node : picked) plan.pickups[s.nodes[static_cast<std::size_t>(node)].id] = 1;

        const SweepResult sweep = forward_sweep(s, ev.comp_branches[c], root, picked);
        for (const auto& [id, pq] : sweep.flows) plan.flows[id] = pq;
        for (const auto& [id, v] : sweep.voltages) plan.voltages[id] = v;
        PQ total;
        for (int node : picked) {
            total.p += s.nodes[static_cast<std::size_t>(node)].load_p_mw;
            total.q += s.nodes[static_cast<std::size_t>(node)].load_q_mvar;
        }
        plan.dg_dispatch[s.nodes[static_cast<std::size_t>(root)].id] = total;
    }

    double restored = 0.0;
    for (const Node& n : s.nodes) {
        if (plan.pickups.at(n.id)) restored += n.load_p_mw;
    }
    plan.restored_mw = restored;
    plan.travel_penalty = travel_total / inst.m_objective;
    plan.objective = plan.restored_mw - plan.travel_penalty;
    return plan;
}

inline Instance make_instance(const OperationalState& state, const std::vector<Dsc>& fleet,
                              const std::vector<DscCandidates>& candidates, const BigM& bigm,
                              const OracleLimits& limits) {
    if (static_cast<int>(fleet.size()) > limits.max_dscs)
        throw OracleError("brute_force: fleet exceeds max_dscs");
    for (const DscCandidates& dc : candidates) {
        if (static_cast<int>(dc.positions.size()) > limits.max_candidates)
            throw OracleError("brute_force: candidate set exceeds max_candidates");
    }
    if (state.failed_switches.size() > 63)
        throw OracleError("brute_force: too many comm-failed switches");

    const Scenario& s = state.scenario;
    Instance inst;
    inst.state = &state;
    inst.fleet = &fleet;
    inst.candidates = &candidates;
    inst.m_objective = bigm.m_objective;
    for (std::size_t col = 0; col < state.failed_switches.size(); ++col)
        inst.col_of_switch.emplace(state.failed_switches[col], static_cast<int>(col));

    int loads = 0;
    for (const Node& n : s.nodes)
        if (n.load_p_mw > 0.0) ++loads;
    if (loads > limits.max_loads) throw OracleError("brute_force: load count exceeds max_loads");

    int potentially_free = 0;
    for (std::size_t i = 0; i < s.branches.size(); ++i)
        if (!state.branch_faulted[i] && s.branches[i].switchable) ++potentially_free;
    if (potentially_free > limits.max_free_branches)
        throw OracleError("brute_force: free branch count exceeds max_free_branches");
    return inst;
}

/// Best restoration over all alpha assignments consistent with the given
/// recovered-switch mask. Returns nullopt when no assignment is feasible.
struct MaskBest {
    double restored = 0.0;
    std::vector<bool> closed;
    TopologyEval eval;
};

inline std::optional<MaskBest> best_for_mask(const Instance& inst, std::uint64_t mask,
                                             std::vector<std::pair<double, double>>* points,
                                             double travel_penalty) {
    const Scenario& s = inst.state->scenario;
    const OperationalState& state = *inst.state;

    std::vector<int> free;
    std::vector<bool> forced(s.branches.size(), false);
    for (std::size_t i = 0; i < s.branches.size(); ++i) {
        const Branch& b = s.branches[i];
        if (state.branch_faulted[i]) continue;
        bool mu = false;
        if (b.switchable) {
            auto gamma = [&](const std::string& node) {
                const int sw = s.switch_index.at(b.id + "@" + node);
                const auto it = inst.col_of_switch.find(sw);
                if (it == inst.col_of_switch.end()) return true; // communication intact
                return ((mask >> it->second) & 1u) != 0;
            };
            mu = gamma(b.from) && gamma(b.to);
        }
        if (mu) free.push_back(static_cast<int>(i));
        else forced[i] = state.branch_effective_closed[i];
    }

    std::optional<MaskBest> best;
    const std::uint32_t combos = std::uint32_t{1} << free.size();
    for (std::uint32_t bits = 0; bits < combos; ++bits) {
        std::vector<bool> closed(forced);
        for (std::size_t f = 0; f < free.size(); ++f)
            if ((bits >> f) & 1u) closed[static_cast<std::size_t>(free[f])] = true;
        const auto ev = evaluate_topology(inst, closed, points, travel_penalty);
        if (!ev) continue;
        if (!best || ev->restored > best->restored) {
            best = MaskBest{ev->restored, closed, *ev};
        }
    }
    return best;
}

} // namespace oracle_detail

/// Exhaustive ground truth for tiny instances: enumerates DSC placements
/// with capacity-feasible assignments, the implied switchability, every
/// consistent branch configuration and every pickup set, validating each
/// by graph checks and the exact forward sweep. Returns the lexicographic
/// argmax of (restored load, -travel), i.e. the exact optimum of the same
/// feasible set the MILP describes.
inline BruteForceResult brute_force(const OperationalState& state, const std::vector<Dsc>& fleet,
                                    const std::vector<DscCandidates>& candidates, const BigM& bigm,
                                    const OracleLimits& limits = {}) {
    using namespace oracle_detail;
    const Instance inst = make_instance(state, fleet, candidates, bigm, limits);

    std::vector<CommChoice> choices = enumerate_comm_choices(inst);
    // keep the travel-minimal choice per recovered-switch set; all travels
    // per set are retained as feasible-value points for dominance checks
    std::map<std::uint64_t, CommChoice> best_choice;
    std::map<std::uint64_t, std::set<double>> travels;
    for (const CommChoice& ch : choices) {
        travels[ch.mask].insert(ch.travel_sq);
        const auto it = best_choice.find(ch.mask);
        if (it == best_choice.end() || ch.travel_sq < it->second.travel_sq)
            best_choice[ch.mask] = ch;
    }

    BruteForceResult result;
    std::vector<std::pair<double, double>> points;
    std::optional<std::pair<double, double>> incumbent; // (restored, travel_sq)
    std::optional<std::uint64_t> incumbent_mask;

    for (const auto& [mask, choice] : best_choice) {
        std::vector<std::pair<double, double>> mask_points;
        const auto best = best_for_mask(inst, mask, &mask_points, 0.0);
        if (!best) continue;
        for (double t : travels[mask]) {
            const double penalty = t / inst.m_objective;
            for (const auto& pt : mask_points) points.emplace_back(pt.first, penalty);
        }
        const std::pair<double, double> value{best->restored, choice.travel_sq};
        if (!incumbent || value.first > incumbent->first ||
            (value.first == incumbent->first && value.second < incumbent->second)) {
            incumbent = value;
            incumbent_mask = mask;
        }
    }

    for (const auto& [restored, penalty] : points) {
        auto it = result.value_points.find(restored);
        if (it == result.value_points.end()) {
            result.value_points.emplace(restored, std::make_pair(penalty, penalty));
        } else {
            it->second.first = std::min(it->second.first, penalty);
            it->second.second = std::max(it->second.second, penalty);
        }
    }

    if (!incumbent) {
        result.feasible = false;
        return result;
    }
    const CommChoice& choice = best_choice.at(*incumbent_mask);
    const auto best = best_for_mask(inst, *incumbent_mask, nullptr, 0.0);
    result.feasible = true;
    result.plan = assemble_plan(inst, choice, best->closed, best->eval);
    return result;
}

/// Oracle twin of the MaxComm pipeline: maximize total restored connections
/// first (travel as tie-break), then the best restoration among the
/// stage-1-optimal communication decisions.
inline BruteForceResult brute_force_maxcomm(const OperationalState& state,
                                            const std::vector<Dsc>& fleet,
                                            const std::vector<DscCandidates>& candidates,
                                            const BigM& bigm, const OracleLimits& limits = {}) {
    using namespace oracle_detail;
    const Instance inst = make_instance(state, fleet, candidates, bigm, limits);

    std::vector<CommChoice> choices = enumerate_comm_choices(inst);
    int best_lambda = 0;
    for (const CommChoice& ch : choices) best_lambda = std::max(best_lambda, ch.lambda_total);
    double best_travel = std::numeric_limits<double>::infinity();
    for (const CommChoice& ch : choices)
        if (ch.lambda_total == best_lambda) best_travel = std::min(best_travel, ch.travel_sq);

    BruteForceResult result;
    result.stage1_lambda_total = best_lambda;
    result.stage1_travel_sq = choices.empty() ? 0.0 : best_travel;

    std::optional<double> best_restored;
    std::optional<CommChoice> best_ch;
    std::optional<MaskBest> best_eval;
    for (const CommChoice& ch : choices) {
        if (ch.lambda_total != best_lambda || ch.travel_sq != best_travel) continue;
        const auto best = best_for_mask(inst, ch.mask, nullptr, 0.0);
        if (!best) continue;
        if (!best_restored || best->restored > *best_restored) {
            best_restored = best->restored;
            best_ch = ch;
            best_eval = best;
        }
    }
    if (!best_restored) {
        result.feasible = false;
        return result;
    }
    result.feasible = true;
    result.plan = assemble_plan(inst, *best_ch, best_eval->closed, best_eval->eval);
    return result;
}

} // namespace gridheal
