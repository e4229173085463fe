#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridheal/build.hpp"
#include "gridheal/plan.hpp"
#include "gridheal/powerflow.hpp"
#include "gridheal/scenario.hpp"

namespace gridheal {

struct FamilyResult {
    bool passed = true;
    double worst_residual = 0.0;
    std::string detail;
};

/// Per-constraint-family verification outcome. Families: coverage,
/// capacity, operability, switchability, radiality, operation, pickup.
struct VerificationReport {
    std::map<std::string, FamilyResult> families;

    bool pass() const {
        for (const auto& [name, fam] : families)
            if (!fam.passed) return false;
        return true;
    }

    nlohmann::json to_json() const {
        nlohmann::json jf = nlohmann::json::object();
        for (const auto& [name, fam] : families)
            jf[name] = nlohmann::json{{"passed", fam.passed},
                                      {"worst_residual", fam.worst_residual},
                                      {"detail", fam.detail}};
        return nlohmann::json{{"pass", pass()}, {"families", std::move(jf)}};
    }
};

namespace detail {

struct FamilyCheck {
    FamilyResult result;

    void residual(double r, const std::string& what, double tol) {
        result.worst_residual = std::max(result.worst_residual, r);
        if (r > tol && result.passed) {
            result.passed = false;
            result.detail = what;
        }
    }

    void fail(const std::string& what) {
        if (result.passed) {
            result.passed = false;
            result.detail = what;
        }
    }
};

} // namespace detail

/// Independent plan checker: re-derives every constraint family from the
/// scenario and the plan alone, without trusting the solver. Single-DG
/// microgrids are re-swept exactly; multi-DG microgrids are checked by
/// substituting the plan into the emitted linear power-flow constraints.
inline VerificationReport verify_plan(const Scenario& scenario, const RestorationPlan& plan,
                                      double tol = 1e-6) {
    VerificationReport report;
    const OperationalState state = apply_damage(scenario);

    auto plan_int = [](const std::map<std::string, int>& m, const std::string& key) {
        const auto it = m.find(key);
        return it == m.end() ? 0 : it->second;
    };

    // (a) coverage: every assignment within the assigned DSC's disk
    {
        detail::FamilyCheck fam;
        std::map<std::string, const Dsc*> dsc_by_id;
        for (const Dsc& d : scenario.dscs) dsc_by_id[d.id] = &d;
        std::map<std::string, Point> placement;
        for (const DscPlacement& p : plan.dsc_placements) placement[p.dsc] = p.position;
        for (const auto& [sw_addr, dsc_id] : plan.assignments) {
            const auto swit = scenario.switch_index.find(sw_addr);
            const auto dit = dsc_by_id.find(dsc_id);
            if (swit == scenario.switch_index.end() || dit == dsc_by_id.end() ||
                !placement.count(dsc_id)) {
                fam.fail("assignment references unknown switch or DSC: " + sw_addr + " -> " + dsc_id);
                continue;
            }
            const double d = euclidean_distance(
                placement.at(dsc_id),
                scenario.switches[static_cast<std::size_t>(swit->second)].position);
            const double excess = d - dit->second->radius_m - scenario.options.coverage_tol;
            fam.residual(std::max(0.0, excess), "switch " + sw_addr + " outside coverage of " + dsc_id,
                         tol);
        }
        report.families["coverage"] = fam.result;
    }

    // (b) capacity: per-DSC assignment count within C_k
    {
        detail::FamilyCheck fam;
        std::map<std::string, int> used;
        for (const auto& [sw_addr, dsc_id] : plan.assignments) ++used[dsc_id];
        for (const Dsc& d : scenario.dscs) {
            const int n = used.count(d.id) ? used.at(d.id) : 0;
            if (n > d.capacity)
                fam.residual(static_cast<double>(n - d.capacity),
                             "dsc " + d.id + " exceeds capacity", tol);
        }
        report.families["capacity"] = fam.result;
    }

    // (c) operability: gamma=1 iff communication intact or recovered
    {
        detail::FamilyCheck fam;
        std::set<std::string> assigned;
        for (const auto& [sw_addr, dsc_id] : plan.assignments) assigned.insert(sw_addr);
        for (const Switch& sw : scenario.switches) {
            const bool expected = !state.is_comm_failed(sw.addr()) || assigned.count(sw.addr()) != 0;
            const bool actual = plan_int(plan.operable, sw.addr()) != 0;
            if (expected != actual)
                fam.fail("switch " + sw.addr() + ": gamma=" + std::to_string(actual) +
                         " but communication state implies " + std::to_string(expected));
        }
        report.families["operability"] = fam.result;
    }

    // (d) switchability: mu = gamma_ij AND gamma_ji; frozen branches keep
    // their effective state; faulted branches stay open
    {
        detail::FamilyCheck fam;
        for (std::size_t i = 0; i < scenario.branches.size(); ++i) {
            const Branch& b = scenario.branches[i];
            const int alpha = plan_int(plan.branch_state, b.id);
            const int mu = plan_int(plan.switchable, b.id);
            int expected_mu = 0;
            if (b.switchable) {
                const int g1 = plan_int(plan.operable, b.id + "@" + b.from);
                const int g2 = plan_int(plan.operable, b.id + "@" + b.to);
                expected_mu = g1 && g2 ? 1 : 0;
            }
            if (mu != expected_mu)
                fam.fail("branch " + b.id + ": mu inconsistent with end-switch operability");
            if (state.branch_faulted[i]) {
                if (alpha != 0) fam.fail("branch " + b.id + ": faulted branch closed");
            } else if (expected_mu == 0) {
                const int L = state.branch_effective_closed[i] ? 1 : 0;
                if (alpha != L)
                    fam.fail("branch " + b.id + ": state changed without switching capability");
            }
        }
        report.families["switchability"] = fam.result;
    }

    // (e) radiality: closed branches live on energized nodes, form a
    // forest, and every energized component holds a DG
    std::vector<int> comp_label = energized_components(scenario, plan);
    bool radiality_ok = true;
    {
        detail::FamilyCheck fam;
        int closed_on_energized = 0;
        for (const Branch& b : scenario.branches) {
            if (plan_int(plan.branch_state, b.id) == 0) continue;
            const bool eu = plan_int(plan.energized, b.from) != 0;
            const bool ev = plan_int(plan.energized, b.to) != 0;
            if (!eu || !ev) fam.fail("branch " + b.id + " closed onto a de-energized node");
            else ++closed_on_energized;
        }
        std::map<int, int> comp_size;
        std::map<int, int> comp_dgs;
        for (std::size_t i = 0; i < scenario.nodes.size(); ++i) {
            const int label = comp_label[i];
            if (label < 0) continue;
            ++comp_size[label];
            if (scenario.nodes[i].dg) ++comp_dgs[label];
        }
        int expected_edges = 0;
        for (const auto& [label, size] : comp_size) {
            expected_edges += size - 1;
            if (comp_dgs[label] == 0) fam.fail("energized component without a DG");
        }
        // forest <=> per-component edge count is size-1; any extra closed
        // branch on energized nodes creates a cycle
        if (fam.result.passed && closed_on_energized != expected_edges)
            fam.fail("closed branches form a cycle among energized nodes");
        radiality_ok = fam.result.passed;
        report.families["radiality"] = fam.result;
    }

    // (f) operation: exact sweep for single-DG microgrids, emitted-constraint
    // substitution for multi-DG ones
    {
        detail::FamilyCheck fam;
        if (!radiality_ok) {
            fam.fail("skipped: radiality failed");
        } else {
            int n_components = 0;
            for (int label : comp_label) n_components = std::max(n_components, label + 1);

            std::vector<std::vector<int>> comp_nodes(static_cast<std::size_t>(n_components));
            for (std::size_t i = 0; i < scenario.nodes.size(); ++i)
                if (comp_label[i] >= 0) comp_nodes[static_cast<std::size_t>(comp_label[i])].push_back(static_cast<int>(i));

            bool any_multi_dg = false;
            for (int comp = 0; comp < n_components; ++comp) {
                std::vector<int> dgs;
                for (int n : comp_nodes[static_cast<std::size_t>(comp)])
                    if (scenario.nodes[static_cast<std::size_t>(n)].dg) dgs.push_back(n);
                if (dgs.size() != 1) {
                    any_multi_dg = any_multi_dg || dgs.size() > 1;
                    continue;
                }
                std::vector<int> tree;
                for (std::size_t i = 0; i < scenario.branches.size(); ++i) {
                    const Branch& b = scenario.branches[i];
                    if (plan_int(plan.branch_state, b.id) == 0) continue;
                    if (comp_label[static_cast<std::size_t>(scenario.node_index.at(b.from))] == comp)
                        tree.push_back(static_cast<int>(i));
                }
                std::set<int> picked;
                for (int n : comp_nodes[static_cast<std::size_t>(comp)])
                    if (plan_int(plan.pickups, scenario.nodes[static_cast<std::size_t>(n)].id) != 0)
                        picked.insert(n);
                SweepResult sweep;
                try {
                    sweep = forward_sweep(scenario, tree, dgs.front(), picked);
                } catch (const Error& e) {
                    fam.fail(std::string("sweep rejected component: ") + e.what());
                    continue;
                }
                if (!sweep.feasible) {
                    const SweepViolation& v = sweep.violations.front();
                    fam.residual(v.margin, v.kind + " limit violated at " + v.entity, tol);
                }
                for (const auto& [id, pq] : sweep.flows) {
                    const PQ actual = plan.flows.count(id) ? plan.flows.at(id) : PQ{};
                    fam.residual(std::abs(actual.p - pq.p), "branch " + id + " P differs from sweep", tol);
                    fam.residual(std::abs(actual.q - pq.q), "branch " + id + " Q differs from sweep", tol);
                }
                for (const auto& [id, v] : sweep.voltages) {
                    if (!plan.voltages.count(id)) {
                        fam.fail("node " + id + ": missing voltage");
                        continue;
                    }
                    fam.residual(std::abs(plan.voltages.at(id) - v), "node " + id + " V differs from sweep",
                                 tol);
                }
                const Node& root = scenario.nodes[static_cast<std::size_t>(dgs.front())];
                PQ total;
                for (int n : picked) {
                    total.p += scenario.nodes[static_cast<std::size_t>(n)].load_p_mw;
                    total.q += scenario.nodes[static_cast<std::size_t>(n)].load_q_mvar;
                }
                const PQ dispatch = plan.dg_dispatch.count(root.id) ? plan.dg_dispatch.at(root.id) : PQ{};
                fam.residual(std::abs(dispatch.p - total.p), "dg " + root.id + " dispatch P mismatch", tol);
                fam.residual(std::abs(dispatch.q - total.q), "dg " + root.id + " dispatch Q mismatch", tol);
            }

            if (any_multi_dg) {
                // assemble the linear power-flow constraints and evaluate the
                // plan as a variable assignment
                BuiltModel bm;
                bm.scenario = scenario;
                bm.state = state;
                create_grid_variables(bm);
                emit_power_flow_constraints(bm);
                const MilpModel& m = bm.model;

                std::vector<double> x(m.variables.size(), 0.0);
                auto set_if = [&](const std::string& name, double v) {
                    if (m.has(name)) x[static_cast<std::size_t>(m.var(name))] = v;
                };
                for (const Node& n : scenario.nodes) {
                    const bool energized = plan_int(plan.energized, n.id) != 0;
                    set_if("delta:" + n.id, plan_int(plan.pickups, n.id));
                    set_if("e:" + n.id, energized ? 1.0 : 0.0);
                    const double v = plan.voltages.count(n.id) ? plan.voltages.at(n.id)
                                                               : scenario.options.voltage_ref;
                    set_if("V:" + n.id, v);
                    if (n.dg) {
                        const PQ d = plan.dg_dispatch.count(n.id) ? plan.dg_dispatch.at(n.id) : PQ{};
                        set_if("pg:" + n.id, d.p);
                        set_if("qg:" + n.id, d.q);
                    }
                }
                for (const Branch& b : scenario.branches) {
                    if (!m.has("alpha:" + b.id)) continue;
                    set_if("alpha:" + b.id, plan_int(plan.branch_state, b.id));
                    const PQ f = plan.flows.count(b.id) ? plan.flows.at(b.id) : PQ{};
                    set_if("P:" + b.id, f.p);
                    set_if("Q:" + b.id, f.q);
                }
                // one designated root per component: a DG sitting at the
                // reference voltage
                std::vector<bool> comp_has_root(static_cast<std::size_t>(n_components), false);
                for (const Node& n : scenario.nodes) {
                    if (!n.dg) continue;
                    const int label = comp_label[static_cast<std::size_t>(scenario.node_index.at(n.id))];
                    if (label < 0) continue;
                    if (comp_has_root[static_cast<std::size_t>(label)]) continue;
                    const double v = plan.voltages.count(n.id) ? plan.voltages.at(n.id) : 0.0;
                    if (std::abs(v - scenario.options.voltage_ref) <= tol) {
                        set_if("vroot:" + n.id, 1.0);
                        comp_has_root[static_cast<std::size_t>(label)] = true;
                    }
                }
                for (int comp = 0; comp < n_components; ++comp) {
                    if (!comp_has_root[static_cast<std::size_t>(comp)])
                        fam.fail("energized component has no DG at the reference voltage");
                }
                for (const LinCon& c : m.linear_constraints)
                    fam.residual(m.residual(c, x), "emitted constraint '" + c.tag + "' violated", tol);
            }
        }
        report.families["operation"] = fam.result;
    }

    // (g) pickup: delta gated by e, restored_mw consistent
    {
        detail::FamilyCheck fam;
        double restored = 0.0;
        for (const Node& n : scenario.nodes) {
            const int delta = plan_int(plan.pickups, n.id);
            const int e = plan_int(plan.energized, n.id);
            if (delta > e) fam.fail("node " + n.id + ": picked up while de-energized");
            if (delta) restored += n.load_p_mw;
        }
        fam.residual(std::abs(restored - plan.restored_mw), "restored_mw does not match pickups", 1e-9);
        report.families["pickup"] = fam.result;
    }

    return report;
}

} // namespace gridheal
