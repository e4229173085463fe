#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "gridheal/candidates.hpp"
#include "gridheal/errors.hpp"
#include "gridheal/milp.hpp"
#include "gridheal/plan.hpp"
#include "gridheal/scenario.hpp"

namespace gridheal {

enum class Strategy { Proposed, NoDsc, MaxCommStage1, MaxCommStage2 };

inline const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::Proposed: return "proposed";
        case Strategy::NoDsc: return "nodsc";
        case Strategy::MaxCommStage1: return "maxcomm-stage1";
        default: return "maxcomm";
    }
}

/// A model plus everything needed to map raw solutions back onto a plan.
struct BuiltModel {
    MilpModel model;
    Strategy strategy = Strategy::Proposed;
    PositionMode mode = PositionMode::Discrete;
    Scenario scenario;                  // immutable copy
    OperationalState state;             // post-damage view used for the build
    std::vector<Dsc> fleet;
    std::vector<DscCandidates> candidates; // per fleet index (discrete mode)
    CandidateSet raw_candidates;           // undeduplicated geometric set
    BigM bigm;
    double eq9_divisor = 1.0;
    BoundingBox extent;
};

namespace detail {

inline std::string arc_symbol(const char* sym, const Scenario& s, const Switch& sw) {
    const Branch& b = s.branch(sw.branch_id);
    const std::string& other = sw.node_id == b.from ? b.to : b.from;
    return std::string(sym) + "(" + sw.node_id + "," + other + ")";
}

inline std::string pad3(int v) {
    std::string s = std::to_string(v);
    while (s.size() < 3) s.insert(s.begin(), '0');
    return s;
}

} // namespace detail

/// Creates the decision variables shared by the full restoration model.
/// Faulted branches get no alpha/mu/flow variables at all: no downstream
/// constraint can ever decide to close them.
inline void create_grid_variables(BuiltModel& bm) {
    MilpModel& m = bm.model;
    const Scenario& s = bm.scenario;
    const SolveOptions& o = s.options;
    const double n_nodes = static_cast<double>(s.nodes.size());

    for (const Node& n : s.nodes) {
        m.add_binary("delta:" + n.id, "δ(" + n.id + ")");
        m.add_binary("e:" + n.id, "e(" + n.id + ")");
        m.add_variable("V:" + n.id, VarKind::Continuous, o.voltage_min - 1.0, o.voltage_max + 1.0,
                       "V(" + n.id + ")");
        if (n.dg) {
            m.add_variable("pg:" + n.id, VarKind::Continuous, 0.0, n.dg->p_max_mw, "p^g(" + n.id + ")");
            m.add_variable("qg:" + n.id, VarKind::Continuous, 0.0, n.dg->q_max_mvar, "q^g(" + n.id + ")");
            m.add_binary("vroot:" + n.id, "v(" + n.id + ")");
            m.add_variable("Fv:" + n.id, VarKind::Continuous, 0.0, n_nodes, "F(0," + n.id + ")");
        }
    }
    for (std::size_t i = 0; i < s.branches.size(); ++i) {
        const Branch& b = s.branches[i];
        if (bm.state.branch_faulted[i]) continue;
        const std::string pair = "(" + b.from + "," + b.to + ")";
        m.add_binary("alpha:" + b.id, "α" + pair);
        // state-frozen branches have no remote switches: mu pinned to 0
        const double mu_ub = bm.state.branch_state_frozen[i] ? 0.0 : 1.0;
        m.add_binary("mu:" + b.id, "μ" + pair, 0.0, mu_ub);
        m.add_variable("P:" + b.id, VarKind::Continuous, -b.s_max_mva, b.s_max_mva, "P" + pair);
        m.add_variable("Q:" + b.id, VarKind::Continuous, -b.s_max_mva, b.s_max_mva, "Q" + pair);
        m.add_variable("F:" + b.id, VarKind::Continuous, -n_nodes, n_nodes, "F" + pair);
    }
}

/// gamma for every switch, lambda per (comm-failed switch, DSC), and the
/// position variables: candidate-selection binaries in discrete mode, or
/// coordinates plus distances and travel epigraphs in continuous mode.
inline void create_comm_variables(BuiltModel& bm) {
    MilpModel& m = bm.model;
    const Scenario& s = bm.scenario;

    for (const Switch& sw : s.switches)
        m.add_binary("gamma:" + sw.addr(), detail::arc_symbol("γ", s, sw));

    for (std::size_t k = 0; k < bm.fleet.size(); ++k) {
        const Dsc& d = bm.fleet[k];
        for (int fi : bm.state.failed_switches) {
            const Switch& sw = s.switches[static_cast<std::size_t>(fi)];
            m.add_binary("lambda:" + sw.addr() + ":" + d.id,
                         detail::arc_symbol("λ", s, sw) + "@k=" + d.id);
        }
        if (bm.mode == PositionMode::Discrete) {
            const DscCandidates& dc = bm.candidates[k];
            for (int c = 0; c < static_cast<int>(dc.positions.size()); ++c)
                m.add_binary("z:" + d.id + ":" + detail::pad3(c), "z@k=" + d.id + ",c=" + std::to_string(c));
        } else {
            m.add_variable("xbar:" + d.id, VarKind::Continuous, bm.extent.min_x, bm.extent.max_x,
                           "x̄@k=" + d.id);
            m.add_variable("ybar:" + d.id, VarKind::Continuous, bm.extent.min_y, bm.extent.max_y,
                           "ȳ@k=" + d.id);
            const double d_max = bm.extent.diagonal() + d.radius_m;
            for (int fi : bm.state.failed_switches) {
                const Switch& sw = s.switches[static_cast<std::size_t>(fi)];
                m.add_variable("dist:" + sw.addr() + ":" + d.id, VarKind::Continuous, 0.0, d_max,
                               "d" + detail::arc_symbol("", s, sw) + "@k=" + d.id);
            }
            const double t_max = d_max * d_max;
            m.add_variable("tsq:" + d.id, VarKind::Continuous, 0.0, t_max, "t@k=" + d.id);
        }
    }
}

/// Eqs. 3, 5, 8 and 9: capacity, normal-area operability, coverage linking
/// and the lambda-to-gamma squeeze. In discrete mode the disk test is
/// precomputed into the candidate coverage matrix; in continuous mode the
/// distance is tied to the coordinates by a cone and the indicator uses the
/// big-M form.
inline int emit_comm_constraints(BuiltModel& bm) {
    MilpModel& m = bm.model;
    const Scenario& s = bm.scenario;
    int count = 0;

    // normal-communication switches can always be operated
    for (const Switch& sw : s.switches) {
        if (bm.state.is_comm_failed(sw.addr())) continue;
        m.add_constraint({{m.var("gamma:" + sw.addr()), 1.0}}, Sense::EQ, 1.0, "eq5");
        ++count;
    }

    for (std::size_t k = 0; k < bm.fleet.size(); ++k) {
        const Dsc& d = bm.fleet[k];
        if (d.capacity < 0) throw Error("dsc " + d.id + ": negative capacity");

        if (bm.mode == PositionMode::Discrete) {
            const DscCandidates& dc = bm.candidates[k];
            if (dc.positions.empty()) throw Error("dsc " + d.id + ": empty candidate set");
            std::vector<LinTerm> one;
            for (int c = 0; c < static_cast<int>(dc.positions.size()); ++c)
                one.push_back({m.var("z:" + d.id + ":" + detail::pad3(c)), 1.0});
            m.add_constraint(std::move(one), Sense::EQ, 1.0, "eq1");
            ++count;

            for (std::size_t fs = 0; fs < bm.state.failed_switches.size(); ++fs) {
                const Switch& sw = s.switches[static_cast<std::size_t>(bm.state.failed_switches[fs])];
                std::vector<LinTerm> terms{{m.var("lambda:" + sw.addr() + ":" + d.id), 1.0}};
                for (int c = 0; c < static_cast<int>(dc.positions.size()); ++c) {
                    if (dc.covers[static_cast<std::size_t>(c)][fs])
                        terms.push_back({m.var("z:" + d.id + ":" + detail::pad3(c)), -1.0});
                }
                m.add_constraint(std::move(terms), Sense::LE, 0.0, "eq8");
                ++count;
            }
        } else {
            const double M = bm.bigm.m_coverage;
            for (int fi : bm.state.failed_switches) {
                const Switch& sw = s.switches[static_cast<std::size_t>(fi)];
                const int lam = m.var("lambda:" + sw.addr() + ":" + d.id);
                const int dist = m.var("dist:" + sw.addr() + ":" + d.id);
                // d >= ||(xbar - x_mn, ybar - y_mn)||; the relaxation keeps
                // the feasible region intact because only small d helps
                SocCon cone;
                cone.norm.push_back(AffineExpr{{{m.var("xbar:" + d.id), 1.0}}, -sw.position.x});
                cone.norm.push_back(AffineExpr{{{m.var("ybar:" + d.id), 1.0}}, -sw.position.y});
                cone.rhs = AffineExpr{{{dist, 1.0}}, 0.0};
                cone.tag = "eq1";
                bm.model.soc_constraints.push_back(std::move(cone));
                ++count;
                // (r - d)/M - 1 <= lambda <= (r - d)/M + 1
                m.add_constraint({{lam, 1.0}, {dist, 1.0 / M}}, Sense::LE, d.radius_m / M + 1.0, "eq8");
                m.add_constraint({{lam, 1.0}, {dist, 1.0 / M}}, Sense::GE, d.radius_m / M - 1.0, "eq8");
                count += 2;
            }
        }

        if (!bm.state.failed_switches.empty()) {
            std::vector<LinTerm> cap;
            for (int fi : bm.state.failed_switches) {
                const Switch& sw = s.switches[static_cast<std::size_t>(fi)];
                cap.push_back({m.var("lambda:" + sw.addr() + ":" + d.id), 1.0});
            }
            m.add_constraint(std::move(cap), Sense::LE, static_cast<double>(d.capacity), "eq3");
            ++count;
        }
    }

    // squeeze: sum_k lambda / M <= gamma <= sum_k lambda
    for (int fi : bm.state.failed_switches) {
        const Switch& sw = s.switches[static_cast<std::size_t>(fi)];
        const int g = m.var("gamma:" + sw.addr());
        std::vector<LinTerm> upper{{g, 1.0}};
        std::vector<LinTerm> lower{{g, -bm.eq9_divisor}};
        for (const Dsc& d : bm.fleet) {
            const int lam = m.var("lambda:" + sw.addr() + ":" + d.id);
            upper.push_back({lam, -1.0});
            lower.push_back({lam, 1.0});
        }
        m.add_constraint(std::move(upper), Sense::LE, 0.0, "eq9");
        m.add_constraint(std::move(lower), Sense::LE, 0.0, "eq9");
        count += 2;
    }

    // identical drones are interchangeable; ordering their candidate picks
    // prunes symmetric branches without touching the optimal value
    if (bm.mode == PositionMode::Discrete) {
        for (std::size_t k = 0; k + 1 < bm.fleet.size(); ++k) {
            const Dsc& a = bm.fleet[k];
            const Dsc& b = bm.fleet[k + 1];
            if (a.radius_m != b.radius_m || a.capacity != b.capacity ||
                !(a.initial_position == b.initial_position))
                continue;
            std::vector<LinTerm> terms;
            for (int c = 0; c < static_cast<int>(bm.candidates[k].positions.size()); ++c) {
                terms.push_back({m.var("z:" + a.id + ":" + detail::pad3(c)), static_cast<double>(c)});
                terms.push_back({m.var("z:" + b.id + ":" + detail::pad3(c)), -static_cast<double>(c)});
            }
            m.add_constraint(std::move(terms), Sense::LE, 0.0, "symmetry");
            ++count;
        }
    }
    return count;
}

/// Eq. 11 (mu = gamma_ij * gamma_ji, linearized) and Eq. 10
/// ((1 - mu) L <= alpha <= mu + L) for every non-faulted branch.
inline int emit_switchability_constraints(BuiltModel& bm) {
    MilpModel& m = bm.model;
    const Scenario& s = bm.scenario;
    int count = 0;

    for (std::size_t i = 0; i < s.branches.size(); ++i) {
        if (bm.state.branch_faulted[i]) continue;
        const Branch& b = s.branches[i];
        const int mu = m.var("mu:" + b.id);
        const int alpha = m.var("alpha:" + b.id);

        if (b.switchable) {
            const int g_from = m.var("gamma:" + b.id + "@" + b.from);
            const int g_to = m.var("gamma:" + b.id + "@" + b.to);
            m.add_constraint({{mu, 1.0}, {g_from, -1.0}}, Sense::LE, 0.0, "eq11");
            m.add_constraint({{mu, 1.0}, {g_to, -1.0}}, Sense::LE, 0.0, "eq11");
            m.add_constraint({{g_from, 1.0}, {g_to, 1.0}, {mu, -1.0}}, Sense::LE, 1.0, "eq11");
            count += 3;
        }
        // non-switchable branches rely on mu's zero upper bound

        const double L = bm.state.branch_effective_closed[i] ? 1.0 : 0.0;
        m.add_constraint({{alpha, 1.0}, {mu, L}}, Sense::GE, L, "eq10");
        m.add_constraint({{alpha, 1.0}, {mu, -1.0}}, Sense::LE, L, "eq10");
        count += 2;
    }
    return count;
}

/// Virtual-root spanning forest: energized nodes form trees, each tree
/// holding at least one DG with exactly one designated root. A fictitious
/// single-commodity flow from a virtual source through root DGs certifies
/// connectivity; the tree-count equality pins down acyclicity.
inline int emit_radiality_constraints(BuiltModel& bm) {
    MilpModel& m = bm.model;
    const Scenario& s = bm.scenario;
    const double big = static_cast<double>(s.nodes.size());
    int count = 0;

    bool any_dg = false;
    for (const Node& n : s.nodes) any_dg = any_dg || n.dg.has_value();
    if (!any_dg) throw Error("radiality: scenario has no DG");

    std::vector<LinTerm> tree_count;
    for (std::size_t i = 0; i < s.branches.size(); ++i) {
        if (bm.state.branch_faulted[i]) continue;
        const Branch& b = s.branches[i];
        const int alpha = m.var("alpha:" + b.id);
        const int flow = m.var("F:" + b.id);
        m.add_constraint({{alpha, 1.0}, {m.var("e:" + b.from), -1.0}}, Sense::LE, 0.0, "radiality");
        m.add_constraint({{alpha, 1.0}, {m.var("e:" + b.to), -1.0}}, Sense::LE, 0.0, "radiality");
        m.add_constraint({{flow, 1.0}, {alpha, -big}}, Sense::LE, 0.0, "radiality");
        m.add_constraint({{flow, 1.0}, {alpha, big}}, Sense::GE, 0.0, "radiality");
        count += 4;
        tree_count.push_back({alpha, 1.0});
    }

    std::vector<LinTerm> source;
    for (const Node& n : s.nodes) {
        const int e = m.var("e:" + n.id);
        tree_count.push_back({e, -1.0});
        source.push_back({e, -1.0});
        if (n.dg) {
            const int v = m.var("vroot:" + n.id);
            const int fv = m.var("Fv:" + n.id);
            m.add_constraint({{v, 1.0}, {e, -1.0}}, Sense::LE, 0.0, "radiality");
            m.add_constraint({{fv, 1.0}, {v, -big}}, Sense::LE, 0.0, "radiality");
            count += 2;
            tree_count.push_back({v, 1.0});
            source.push_back({fv, 1.0});
        }
    }
    m.add_constraint(std::move(tree_count), Sense::EQ, 0.0, "radiality");
    m.add_constraint(std::move(source), Sense::EQ, 0.0, "radiality");
    count += 2;

    // each energized node consumes one unit of fictitious flow
    for (const Node& n : s.nodes) {
        std::vector<LinTerm> balance;
        for (std::size_t i = 0; i < s.branches.size(); ++i) {
            if (bm.state.branch_faulted[i]) continue;
            const Branch& b = s.branches[i];
            if (b.to == n.id) balance.push_back({m.var("F:" + b.id), 1.0});
            else if (b.from == n.id) balance.push_back({m.var("F:" + b.id), -1.0});
        }
        if (n.dg) balance.push_back({m.var("Fv:" + n.id), 1.0});
        balance.push_back({m.var("e:" + n.id), -1.0});
        m.add_constraint(std::move(balance), Sense::EQ, 0.0, "radiality");
        ++count;
    }
    return count;
}

/// Lossless linearized branch flow: nodal balance, DG limits gated by e,
/// flow boxes gated by alpha, voltage drop with big-M switching, voltage
/// bounds relaxed for de-energized nodes, reference pinning at designated
/// roots, and the delta <= e pickup gate.
inline int emit_power_flow_constraints(BuiltModel& bm) {
    MilpModel& m = bm.model;
    const Scenario& s = bm.scenario;
    const SolveOptions& o = s.options;
    if (o.voltage_ref <= 0.0) throw Error("power flow: voltage_ref must be positive");
    int count = 0;

    double max_rx = 0.0;
    double max_smax = 0.0;
    for (const Branch& b : s.branches) {
        max_rx = std::max(max_rx, b.r_pu + b.x_pu);
        max_smax = std::max(max_smax, b.s_max_mva);
    }
    const double m_v = (o.voltage_max - o.voltage_min) + 2.0 * max_smax * max_rx / o.voltage_ref;

    for (std::size_t i = 0; i < s.branches.size(); ++i) {
        if (bm.state.branch_faulted[i]) continue;
        const Branch& b = s.branches[i];
        const int alpha = m.var("alpha:" + b.id);
        const int P = m.var("P:" + b.id);
        const int Q = m.var("Q:" + b.id);
        m.add_constraint({{P, 1.0}, {alpha, -b.s_max_mva}}, Sense::LE, 0.0, "flow");
        m.add_constraint({{P, 1.0}, {alpha, b.s_max_mva}}, Sense::GE, 0.0, "flow");
        m.add_constraint({{Q, 1.0}, {alpha, -b.s_max_mva}}, Sense::LE, 0.0, "flow");
        m.add_constraint({{Q, 1.0}, {alpha, b.s_max_mva}}, Sense::GE, 0.0, "flow");
        count += 4;

        const int vi = m.var("V:" + b.from);
        const int vj = m.var("V:" + b.to);
        const double rc = b.r_pu / o.voltage_ref;
        const double xc = b.x_pu / o.voltage_ref;
        // V_j = V_i - (r P + x Q)/V_ref when alpha = 1, free otherwise
        m.add_constraint({{vj, 1.0}, {vi, -1.0}, {P, rc}, {Q, xc}, {alpha, m_v}}, Sense::LE, m_v,
                         "voltage");
        m.add_constraint({{vj, 1.0}, {vi, -1.0}, {P, rc}, {Q, xc}, {alpha, -m_v}}, Sense::GE, -m_v,
                         "voltage");
        count += 2;
    }

    for (const Node& n : s.nodes) {
        std::vector<LinTerm> p_bal;
        std::vector<LinTerm> q_bal;
        for (std::size_t i = 0; i < s.branches.size(); ++i) {
            if (bm.state.branch_faulted[i]) continue;
            const Branch& b = s.branches[i];
            double sign = 0.0;
            if (b.to == n.id) sign = 1.0;
            else if (b.from == n.id) sign = -1.0;
            else continue;
            p_bal.push_back({m.var("P:" + b.id), sign});
            q_bal.push_back({m.var("Q:" + b.id), sign});
        }
        if (n.dg) {
            p_bal.push_back({m.var("pg:" + n.id), 1.0});
            q_bal.push_back({m.var("qg:" + n.id), 1.0});
        }
        const int delta = m.var("delta:" + n.id);
        p_bal.push_back({delta, -n.load_p_mw});
        q_bal.push_back({delta, -n.load_q_mvar});
        m.add_constraint(std::move(p_bal), Sense::EQ, 0.0, "flow");
        m.add_constraint(std::move(q_bal), Sense::EQ, 0.0, "flow");
        count += 2;

        const int e = m.var("e:" + n.id);
        const int V = m.var("V:" + n.id);
        m.add_constraint({{V, 1.0}, {e, -1.0}}, Sense::GE, o.voltage_min - 1.0, "voltage");
        m.add_constraint({{V, 1.0}, {e, 1.0}}, Sense::LE, o.voltage_max + 1.0, "voltage");
        m.add_constraint({{delta, 1.0}, {e, -1.0}}, Sense::LE, 0.0, "pickup");
        count += 3;

        if (n.dg) {
            m.add_constraint({{m.var("pg:" + n.id), 1.0}, {e, -n.dg->p_max_mw}}, Sense::LE, 0.0, "dg");
            m.add_constraint({{m.var("qg:" + n.id), 1.0}, {e, -n.dg->q_max_mvar}}, Sense::LE, 0.0, "dg");
            const int v = m.var("vroot:" + n.id);
            m.add_constraint({{V, 1.0}, {v, 1.0}}, Sense::LE, o.voltage_ref + 1.0, "voltage");
            m.add_constraint({{V, 1.0}, {v, -1.0}}, Sense::GE, o.voltage_ref - 1.0, "voltage");
            count += 4;
        }
    }
    return count;
}

/// Eq. 12: maximize restored active load; the scaled travel term breaks
/// ties toward the shortest total DSC displacement and can never outweigh
/// a single load pickup.
inline void emit_objective(BuiltModel& bm) {
    MilpModel& m = bm.model;
    m.objective.maximize = true;
    for (const Node& n : bm.scenario.nodes) {
        if (n.load_p_mw != 0.0)
            m.objective.terms.push_back({m.var("delta:" + n.id), n.load_p_mw});
    }
    for (std::size_t k = 0; k < bm.fleet.size(); ++k) {
        const Dsc& d = bm.fleet[k];
        if (bm.mode == PositionMode::Discrete) {
            const DscCandidates& dc = bm.candidates[k];
            for (int c = 0; c < static_cast<int>(dc.positions.size()); ++c) {
                const double t = dc.travel_sq[static_cast<std::size_t>(c)];
                if (t != 0.0)
                    m.objective.terms.push_back(
                        {m.var("z:" + d.id + ":" + detail::pad3(c)), -t / bm.bigm.m_objective});
            }
        } else {
            // epigraph of the squared travel distance as a rotated cone:
            // ||(x - xo, y - yo, (t - 1)/2)|| <= (t + 1)/2
            SocCon cone;
            cone.norm.push_back(AffineExpr{{{m.var("xbar:" + d.id), 1.0}}, -d.initial_position.x});
            cone.norm.push_back(AffineExpr{{{m.var("ybar:" + d.id), 1.0}}, -d.initial_position.y});
            cone.norm.push_back(AffineExpr{{{m.var("tsq:" + d.id), 0.5}}, -0.5});
            cone.rhs = AffineExpr{{{m.var("tsq:" + d.id), 0.5}}, 0.5};
            cone.tag = "objective-travel";
            m.soc_constraints.push_back(std::move(cone));
            m.objective.terms.push_back({m.var("tsq:" + d.id), -1.0 / bm.bigm.m_objective});
        }
    }
}

namespace detail {

inline void prepare_candidates_and_bigm(BuiltModel& bm, double min_load_for_objective) {
    const Scenario& s = bm.scenario;
    bm.mode = s.options.position_mode;
    bm.raw_candidates = bm.fleet.empty() ? CandidateSet{} : generate_candidates(bm.state, bm.fleet);
    if (bm.mode == PositionMode::Discrete) bm.candidates = fleet_candidates(bm.state, bm.fleet);

    bm.extent = scenario_extent(s);
    for (std::size_t k = 0; k < bm.candidates.size(); ++k)
        for (const Point& p : bm.candidates[k].positions) bm.extent.extend(p);
    for (const Point& p : bm.raw_candidates.positions) bm.extent.extend(p);
    if (bm.extent.empty()) bm.extent.extend(Point{0.0, 0.0});
    bm.extent.inflate(1.0); // keeps the worst-case travel strictly inside the diagonal

    double radius = 0.0;
    for (const Dsc& d : bm.fleet) radius = std::max(radius, d.radius_m);
    if (s.options.big_m_policy.automatic) {
        bm.bigm = pick_big_m(bm.extent, radius, min_load_for_objective,
                             std::max<std::size_t>(bm.fleet.size(), 1));
    } else {
        bm.bigm.m_coverage = s.options.big_m_policy.m_coverage;
        bm.bigm.m_objective = s.options.big_m_policy.m_objective;
    }
    bm.eq9_divisor = std::max(1.0, static_cast<double>(bm.fleet.size()));
}

} // namespace detail

/// The integrated restoration model: communication recovery, switchability,
/// radiality, linearized power flow and the load-first objective.
inline BuiltModel build_proposed(const OperationalState& state, const std::vector<Dsc>& fleet,
                                 Strategy tag = Strategy::Proposed) {
    BuiltModel bm;
    bm.strategy = tag;
    bm.scenario = state.scenario;
    bm.state = state;
    bm.fleet = fleet;
    detail::prepare_candidates_and_bigm(bm, min_positive_load(bm.scenario));

    create_grid_variables(bm);
    create_comm_variables(bm);
    emit_comm_constraints(bm);
    emit_switchability_constraints(bm);
    emit_radiality_constraints(bm);
    emit_power_flow_constraints(bm);
    emit_objective(bm);
    return bm;
}

/// Benchmark 1: restoration without any DSC. Every comm-failed switch stays
/// inoperable (the empty lambda sum squeezes gamma to zero).
inline BuiltModel build_nodsc(const OperationalState& state) {
    return build_proposed(state, {}, Strategy::NoDsc);
}

/// Stage 1 of the MaxComm benchmark: maximize the number of restored
/// switch connections subject to the communication constraints only, with
/// the same travel tie-break (one recovered connection outweighs any
/// travel).
inline BuiltModel build_maxcomm_stage1(const OperationalState& state, const std::vector<Dsc>& fleet) {
    BuiltModel bm;
    bm.strategy = Strategy::MaxCommStage1;
    bm.scenario = state.scenario;
    bm.state = state;
    bm.fleet = fleet;
    detail::prepare_candidates_and_bigm(bm, 1.0); // unit "load" per connection

    create_comm_variables(bm);
    emit_comm_constraints(bm);

    MilpModel& m = bm.model;
    m.objective.maximize = true;
    for (std::size_t k = 0; k < bm.fleet.size(); ++k) {
        const Dsc& d = bm.fleet[k];
        for (int fi : bm.state.failed_switches) {
            const Switch& sw = bm.scenario.switches[static_cast<std::size_t>(fi)];
            m.objective.terms.push_back({m.var("lambda:" + sw.addr() + ":" + d.id), 1.0});
        }
        if (bm.mode == PositionMode::Discrete) {
            const DscCandidates& dc = bm.candidates[k];
            for (int c = 0; c < static_cast<int>(dc.positions.size()); ++c) {
                const double t = dc.travel_sq[static_cast<std::size_t>(c)];
                if (t != 0.0)
                    m.objective.terms.push_back(
                        {m.var("z:" + d.id + ":" + detail::pad3(c)), -t / bm.bigm.m_objective});
            }
        } else {
            SocCon cone;
            cone.norm.push_back(AffineExpr{{{m.var("xbar:" + d.id), 1.0}}, -d.initial_position.x});
            cone.norm.push_back(AffineExpr{{{m.var("ybar:" + d.id), 1.0}}, -d.initial_position.y});
            cone.norm.push_back(AffineExpr{{{m.var("tsq:" + d.id), 0.5}}, -0.5});
            cone.rhs = AffineExpr{{{m.var("tsq:" + d.id), 0.5}}, 0.5};
            cone.tag = "objective-travel";
            m.soc_constraints.push_back(std::move(cone));
            m.objective.terms.push_back({m.var("tsq:" + d.id), -1.0 / bm.bigm.m_objective});
        }
    }
    return bm;
}

/// Stage-1 outcome handed to stage 2: the maximal connection count and the
/// minimal travel that achieves it.
struct MaxCommStage1Result {
    int lambda_total = 0;
    double travel_sq_total = 0.0;
};

/// Stage 2: the full restoration model with the communication decisions
/// constrained to stage-1 optimality. Keeping lambda/placement variable
/// (rather than freezing one arbitrary stage-1 optimum) makes the pipeline
/// value well defined when stage 1 has ties.
inline BuiltModel build_maxcomm_stage2(const OperationalState& state, const std::vector<Dsc>& fleet,
                                       const MaxCommStage1Result& stage1) {
    BuiltModel bm = build_proposed(state, fleet, Strategy::MaxCommStage2);
    MilpModel& m = bm.model;

    std::vector<LinTerm> lam_sum;
    for (const Dsc& d : bm.fleet) {
        for (int fi : bm.state.failed_switches) {
            const Switch& sw = bm.scenario.switches[static_cast<std::size_t>(fi)];
            lam_sum.push_back({m.var("lambda:" + sw.addr() + ":" + d.id), 1.0});
        }
    }
    if (!lam_sum.empty())
        m.add_constraint(std::move(lam_sum), Sense::EQ, static_cast<double>(stage1.lambda_total),
                         "maxcomm-pin");

    if (!bm.fleet.empty()) {
        std::vector<LinTerm> travel;
        if (bm.mode == PositionMode::Discrete) {
            for (std::size_t k = 0; k < bm.fleet.size(); ++k) {
                const DscCandidates& dc = bm.candidates[k];
                for (int c = 0; c < static_cast<int>(dc.positions.size()); ++c) {
                    const double t = dc.travel_sq[static_cast<std::size_t>(c)];
                    if (t != 0.0)
                        travel.push_back({m.var("z:" + bm.fleet[k].id + ":" + detail::pad3(c)), t});
                }
            }
        } else {
            for (const Dsc& d : bm.fleet) travel.push_back({m.var("tsq:" + d.id), 1.0});
        }
        const double slack = 1e-6 * (1.0 + std::abs(stage1.travel_sq_total));
        m.add_constraint(std::move(travel), Sense::LE, stage1.travel_sq_total + slack, "maxcomm-pin");
    }
    return bm;
}

} // namespace gridheal
