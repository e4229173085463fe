#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gridheal/errors.hpp"
#include "gridheal/geometry.hpp"

namespace gridheal {

struct DgRecord {
    double p_max_mw = 0.0;
    double q_max_mvar = 0.0; // defaults to p_max when absent from the document
};

struct Node {
    std::string id;
    Point position;
    double load_p_mw = 0.0;
    double load_q_mvar = 0.0;
    std::optional<DgRecord> dg;
};

struct Branch {
    std::string id;
    std::string from;
    std::string to;
    bool initial_closed = false; // L_ij
    bool switchable = true;      // remotely operable switches at both ends
    double r_pu = 0.0;
    double x_pu = 0.0;
    double s_max_mva = 0.0; // box limit applied to both P and Q
};

/// One remote-controlled switch, co-located with its host node. Two per
/// switchable branch, addressed "<branchId>@<nodeId>".
struct Switch {
    std::string branch_id;
    std::string node_id;
    Point position;

    std::string addr() const { return branch_id + "@" + node_id; }
};

/// Drone small cell: coverage disk of fixed radius, limited number of
/// simultaneous FTU connections.
struct Dsc {
    std::string id;
    double radius_m = 0.0;
    int capacity = 0;
    Point initial_position;
};

struct DamageScenario {
    std::set<std::string> faulted_branches;     // physically damaged, can never close
    std::set<std::string> comm_failed_switches; // S_f, by switch address
};

enum class PositionMode { Discrete, Continuous };

struct BigMPolicy {
    bool automatic = true;
    double m_coverage = 0.0;  // used only when !automatic
    double m_objective = 0.0; // used only when !automatic
};

struct SolveOptions {
    double voltage_min = 0.9;  // per-unit
    double voltage_max = 1.1;  // per-unit
    double voltage_ref = 1.0;  // per-unit
    double coverage_tol = 1e-6; // meters
    BigMPolicy big_m_policy;
    PositionMode position_mode = PositionMode::Discrete;
};

/// The single input artifact: network, damage and fleet. Immutable after
/// construction; safe to share across concurrent solves.
struct Scenario {
    std::vector<Node> nodes;
    std::vector<Branch> branches;
    std::vector<Switch> switches; // derived: two per switchable branch
    std::vector<Dsc> dscs;
    DamageScenario damage;
    SolveOptions options;

    std::map<std::string, int> node_index;
    std::map<std::string, int> branch_index;
    std::map<std::string, int> switch_index; // keyed by addr

    const Node& node(const std::string& id) const { return nodes[static_cast<std::size_t>(node_index.at(id))]; }
    const Branch& branch(const std::string& id) const { return branches[static_cast<std::size_t>(branch_index.at(id))]; }

    /// Derives the two switch records per switchable branch and rebuilds the
    /// id indexes. Throws ParseError on duplicate or dangling ids.
    void finalize() {
        node_index.clear();
        branch_index.clear();
        switch_index.clear();
        for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
            if (!node_index.emplace(nodes[static_cast<std::size_t>(i)].id, i).second)
                throw ParseError("duplicate node id '" + nodes[static_cast<std::size_t>(i)].id + "'");
        }
        for (int i = 0; i < static_cast<int>(branches.size()); ++i) {
            const Branch& b = branches[static_cast<std::size_t>(i)];
            if (!branch_index.emplace(b.id, i).second)
                throw ParseError("duplicate branch id '" + b.id + "'");
            for (const std::string* end : {&b.from, &b.to}) {
                if (!node_index.count(*end))
                    throw ParseError("branches[" + b.id + "]: dangling node reference '" + *end + "'");
            }
        }
        switches.clear();
        for (const Branch& b : branches) {
            if (!b.switchable) continue;
            for (const std::string* end : {&b.from, &b.to})
                switches.push_back(Switch{b.id, *end, node(*end).position});
        }
        for (int i = 0; i < static_cast<int>(switches.size()); ++i) {
            if (!switch_index.emplace(switches[static_cast<std::size_t>(i)].addr(), i).second)
                throw ParseError("duplicate switch address '" + switches[static_cast<std::size_t>(i)].addr() + "'");
        }
        for (const std::string& id : damage.faulted_branches) {
            if (!branch_index.count(id))
                throw ParseError("damage.faulted: dangling branch reference '" + id + "'");
        }
        for (const std::string& addr : damage.comm_failed_switches) {
            if (!switch_index.count(addr))
                throw ParseError("damage.comm_failed: dangling switch reference '" + addr + "'");
        }
        std::set<std::string> dsc_ids;
        for (const Dsc& d : dscs) {
            if (!dsc_ids.insert(d.id).second)
                throw ParseError("duplicate dsc id '" + d.id + "'");
        }
    }
};

struct Violation {
    std::string entity;
    std::string invariant;
};

/// Checks every domain-type invariant. Violations are data, not errors:
/// the list is empty iff the scenario is internally consistent.
inline std::vector<Violation> validate(const Scenario& s) {
    std::vector<Violation> out;
    auto flag = [&out](const std::string& entity, const std::string& what) {
        out.push_back(Violation{entity, what});
    };

    bool any_dg = false;
    for (const Node& n : s.nodes) {
        const std::string ent = "node " + n.id;
        if (!std::isfinite(n.position.x) || !std::isfinite(n.position.y)) flag(ent, "position must be finite");
        if (n.load_p_mw < 0.0) flag(ent, "load_p >= 0");
        if (n.load_q_mvar < 0.0) flag(ent, "load_q >= 0");
        if (n.dg) {
            any_dg = true;
            if (n.dg->p_max_mw <= 0.0) flag(ent, "dg.p_max > 0");
            if (n.dg->q_max_mvar < 0.0) flag(ent, "dg.q_max >= 0");
        }
    }
    if (!any_dg) flag("scenario", "at least one DG required");

    std::set<std::pair<std::string, std::string>> seen_pairs;
    for (const Branch& b : s.branches) {
        const std::string ent = "branch " + b.id;
        if (b.from == b.to) flag(ent, "from != to");
        auto key = std::minmax(b.from, b.to);
        if (!seen_pairs.insert(key).second) flag(ent, "duplicate unordered node pair");
        if (b.r_pu < 0.0) flag(ent, "r_pu >= 0");
        if (b.x_pu < 0.0) flag(ent, "x_pu >= 0");
        if (b.s_max_mva <= 0.0) flag(ent, "s_max > 0");
    }

    // switch records: exactly one per end of each switchable branch,
    // co-located with the host node
    std::map<std::string, std::set<std::string>> ends_by_branch;
    for (const Switch& sw : s.switches) {
        const std::string ent = "switch " + sw.addr();
        if (!s.branch_index.count(sw.branch_id)) {
            flag(ent, "references unknown branch");
            continue;
        }
        if (!s.node_index.count(sw.node_id)) {
            flag(ent, "references unknown node");
            continue;
        }
        if (sw.position != s.node(sw.node_id).position) flag(ent, "position must equal host node position");
        ends_by_branch[sw.branch_id].insert(sw.node_id);
    }
    for (const Branch& b : s.branches) {
        if (!b.switchable) continue;
        const auto it = ends_by_branch.find(b.id);
        const std::size_t n = it == ends_by_branch.end() ? 0 : it->second.size();
        if (n != 2) flag("branch " + b.id, "missing end switch (switchable branch needs one per end)");
    }

    for (const Dsc& d : s.dscs) {
        const std::string ent = "dsc " + d.id;
        if (d.radius_m <= 0.0) flag(ent, "radius > 0");
        if (d.capacity < 1) flag(ent, "capacity >= 1");
        if (!std::isfinite(d.initial_position.x) || !std::isfinite(d.initial_position.y))
            flag(ent, "initial position must be finite");
    }

    const SolveOptions& o = s.options;
    if (!(0.0 < o.voltage_min && o.voltage_min < o.voltage_ref && o.voltage_ref <= o.voltage_max))
        flag("options", "0 < voltage_min < voltage_ref <= voltage_max");
    if (o.coverage_tol < 0.0) flag("options", "coverage_tol >= 0");

    // connectivity over the full physical graph (open ties still connect)
    if (!s.nodes.empty()) {
        std::vector<int> parent(s.nodes.size());
        for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
        std::function<int(int)> find = [&](int v) { return parent[static_cast<std::size_t>(v)] == v ? v : parent[static_cast<std::size_t>(v)] = find(parent[static_cast<std::size_t>(v)]); };
        for (const Branch& b : s.branches) {
            if (!s.node_index.count(b.from) || !s.node_index.count(b.to)) continue;
            const int a = find(s.node_index.at(b.from));
            const int c = find(s.node_index.at(b.to));
            if (a != c) parent[static_cast<std::size_t>(a)] = c;
        }
        const int root = find(0);
        for (std::size_t i = 1; i < parent.size(); ++i) {
            if (find(static_cast<int>(i)) != root) {
                flag("scenario", "graph must be connected pre-damage");
                break;
            }
        }
    }
    return out;
}

/// Post-damage view of the network: faulted branches forced open and
/// unclosable, S_f materialized, non-switchable branches state-frozen.
struct OperationalState {
    Scenario scenario;
    std::vector<bool> branch_faulted;          // by branch index
    std::vector<bool> branch_effective_closed; // L after faults force open
    std::vector<bool> branch_state_frozen;     // no remote switches
    std::vector<int> failed_switches;          // switch indices, sorted by addr
    std::set<std::string> failed_addrs;

    bool is_comm_failed(const std::string& addr) const { return failed_addrs.count(addr) != 0; }
};

inline OperationalState apply_damage(const Scenario& s) {
    OperationalState st;
    st.scenario = s;
    st.branch_faulted.resize(s.branches.size());
    st.branch_effective_closed.resize(s.branches.size());
    st.branch_state_frozen.resize(s.branches.size());
    for (std::size_t i = 0; i < s.branches.size(); ++i) {
        const Branch& b = s.branches[i];
        const bool faulted = s.damage.faulted_branches.count(b.id) != 0;
        st.branch_faulted[i] = faulted;
        // physical damage overrides state freezing: a faulted branch is open
        // no matter what L_ij said
        st.branch_effective_closed[i] = b.initial_closed && !faulted;
        st.branch_state_frozen[i] = !b.switchable;
    }
    st.failed_addrs = s.damage.comm_failed_switches;
    std::map<std::string, int> by_addr;
    for (int i = 0; i < static_cast<int>(s.switches.size()); ++i) {
        const std::string addr = s.switches[static_cast<std::size_t>(i)].addr();
        if (st.failed_addrs.count(addr)) by_addr.emplace(addr, i);
    }
    for (const auto& [addr, idx] : by_addr) st.failed_switches.push_back(idx);
    return st;
}

/// Extent used for big-M sizing: nodes plus fleet initial positions.
inline BoundingBox scenario_extent(const Scenario& s) {
    BoundingBox box;
    for (const Node& n : s.nodes) box.extend(n.position);
    for (const Dsc& d : s.dscs) box.extend(d.initial_position);
    return box;
}

} // namespace gridheal
