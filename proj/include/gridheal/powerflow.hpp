#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "gridheal/errors.hpp"
#include "gridheal/plan.hpp"
#include "gridheal/scenario.hpp"

namespace gridheal {

struct SweepViolation {
    std::string kind; // voltage | dg_p | dg_q | thermal
    std::string entity;
    double margin = 0.0;
};

struct SweepResult {
    std::map<std::string, PQ> flows;      // per tree branch, signed from->to
    std::map<std::string, double> voltages; // per tree node, per-unit
    bool feasible = true;
    std::vector<SweepViolation> violations;
};

/// Exact lossless power flow on a rooted tree: branch flow equals the sum
/// of downstream picked-up loads, voltage drops linearly from the
/// reference-pinned root. The root must be the tree's single DG.
inline SweepResult forward_sweep(const Scenario& s, const std::vector<int>& tree_branches,
                                 int root_node, const std::set<int>& pickups) {
    const Node& root = s.nodes.at(static_cast<std::size_t>(root_node));
    if (!root.dg) throw Error("forward_sweep: root node '" + root.id + "' is not a DG");

    // adjacency restricted to the given branches
    std::map<int, std::vector<std::pair<int, int>>> adj; // node -> (neighbor, branch)
    std::set<int> tree_nodes{root_node};
    for (int bi : tree_branches) {
        const Branch& b = s.branches.at(static_cast<std::size_t>(bi));
        const int u = s.node_index.at(b.from);
        const int v = s.node_index.at(b.to);
        adj[u].push_back({v, bi});
        adj[v].push_back({u, bi});
        tree_nodes.insert(u);
        tree_nodes.insert(v);
    }
    if (tree_branches.size() + 1 != tree_nodes.size())
        throw Error("forward_sweep: topology is not a tree (branch/node count mismatch)");

    for (int p : pickups) {
        if (!tree_nodes.count(p))
            throw Error("forward_sweep: pickup node outside the tree");
    }

    // BFS from the root; a revisit or an unreached branch means no tree
    std::map<int, int> parent;     // node -> parent node
    std::map<int, int> parent_arc; // node -> branch to parent
    std::vector<int> order;
    std::set<int> seen{root_node};
    std::queue<int> q;
    q.push(root_node);
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        order.push_back(u);
        for (const auto& [v, bi] : adj[u]) {
            if (parent_arc.count(u) && parent_arc[u] == bi) continue;
            if (seen.count(v)) throw Error("forward_sweep: topology is not a tree (cycle)");
            seen.insert(v);
            parent[v] = u;
            parent_arc[v] = bi;
            q.push(v);
        }
    }
    if (seen.size() != tree_nodes.size())
        throw Error("forward_sweep: topology is not a tree (disconnected)");
    for (int n : tree_nodes) {
        if (n != root_node && s.nodes[static_cast<std::size_t>(n)].dg)
            throw Error("forward_sweep: tree contains a second DG at node '" +
                        s.nodes[static_cast<std::size_t>(n)].id + "'");
    }

    // subtree load sums, leaves first
    std::map<int, PQ> subtree;
    for (int n : tree_nodes) {
        PQ pq;
        if (pickups.count(n)) {
            pq.p = s.nodes[static_cast<std::size_t>(n)].load_p_mw;
            pq.q = s.nodes[static_cast<std::size_t>(n)].load_q_mvar;
        }
        subtree[n] = pq;
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const int n = *it;
        if (n == root_node) continue;
        subtree[parent[n]].p += subtree[n].p;
        subtree[parent[n]].q += subtree[n].q;
    }

    SweepResult res;
    const SolveOptions& o = s.options;
    res.voltages[root.id] = o.voltage_ref;
    for (int n : order) {
        if (n == root_node) continue;
        const int bi = parent_arc[n];
        const Branch& b = s.branches[static_cast<std::size_t>(bi)];
        // flow is stored signed in the branch's from->to orientation
        const bool downstream = s.node_index.at(b.from) == parent[n];
        const PQ& load = subtree[n];
        res.flows[b.id] = PQ{downstream ? load.p : -load.p, downstream ? load.q : -load.q};
        const double parent_v = res.voltages.at(s.nodes[static_cast<std::size_t>(parent[n])].id);
        const double drop = (b.r_pu * load.p + b.x_pu * load.q) / o.voltage_ref;
        res.voltages[s.nodes[static_cast<std::size_t>(n)].id] = parent_v - drop;
    }

    auto flag = [&res](const std::string& kind, const std::string& entity, double margin) {
        res.feasible = false;
        res.violations.push_back(SweepViolation{kind, entity, margin});
    };
    for (int n : tree_nodes) {
        const Node& node = s.nodes[static_cast<std::size_t>(n)];
        const double v = res.voltages.at(node.id);
        if (v < o.voltage_min) flag("voltage", "node " + node.id, o.voltage_min - v);
        if (v > o.voltage_max) flag("voltage", "node " + node.id, v - o.voltage_max);
    }
    const PQ injection = subtree[root_node];
    if (injection.p > root.dg->p_max_mw) flag("dg_p", "node " + root.id, injection.p - root.dg->p_max_mw);
    if (injection.q > root.dg->q_max_mvar) flag("dg_q", "node " + root.id, injection.q - root.dg->q_max_mvar);
    for (int bi : tree_branches) {
        const Branch& b = s.branches[static_cast<std::size_t>(bi)];
        const PQ& f = res.flows.count(b.id) ? res.flows.at(b.id) : PQ{};
        if (std::abs(f.p) > b.s_max_mva) flag("thermal", "branch " + b.id, std::abs(f.p) - b.s_max_mva);
        if (std::abs(f.q) > b.s_max_mva) flag("thermal", "branch " + b.id, std::abs(f.q) - b.s_max_mva);
    }
    return res;
}

} // namespace gridheal
