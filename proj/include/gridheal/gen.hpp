#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gridheal/scenario.hpp"

namespace gridheal {

namespace gen_detail {

// std::uniform_int_distribution is implementation-defined; these helpers
// keep generated instances identical across standard libraries
struct Rng {
    std::mt19937_64 engine;

    explicit Rng(std::uint64_t seed) : engine(seed) {}

    int pick(int lo, int hi) { // inclusive
        return lo + static_cast<int>(engine() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    double real(double lo, double hi) {
        const double u = static_cast<double>(engine() >> 11) * 0x1p-53;
        return lo + (hi - lo) * u;
    }

    bool chance(int percent) { return pick(0, 99) < percent; }
};

} // namespace gen_detail

/// Deterministic random tiny instance: a spanning tree plus up to two tie
/// branches, one DG, grid-snapped coordinates and quarter-MW loads (subset
/// sums of quarter multiples stay exactly representable, and distinct sums
/// differ by at least the smallest load, which keeps the travel tie-break
/// strictly subordinate to load recovery).
inline Scenario make_tiny_scenario(std::uint64_t seed) {
    gen_detail::Rng rng(seed);
    Scenario s;

    const int n = rng.pick(3, 6);
    std::set<std::pair<int, int>> used_cells;
    for (int i = 0; i < n; ++i) {
        Node node;
        node.id = "n" + std::to_string(i + 1);
        for (int tries = 0; tries < 64; ++tries) {
            const int cx = rng.pick(0, 10);
            const int cy = rng.pick(0, 10);
            if (used_cells.insert({cx, cy}).second) {
                node.position = Point{100.0 * cx, 100.0 * cy};
                break;
            }
        }
        s.nodes.push_back(std::move(node));
    }

    std::set<std::pair<int, int>> pairs;
    auto add_branch = [&](int u, int v, bool closed) {
        Branch b;
        b.id = "b" + std::to_string(u + 1) + "-" + std::to_string(v + 1);
        b.from = "n" + std::to_string(u + 1);
        b.to = "n" + std::to_string(v + 1);
        b.initial_closed = closed;
        b.switchable = rng.chance(85);
        b.r_pu = rng.real(0.002, 0.02);
        b.x_pu = rng.real(0.001, 0.01);
        b.s_max_mva = rng.chance(70) ? rng.real(3.0, 8.0) : rng.real(0.6, 1.5);
        pairs.insert({std::min(u, v), std::max(u, v)});
        s.branches.push_back(std::move(b));
    };

    for (int i = 1; i < n; ++i) add_branch(rng.pick(0, i - 1), i, true);
    const int extras = rng.pick(0, 2);
    for (int t = 0; t < extras; ++t) {
        for (int tries = 0; tries < 16; ++tries) {
            const int u = rng.pick(0, n - 1);
            const int v = rng.pick(0, n - 1);
            if (u == v || pairs.count({std::min(u, v), std::max(u, v)})) continue;
            add_branch(std::min(u, v), std::max(u, v), false); // tie, normally open
            break;
        }
    }

    const int dg_node = rng.pick(0, n - 1);
    double total_load = 0.0;
    int min_multiplier = 99;
    for (int i = 0; i < n; ++i) {
        if (i == dg_node) continue;
        const int k = rng.pick(0, 5);
        s.nodes[static_cast<std::size_t>(i)].load_p_mw = 0.25 * k;
        s.nodes[static_cast<std::size_t>(i)].load_q_mvar = 0.1 * k;
        total_load += 0.25 * k;
        if (k > 0) min_multiplier = std::min(min_multiplier, k);
    }
    if (min_multiplier > 1) {
        // pin one unit load so distinct pickup sums stay separated by at
        // least the smallest load
        for (int i = 0; i < n; ++i) {
            if (i == dg_node) continue;
            total_load += 0.25 - s.nodes[static_cast<std::size_t>(i)].load_p_mw;
            s.nodes[static_cast<std::size_t>(i)].load_p_mw = 0.25;
            s.nodes[static_cast<std::size_t>(i)].load_q_mvar = 0.1;
            break;
        }
    }
    DgRecord dg;
    dg.p_max_mw = std::max(0.5, total_load * rng.real(0.5, 1.4));
    dg.q_max_mvar = dg.p_max_mw;
    s.nodes[static_cast<std::size_t>(dg_node)].dg = dg;

    // faults
    const int faults = rng.pick(0, 2);
    for (int t = 0; t < faults; ++t) {
        const int bi = rng.pick(0, static_cast<int>(s.branches.size()) - 1);
        s.damage.faulted_branches.insert(s.branches[static_cast<std::size_t>(bi)].id);
    }

    if (rng.chance(30)) s.options.voltage_min = 0.95;

    s.finalize(); // derive switches before sampling comm failures

    if (!s.switches.empty() && rng.chance(60)) {
        const int m = rng.pick(1, std::min<int>(4, static_cast<int>(s.switches.size())));
        for (int t = 0; t < m; ++t) {
            const int si = rng.pick(0, static_cast<int>(s.switches.size()) - 1);
            s.damage.comm_failed_switches.insert(s.switches[static_cast<std::size_t>(si)].addr());
        }
    }

    const int n_dsc = rng.pick(0, 9) < 2 ? 0 : (rng.pick(0, 9) < 6 ? 1 : 2);
    const Point base{100.0 * rng.pick(0, 10), 100.0 * rng.pick(0, 10)};
    for (int k = 0; k < n_dsc; ++k) {
        Dsc d;
        d.id = "d" + std::to_string(k + 1);
        d.radius_m = rng.real(150.0, 400.0);
        d.capacity = rng.pick(1, 3);
        d.initial_position = base; // pre-positioned together
        s.dscs.push_back(std::move(d));
    }

    s.finalize();
    return s;
}

} // namespace gridheal
