#include "catch_amalgamated.hpp"

#include <random>

#include "gridheal/gen.hpp"
#include "gridheal/powerflow.hpp"

#include "test_util.hpp"

using namespace gridheal;

namespace {

Scenario chain_scenario(int n, double r_pu, double x_pu, double p_max) {
    Scenario s;
    for (int i = 0; i < n; ++i) {
        Node node;
        node.id = std::to_string(i + 1);
        node.position = Point{100.0 * i, 0.0};
        node.load_p_mw = i == 0 ? 0.0 : 1.0;
        node.load_q_mvar = 0.0;
        if (i == 0) node.dg = DgRecord{p_max, p_max};
        s.nodes.push_back(std::move(node));
    }
    for (int i = 0; i + 1 < n; ++i) {
        Branch b;
        b.id = "b" + std::to_string(i + 1);
        b.from = std::to_string(i + 1);
        b.to = std::to_string(i + 2);
        b.initial_closed = true;
        b.switchable = true;
        b.r_pu = r_pu;
        b.x_pu = x_pu;
        b.s_max_mva = 10.0;
        s.branches.push_back(std::move(b));
    }
    s.finalize();
    return s;
}

} // namespace

TEST_CASE("two-node sweep drops one percent", "[powerflow]") {
    const Scenario s = chain_scenario(2, 0.01, 0.0, 5.0);
    const SweepResult res = forward_sweep(s, {0}, 0, {1});
    CHECK_THAT(res.voltages.at("2"), Catch::Matchers::WithinAbs(0.99, 1e-12));
    CHECK_THAT(res.flows.at("b1").p, Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK(res.feasible);
}

TEST_CASE("empty pickup set leaves the tree at reference voltage", "[powerflow]") {
    const Scenario s = chain_scenario(4, 0.01, 0.005, 5.0);
    const SweepResult res = forward_sweep(s, {0, 1, 2}, 0, {});
    for (const auto& [id, v] : res.voltages) CHECK(v == 1.0);
    for (const auto& [id, f] : res.flows) {
        CHECK(f.p == 0.0);
        CHECK(f.q == 0.0);
    }
    CHECK(res.feasible);
}

TEST_CASE("overload is reported as dg_p violation", "[powerflow]") {
    const Scenario s = chain_scenario(3, 0.001, 0.0, 1.5);
    const SweepResult res = forward_sweep(s, {0, 1}, 0, {1, 2});
    REQUIRE_FALSE(res.feasible);
    bool found = false;
    for (const auto& v : res.violations) found = found || v.kind == "dg_p";
    CHECK(found);
}

TEST_CASE("deep feeder can violate the voltage floor", "[powerflow]") {
    const Scenario s = chain_scenario(6, 0.03, 0.0, 10.0);
    const SweepResult res = forward_sweep(s, {0, 1, 2, 3, 4}, 0, {1, 2, 3, 4, 5});
    REQUIRE_FALSE(res.feasible);
    CHECK(res.violations.front().kind == "voltage");
}

TEST_CASE("sweep rejects malformed topologies", "[powerflow]") {
    Scenario s = chain_scenario(3, 0.01, 0.0, 5.0);
    SECTION("root is not a DG") {
        CHECK_THROWS_WITH(forward_sweep(s, {0, 1}, 1, {}),
                          Catch::Matchers::ContainsSubstring("not a DG"));
    }
    SECTION("cycle") {
        Branch loop;
        loop.id = "loop";
        loop.from = "1";
        loop.to = "3";
        loop.initial_closed = true;
        loop.switchable = true;
        loop.r_pu = 0.01;
        loop.x_pu = 0.0;
        loop.s_max_mva = 10.0;
        s.branches.push_back(loop);
        s.finalize();
        CHECK_THROWS_WITH(forward_sweep(s, {0, 1, 2}, 0, {}),
                          Catch::Matchers::ContainsSubstring("not a tree"));
    }
    SECTION("second DG in the tree") {
        s.nodes[2].dg = DgRecord{1.0, 1.0};
        s.finalize();
        CHECK_THROWS_WITH(forward_sweep(s, {0, 1}, 0, {}),
                          Catch::Matchers::ContainsSubstring("second DG"));
    }
}

TEST_CASE("flow conservation holds exactly on random trees", "[powerflow]") {
    for (std::uint64_t seed = 100; seed < 120; ++seed) {
        Scenario s = make_tiny_scenario(seed);
        // strip damage and ties: sweep the pre-disaster spanning tree
        s.damage = DamageScenario{};
        std::vector<int> tree;
        int dg_node = -1;
        for (std::size_t i = 0; i < s.nodes.size(); ++i)
            if (s.nodes[i].dg) dg_node = static_cast<int>(i);
        for (std::size_t i = 0; i < s.branches.size(); ++i)
            if (s.branches[i].initial_closed) tree.push_back(static_cast<int>(i));

        std::set<int> pickups;
        std::mt19937_64 rng(seed);
        for (std::size_t i = 0; i < s.nodes.size(); ++i)
            if (s.nodes[i].load_p_mw > 0.0 && rng() % 2) pickups.insert(static_cast<int>(i));

        const SweepResult res = forward_sweep(s, tree, dg_node, pickups);
        // node balance: inflow - outflow == picked load (generation at root)
        for (std::size_t i = 0; i < s.nodes.size(); ++i) {
            if (static_cast<int>(i) == dg_node) continue;
            double in_p = 0.0;
            for (const Branch& b : s.branches) {
                if (!res.flows.count(b.id)) continue;
                if (s.node_index.at(b.to) == static_cast<int>(i)) in_p += res.flows.at(b.id).p;
                if (s.node_index.at(b.from) == static_cast<int>(i)) in_p -= res.flows.at(b.id).p;
            }
            const double load = pickups.count(static_cast<int>(i))
                                    ? s.nodes[i].load_p_mw
                                    : 0.0;
            CHECK_THAT(in_p, Catch::Matchers::WithinAbs(load, 1e-12));
        }
    }
}
