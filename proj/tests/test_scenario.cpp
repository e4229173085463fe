#include "catch_amalgamated.hpp"

#include "gridheal/gen.hpp"
#include "gridheal/scenario.hpp"
#include "gridheal/scenario_json.hpp"

#include "test_util.hpp"

using namespace gridheal;

namespace {

const char* kMinimalDoc = R"({
  "nodes": [
    {"id": "a", "x_m": 0, "y_m": 0, "p_mw": 0, "dg": {"p_max_mw": 2.0}},
    {"id": "b", "x_m": 10, "y_m": 0, "p_mw": 1.0}
  ],
  "branches": [
    {"id": "ab", "from": "a", "to": "b", "closed": true, "switchable": true,
     "r_pu": 0.01, "x_pu": 0.01, "s_max_mva": 5.0}
  ]
})";

} // namespace

TEST_CASE("parse minimal document", "[scenario]") {
    const Scenario s = parse_scenario(kMinimalDoc);
    CHECK(s.nodes.size() == 2);
    CHECK(s.branches.size() == 1);
    CHECK(s.switches.size() == 2);
    CHECK(s.nodes[0].dg.has_value());
    CHECK(s.nodes[0].dg->q_max_mvar == 2.0); // defaults to p_max
    CHECK(s.nodes[1].load_q_mvar == 0.0);    // defaults to zero
    CHECK(validate(s).empty());
}

TEST_CASE("parse rejects dangling references and duplicates", "[scenario]") {
    SECTION("branch to unknown node") {
        const std::string doc = R"({
          "nodes": [{"id": "a", "x_m": 0, "y_m": 0, "p_mw": 0}],
          "branches": [{"id": "x", "from": "a", "to": "99", "closed": true,
                        "switchable": true, "r_pu": 0, "x_pu": 0, "s_max_mva": 1}]
        })";
        CHECK_THROWS_WITH(parse_scenario(doc), Catch::Matchers::ContainsSubstring("99"));
    }
    SECTION("duplicate node id") {
        const std::string doc = R"({
          "nodes": [{"id": "a", "x_m": 0, "y_m": 0, "p_mw": 0},
                    {"id": "a", "x_m": 1, "y_m": 0, "p_mw": 0}],
          "branches": []
        })";
        CHECK_THROWS_AS(parse_scenario(doc), ParseError);
    }
    SECTION("missing key names the path") {
        const std::string doc = R"({"nodes": [{"id": "a", "y_m": 0, "p_mw": 0}], "branches": []})";
        CHECK_THROWS_WITH(parse_scenario(doc), Catch::Matchers::ContainsSubstring("x_m"));
    }
    SECTION("comm_failed referencing unknown switch") {
        std::string doc = kMinimalDoc;
        doc.insert(doc.rfind('}'), R"(, "damage": {"comm_failed": ["zz@a"]})");
        CHECK_THROWS_AS(parse_scenario(doc), ParseError);
    }
}

TEST_CASE("T1 fixture shape", "[scenario]") {
    const Scenario s = testutil::load_fixture("t1.json");
    CHECK(s.nodes.size() == 4);
    CHECK(s.branches.size() == 4);
    CHECK(s.switches.size() == 8);
    CHECK(s.dscs.size() == 1);
    CHECK(validate(s).empty());
}

TEST_CASE("validation catches invariant violations", "[scenario]") {
    Scenario s = parse_scenario(kMinimalDoc);

    SECTION("missing end switch") {
        s.switches.pop_back();
        bool found = false;
        for (const auto& v : validate(s)) found = found || v.invariant.find("missing end switch") != std::string::npos;
        CHECK(found);
    }
    SECTION("dsc capacity below one") {
        s.dscs.push_back(Dsc{"d1", 50.0, 0, {0, 0}});
        bool found = false;
        for (const auto& v : validate(s)) found = found || v.invariant.find("capacity") != std::string::npos;
        CHECK(found);
    }
    SECTION("disconnected graph") {
        s.nodes.push_back({"island", {99, 99}, 0.0, 0.0, {}});
        s.finalize();
        bool found = false;
        for (const auto& v : validate(s)) found = found || v.invariant.find("connected") != std::string::npos;
        CHECK(found);
    }
    SECTION("bad voltage window") {
        s.options.voltage_min = 1.2;
        bool found = false;
        for (const auto& v : validate(s)) found = found || v.entity == "options";
        CHECK(found);
    }
}

TEST_CASE("apply_damage materializes the post-fault view", "[scenario]") {
    const Scenario s = testutil::load_fixture("t1.json");

    SECTION("fault forces the branch open and unclosable") {
        const OperationalState st = apply_damage(s);
        const int b23 = s.branch_index.at("b23");
        CHECK(st.branch_faulted[static_cast<std::size_t>(b23)]);
        CHECK_FALSE(st.branch_effective_closed[static_cast<std::size_t>(b23)]);
        REQUIRE(st.failed_switches.size() == 2);
        CHECK(s.switches[static_cast<std::size_t>(st.failed_switches[0])].addr() == "b14@1");
        CHECK(s.switches[static_cast<std::size_t>(st.failed_switches[1])].addr() == "b14@4");
    }
    SECTION("no damage is the identity") {
        Scenario clean = s;
        clean.damage = DamageScenario{};
        clean.finalize();
        const OperationalState st = apply_damage(clean);
        for (std::size_t i = 0; i < clean.branches.size(); ++i) {
            CHECK_FALSE(st.branch_faulted[i]);
            CHECK(st.branch_effective_closed[i] == clean.branches[i].initial_closed);
        }
        CHECK(st.failed_switches.empty());
    }
    SECTION("all branches faulted") {
        Scenario broken = s;
        for (const Branch& b : broken.branches) broken.damage.faulted_branches.insert(b.id);
        broken.finalize();
        const OperationalState st = apply_damage(broken);
        for (std::size_t i = 0; i < broken.branches.size(); ++i) {
            CHECK(st.branch_faulted[i]);
            CHECK_FALSE(st.branch_effective_closed[i]);
        }
    }
    SECTION("idempotent and non-mutating") {
        const std::string before = serialize_scenario(s);
        const OperationalState st1 = apply_damage(s);
        const OperationalState st2 = apply_damage(st1.scenario);
        CHECK(serialize_scenario(s) == before);
        CHECK(st1.branch_effective_closed == st2.branch_effective_closed);
        CHECK(st1.failed_switches == st2.failed_switches);
    }
}

TEST_CASE("round trip: parse, serialize, parse", "[scenario]") {
    SECTION("fixtures") {
        for (const char* name : {"t1.json", "t2.json"}) {
            const Scenario a = testutil::load_fixture(name);
            const Scenario b = parse_scenario(serialize_scenario(a));
            CHECK(scenario_equal(a, b));
        }
    }
    SECTION("generated instances") {
        for (std::uint64_t seed = 1; seed <= 25; ++seed) {
            const Scenario a = make_tiny_scenario(seed);
            const Scenario b = parse_scenario(serialize_scenario(a));
            CHECK(scenario_equal(a, b));
        }
    }
}

TEST_CASE("comm-failure regions mark contained switches", "[scenario]") {
    std::string doc = kMinimalDoc;
    doc.insert(doc.rfind('}'),
               R"(, "damage": {"comm_failed_regions": [{"cx_m": 0, "cy_m": 0, "radius_m": 5}]})");
    const Scenario s = parse_scenario(doc);
    CHECK(s.damage.comm_failed_switches == std::set<std::string>{"ab@a"});
}

TEST_CASE("generated tiny scenarios are valid", "[scenario]") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const Scenario s = make_tiny_scenario(seed);
        INFO("seed " << seed);
        CHECK(validate(s).empty());
        CHECK(s.nodes.size() <= 6);
        CHECK(s.branches.size() <= 8);
        CHECK(s.dscs.size() <= 2);
    }
}
