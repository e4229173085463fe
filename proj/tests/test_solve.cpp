#include "catch_amalgamated.hpp"

#include <cmath>

#include "gridheal/backend.hpp"
#include "gridheal/compare.hpp"
#include "gridheal/extract.hpp"
#include "gridheal/mapdoc.hpp"
#include "gridheal/oracle.hpp"
#include "gridheal/runner.hpp"
#include "gridheal/verify.hpp"

#include "test_util.hpp"

using namespace gridheal;

TEST_CASE("T1 end to end matches the oracle", "[solve]") {
    const Scenario s = testutil::load_fixture("t1.json");
    const OperationalState state = apply_damage(s);
    auto backend = make_backend();

    SECTION("proposed") {
        const BuiltModel bm = build_proposed(state, s.dscs);
        const SolveResult res = backend->solve(bm.model, {});
        REQUIRE(res.status == SolveStatus::Optimal);
        const RestorationPlan plan = extract_plan(bm, res);
        CHECK(plan.restored_mw == 3.0);
        CHECK(plan.branch_state.at("b14") == 1);
        CHECK_THAT(res.objective, Catch::Matchers::WithinAbs(3.0 - plan.travel_penalty, 1e-7));

        const BruteForceResult oracle = brute_force(state, s.dscs, bm.candidates, bm.bigm);
        REQUIRE(oracle.feasible);
        CHECK(plan.restored_mw == oracle.plan.restored_mw);
        CHECK_THAT(plan.travel_penalty,
                   Catch::Matchers::WithinAbs(oracle.plan.travel_penalty, 1e-9));

        CHECK(verify_plan(s, plan).pass());
    }
    SECTION("nodsc") {
        const StrategyOutcome out = run_strategy(s, "nodsc", *backend);
        REQUIRE(out.plan);
        CHECK(out.plan->restored_mw == 1.0);
        CHECK(verify_plan(s, *out.plan).pass());
    }
    SECTION("maxcomm coincides with proposed on a single cluster") {
        const StrategyOutcome out = run_strategy(s, "maxcomm", *backend);
        REQUIRE(out.plan);
        CHECK(out.plan->restored_mw == 3.0);
        CHECK(verify_plan(s, *out.plan).pass());
    }
}

TEST_CASE("T2 exposes the maxcomm gap", "[solve]") {
    const Scenario s = testutil::load_fixture("t2.json");
    auto backend = make_backend();

    const StrategyOutcome proposed = run_strategy(s, "proposed", *backend);
    const StrategyOutcome maxcomm = run_strategy(s, "maxcomm", *backend);
    const StrategyOutcome nodsc = run_strategy(s, "nodsc", *backend);
    REQUIRE(proposed.plan);
    REQUIRE(maxcomm.plan);
    REQUIRE(nodsc.plan);
    CHECK(proposed.plan->restored_mw == 2.5);
    CHECK(maxcomm.plan->restored_mw == 0.5);
    CHECK(nodsc.plan->restored_mw == 0.5);

    const OperationalState state = apply_damage(s);
    const BuiltModel bm = build_proposed(state, s.dscs);
    const BruteForceResult omax = brute_force_maxcomm(state, s.dscs, bm.candidates, bm.bigm);
    REQUIRE(omax.feasible);
    CHECK(maxcomm.plan->restored_mw == omax.plan.restored_mw);
    CHECK_THAT(maxcomm.plan->travel_penalty,
               Catch::Matchers::WithinAbs(omax.plan.travel_penalty, 1e-9));
}

TEST_CASE("extraction re-verifies rounded solutions", "[solve]") {
    const Scenario s = testutil::load_fixture("t1.json");
    const OperationalState state = apply_damage(s);
    const BuiltModel bm = build_proposed(state, s.dscs);
    auto backend = make_backend();
    SolveResult res = backend->solve(bm.model, {});
    REQUIRE(res.status == SolveStatus::Optimal);

    SECTION("flipping a frozen branch state breaks a tagged family") {
        SolveResult tampered = res;
        const int alpha = bm.model.var("alpha:b34");
        tampered.values[static_cast<std::size_t>(alpha)] =
            1.0 - tampered.values[static_cast<std::size_t>(alpha)];
        try {
            extract_plan(bm, tampered);
            FAIL("expected ExtractionError");
        } catch (const ExtractionError& e) {
            CHECK_FALSE(e.constraint_tag.empty());
        }
    }
    SECTION("lambda outside the chosen coverage is an eq8 violation") {
        SolveResult tampered = res;
        // force the drone onto the origin candidate, which cannot see b14@4
        for (const Variable& v : bm.model.variables) {
            if (v.name.rfind("z:d1:", 0) == 0)
                tampered.values[static_cast<std::size_t>(bm.model.var(v.name))] = 0.0;
        }
        const DscCandidates& dc = bm.candidates[0];
        int origin = -1;
        for (int c = 0; c < static_cast<int>(dc.positions.size()); ++c)
            if (dc.positions[static_cast<std::size_t>(c)] == Point{0.0, 0.0}) origin = c;
        REQUIRE(origin >= 0);
        tampered.values[static_cast<std::size_t>(bm.model.var("z:d1:" + std::string(origin < 10 ? "00" : "0") + std::to_string(origin)))] = 1.0;
        try {
            extract_plan(bm, tampered);
            FAIL("expected ExtractionError");
        } catch (const ExtractionError& e) {
            CHECK(e.constraint_tag == "eq8");
        }
    }
}

TEST_CASE("verifier catches tampered plans", "[solve]") {
    const Scenario s = testutil::load_fixture("t1.json");
    auto backend = make_backend();
    const StrategyOutcome out = run_strategy(s, "nodsc", *backend);
    REQUIRE(out.plan);
    REQUIRE(verify_plan(s, *out.plan).pass());

    SECTION("state change on an inoperable branch") {
        RestorationPlan bad = *out.plan;
        bad.branch_state["b14"] = 1; // mu is zero without DSC coverage
        const VerificationReport report = verify_plan(s, bad);
        CHECK_FALSE(report.pass());
        CHECK_FALSE(report.families.at("switchability").passed);
    }
    SECTION("drone displaced away from its assignment") {
        const StrategyOutcome prop = run_strategy(s, "proposed", *backend);
        REQUIRE(prop.plan);
        RestorationPlan bad = *prop.plan;
        REQUIRE_FALSE(bad.dsc_placements.empty());
        bad.dsc_placements[0].position.x += 2.0 * s.dscs[0].radius_m;
        const VerificationReport report = verify_plan(s, bad);
        CHECK_FALSE(report.pass());
        CHECK_FALSE(report.families.at("coverage").passed);
    }
    SECTION("claimed restored load must match the pickups") {
        RestorationPlan bad = *out.plan;
        bad.restored_mw += 0.5;
        CHECK_FALSE(verify_plan(s, bad).families.at("pickup").passed);
    }
}

TEST_CASE("map document mirrors the plan", "[solve]") {
    const Scenario s = testutil::load_fixture("t1.json");
    auto backend = make_backend();
    const StrategyOutcome prop = run_strategy(s, "proposed", *backend);
    REQUIRE(prop.plan);
    const nlohmann::json doc = emit_map(s, *prop.plan);
    CHECK(doc.at("type") == "FeatureCollection");
    int nodes = 0;
    int branches = 0;
    int dscs = 0;
    int circles = 0;
    for (const auto& f : doc.at("features")) {
        const std::string kind = f.at("properties").at("kind");
        if (kind == "node") ++nodes;
        else if (kind == "branch") ++branches;
        else if (kind == "dsc") ++dscs;
        else if (kind == "dsc-coverage") ++circles;
    }
    CHECK(nodes == 4);
    CHECK(branches == 4);
    CHECK(dscs == 1);
    CHECK(circles == 1);
    // 64-gon ring closes on itself
    for (const auto& f : doc.at("features")) {
        if (f.at("properties").at("kind") == "dsc-coverage")
            CHECK(f.at("geometry").at("coordinates").at(0).size() == 65);
    }

    SECTION("no drones, no drone features") {
        const StrategyOutcome nodsc = run_strategy(s, "nodsc", *backend);
        REQUIRE(nodsc.plan);
        const nlohmann::json plain = emit_map(s, *nodsc.plan);
        for (const auto& f : plain.at("features"))
            CHECK(f.at("properties").at("kind") != "dsc");
    }
    SECTION("unverified plans are refused") {
        RestorationPlan bad = *prop.plan;
        bad.branch_state["b34"] = 0;
        CHECK_THROWS_AS(emit_map(s, bad), Error);
    }
}

TEST_CASE("comparison table on T1", "[solve]") {
    const Scenario s = testutil::load_fixture("t1.json");
    auto backend = make_backend();
    const ComparisonTable table = run_compare(s, *backend);
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[0].name == "nodsc");
    CHECK(table.rows[0].restored_mw == 1.0);
    CHECK(table.rows[1].name == "proposed");
    CHECK(table.rows[1].restored_mw == 3.0);
    CHECK(table.rows[2].name == "maxcomm");
    CHECK(table.rows[2].restored_mw == 3.0);
    CHECK(table.rows[1].restored_mw >= table.rows[0].restored_mw);
    CHECK(table.rows[1].restored_mw >= table.rows[2].restored_mw);
    CHECK(table.rows[0].branches_closed_by_reconfig.empty());
    CHECK(table.rows[1].branches_closed_by_reconfig ==
          std::vector<std::string>{"b14"});
    CHECK(table.rows[1].mg_count == 1);
    CHECK(table.rows[0].mg_count == 1);

    // text and JSON carry identical values
    const std::string text = table.to_text();
    CHECK(text.find(fmt_double(table.rows[1].restored_mw)) != std::string::npos);
    CHECK(text.find("b14") != std::string::npos);
    const nlohmann::json j = table.to_json();
    CHECK(j.at("rows").at(1).at("restored_mw").get<double>() == table.rows[1].restored_mw);

    // rerunning produces the same decisions
    const ComparisonTable again = run_compare(s, *backend);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(again.rows[i].restored_mw == table.rows[i].restored_mw);
        CHECK(again.rows[i].switches_restored == table.rows[i].switches_restored);
        CHECK(again.rows[i].branches_closed_by_reconfig ==
              table.rows[i].branches_closed_by_reconfig);
        CHECK(again.rows[i].mg_count == table.rows[i].mg_count);
    }
}

TEST_CASE("undamaged scenario: all strategies coincide", "[solve]") {
    Scenario s = testutil::load_fixture("t1.json");
    s.damage = DamageScenario{};
    s.finalize();
    auto backend = make_backend();
    const ComparisonTable table = run_compare(s, *backend);
    REQUIRE(table.rows.size() == 3);
    for (const StrategyRow& row : table.rows) {
        CHECK(row.feasible);
        CHECK(row.restored_mw == 3.0);
    }
}
