#include "catch_amalgamated.hpp"

#include "gridheal/backend.hpp"
#include "gridheal/milp.hpp"

using namespace gridheal;

TEST_CASE("trivial maximization", "[backend]") {
    MilpModel m;
    const int d = m.add_binary("delta", "δ");
    m.objective.terms.push_back({d, 1.0});
    auto backend = make_backend("highs");
    const SolveResult res = backend->solve(m, {});
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK_THAT(res.objective, Catch::Matchers::WithinAbs(1.0, 1e-9));
    CHECK_THAT(res.value(m, "delta"), Catch::Matchers::WithinAbs(1.0, 1e-9));
}

TEST_CASE("contradictory bounds are infeasible", "[backend]") {
    MilpModel m;
    const int x = m.add_variable("x", VarKind::Continuous, 0.0, 10.0, "x");
    m.add_constraint({{x, 1.0}}, Sense::GE, 1.0, "pair");
    m.add_constraint({{x, 1.0}}, Sense::LE, 0.0, "pair");
    m.objective.terms.push_back({x, 1.0});
    auto backend = make_backend("highs");
    CHECK(backend->solve(m, {}).status == SolveStatus::Infeasible);
}

TEST_CASE("mixed model with equalities", "[backend]") {
    // max x + 2y  s.t. x + y = 1.5, y binary -> y=1, x=0.5
    MilpModel m;
    const int x = m.add_variable("x", VarKind::Continuous, 0.0, 2.0, "x");
    const int y = m.add_binary("y", "y");
    m.add_constraint({{x, 1.0}, {y, 1.0}}, Sense::EQ, 1.5, "mix");
    m.objective.terms.push_back({x, 1.0});
    m.objective.terms.push_back({y, 2.0});
    auto backend = make_backend("highs");
    const SolveResult res = backend->solve(m, {});
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK_THAT(res.objective, Catch::Matchers::WithinAbs(2.5, 1e-9));
    CHECK_THAT(res.value(m, "y"), Catch::Matchers::WithinAbs(1.0, 1e-9));
}

TEST_CASE("repeat solves are reproducible", "[backend]") {
    MilpModel m;
    std::vector<int> xs;
    for (int i = 0; i < 6; ++i) xs.push_back(m.add_binary("x" + std::to_string(i), ""));
    std::vector<LinTerm> knap;
    for (int i = 0; i < 6; ++i) {
        knap.push_back({xs[static_cast<std::size_t>(i)], double(i % 3 + 1)});
        m.objective.terms.push_back({xs[static_cast<std::size_t>(i)], double(5 - i)});
    }
    m.add_constraint(std::move(knap), Sense::LE, 4.0, "knap");

    auto backend = make_backend("highs");
    const SolveResult a = backend->solve(m, {});
    const SolveResult b = backend->solve(m, {});
    auto backend2 = make_backend(); // fresh worker via env default
    const SolveResult c = backend2->solve(m, {});
    REQUIRE(a.status == SolveStatus::Optimal);
    CHECK(a.objective == b.objective);
    CHECK(a.values == b.values);
    CHECK(a.objective == c.objective);
    CHECK(a.values == c.values);
}

TEST_CASE("cones are rejected by the bundled backend", "[backend]") {
    MilpModel m;
    const int x = m.add_variable("x", VarKind::Continuous, -1.0, 1.0, "x");
    const int t = m.add_variable("t", VarKind::Continuous, 0.0, 2.0, "t");
    SocCon cone;
    cone.norm.push_back(AffineExpr{{{x, 1.0}}, 0.0});
    cone.rhs = AffineExpr{{{t, 1.0}}, 0.0};
    cone.tag = "eq1";
    m.soc_constraints.push_back(cone);
    m.objective.terms.push_back({t, -1.0});
    auto backend = make_backend("highs");
    CHECK_FALSE(backend->supports_soc());
    CHECK_THROWS_AS(backend->solve(m, {}), BackendError);
}

TEST_CASE("unknown backend name is rejected", "[backend]") {
    CHECK_THROWS_AS(make_backend("cplex"), BackendError);
}
