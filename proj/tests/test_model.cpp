#include "catch_amalgamated.hpp"

#include <set>

#include "gridheal/build.hpp"
#include "gridheal/milp.hpp"

#include "test_util.hpp"

using namespace gridheal;

namespace {

/// Feasibility of a partial assignment against all rows of one tag that
/// touch a given variable; untouched variables default to the values given.
bool rows_feasible(const MilpModel& m, const std::string& tag, int pivot_var,
                   const std::map<std::string, double>& assignment) {
    std::vector<double> x(m.variables.size(), 0.0);
    for (const auto& [name, v] : assignment) x[static_cast<std::size_t>(m.var(name))] = v;
    for (const LinCon& c : m.linear_constraints) {
        if (c.tag != tag) continue;
        bool touches = false;
        for (const LinTerm& t : c.terms) touches = touches || t.var == pivot_var;
        if (!touches) continue;
        if (m.residual(c, x) > 1e-12) return false;
    }
    return true;
}

Scenario comm_pair_scenario(int n_dsc) {
    Scenario s;
    s.nodes.push_back({"1", {0, 0}, 0.0, 0.0, DgRecord{2.0, 2.0}});
    s.nodes.push_back({"2", {50, 0}, 1.0, 0.2, {}});
    Branch b;
    b.id = "b";
    b.from = "1";
    b.to = "2";
    b.initial_closed = false;
    b.switchable = true;
    b.r_pu = 0.01;
    b.x_pu = 0.005;
    b.s_max_mva = 5.0;
    s.branches.push_back(b);
    s.damage.comm_failed_switches = {"b@1", "b@2"};
    for (int k = 0; k < n_dsc; ++k)
        s.dscs.push_back(Dsc{"d" + std::to_string(k + 1), 60.0, 2, {0.0, 0.0}});
    s.finalize();
    return s;
}

} // namespace

TEST_CASE("T1 model shape", "[model]") {
    const Scenario s = testutil::load_fixture("t1.json");
    const BuiltModel bm = build_proposed(apply_damage(s), s.dscs);
    const MilpModel& m = bm.model;

    auto count_prefix = [&](const std::string& prefix) {
        int n = 0;
        for (const Variable& v : m.variables)
            if (v.name.rfind(prefix, 0) == 0) ++n;
        return n;
    };
    CHECK(count_prefix("delta:") == 4);
    CHECK(count_prefix("e:") == 4);
    CHECK(count_prefix("alpha:") == 3); // faulted b23 gets no closing decision
    CHECK_FALSE(m.has("alpha:b23"));
    CHECK(count_prefix("lambda:") == 2);
    CHECK(count_prefix("gamma:") == 8);
    CHECK(count_prefix("z:") == 3); // coverage-equivalent candidates collapsed

    CHECK(m.symbol_index.count("α(1,4)"));
    CHECK(m.symbol_index.count("λ(1,4)@k=d1"));
    CHECK(m.symbol_index.count("λ(4,1)@k=d1"));
    CHECK(m.symbol_index.count("δ(3)"));

    const auto counts = bm.model.constraint_counts();
    CHECK(counts.at("eq5") == 6);
    CHECK(counts.at("eq3") == 1);
    CHECK(counts.at("eq1") == 1);
    CHECK(counts.at("eq8") == 2);
    CHECK(counts.at("eq9") == 4);
    CHECK(counts.at("eq10") == 6);
    CHECK(counts.at("eq11") == 9);
    CHECK(counts.at("pickup") == 4);
    CHECK(counts.at("dg") == 2);
    CHECK(counts.count("radiality"));
    CHECK(counts.count("flow"));
    CHECK(counts.count("voltage"));
}

TEST_CASE("eq11 linearization reproduces the binary product", "[model]") {
    const Scenario s = comm_pair_scenario(1);
    const BuiltModel bm = build_proposed(apply_damage(s), s.dscs);
    const MilpModel& m = bm.model;
    const int mu = m.var("mu:b");
    for (int g1 = 0; g1 <= 1; ++g1) {
        for (int g2 = 0; g2 <= 1; ++g2) {
            for (int muv = 0; muv <= 1; ++muv) {
                const bool feasible = rows_feasible(
                    m, "eq11", mu,
                    {{"gamma:b@1", double(g1)}, {"gamma:b@2", double(g2)}, {"mu:b", double(muv)}});
                CHECK(feasible == (muv == g1 * g2));
            }
        }
    }
}

TEST_CASE("eq10 frees alpha only when mu is one", "[model]") {
    for (bool initially_closed : {false, true}) {
        Scenario s = comm_pair_scenario(1);
        s.branches[0].initial_closed = initially_closed;
        s.finalize();
        const BuiltModel bm = build_proposed(apply_damage(s), s.dscs);
        const MilpModel& m = bm.model;
        const int alpha = m.var("alpha:b");
        const int L = initially_closed ? 1 : 0;
        for (int muv = 0; muv <= 1; ++muv) {
            for (int a = 0; a <= 1; ++a) {
                const bool feasible = rows_feasible(
                    m, "eq10", alpha, {{"mu:b", double(muv)}, {"alpha:b", double(a)}});
                const bool expected = muv == 1 || a == L;
                INFO("L=" << L << " mu=" << muv << " alpha=" << a);
                CHECK(feasible == expected);
            }
        }
    }
}

TEST_CASE("eq9 squeeze forces gamma to min(1, sum lambda)", "[model]") {
    const Scenario s = comm_pair_scenario(2);
    const BuiltModel bm = build_proposed(apply_damage(s), s.dscs);
    const MilpModel& m = bm.model;
    const int gamma = m.var("gamma:b@1");
    for (int l1 = 0; l1 <= 1; ++l1) {
        for (int l2 = 0; l2 <= 1; ++l2) {
            for (int g = 0; g <= 1; ++g) {
                const bool feasible =
                    rows_feasible(m, "eq9", gamma,
                                  {{"lambda:b@1:d1", double(l1)},
                                   {"lambda:b@1:d2", double(l2)},
                                   {"gamma:b@1", double(g)}});
                const int expected = l1 + l2 > 0 ? 1 : 0;
                CHECK(feasible == (g == expected));
            }
        }
    }
}

TEST_CASE("nodsc squeezes comm-failed switches to zero", "[model]") {
    const Scenario s = testutil::load_fixture("t1.json");
    const BuiltModel bm = build_nodsc(apply_damage(s));
    const MilpModel& m = bm.model;
    CHECK_FALSE(m.has("lambda:b14@1:d1"));
    // with no lambda terms the eq9 upper bound reads gamma <= 0
    const int gamma = m.var("gamma:b14@1");
    CHECK(rows_feasible(m, "eq9", gamma, {{"gamma:b14@1", 0.0}}));
    CHECK_FALSE(rows_feasible(m, "eq9", gamma, {{"gamma:b14@1", 1.0}}));
}

TEST_CASE("model dump is deterministic and well formed", "[model]") {
    const Scenario s = testutil::load_fixture("t1.json");
    const BuiltModel a = build_proposed(apply_damage(s), s.dscs);
    const BuiltModel b = build_proposed(apply_damage(s), s.dscs);
    const std::string dump = a.model.dump();
    CHECK(dump == b.model.dump());
    CHECK(dump.rfind("VAR ", 0) == 0);
    CHECK(dump.find("CON eq10 ") != std::string::npos);
    CHECK(dump.find("OBJ maximize") != std::string::npos);
    CHECK(dump.find("VAR alpha:b14 binary 0 1") != std::string::npos);
}

TEST_CASE("continuous mode emits cones instead of candidates", "[model]") {
    Scenario s = testutil::load_fixture("t1.json");
    s.options.position_mode = PositionMode::Continuous;
    const BuiltModel bm = build_proposed(apply_damage(s), s.dscs);
    const MilpModel& m = bm.model;
    CHECK(m.has("xbar:d1"));
    CHECK(m.has("ybar:d1"));
    CHECK(m.has("dist:b14@1:d1"));
    CHECK(m.has("tsq:d1"));
    bool has_z = false;
    for (const Variable& v : m.variables) has_z = has_z || v.name.rfind("z:", 0) == 0;
    CHECK_FALSE(has_z);
    // one distance cone per (failed switch, dsc) plus one travel epigraph
    CHECK(m.soc_constraints.size() == 3);
    CHECK(m.constraint_counts().at("eq8") == 4); // two indicator rows per pair
    CHECK(m.dump().find("SOC ") != std::string::npos);
}

TEST_CASE("maxcomm stage 1 carries only comm machinery", "[model]") {
    const Scenario s = testutil::load_fixture("t2.json");
    const BuiltModel bm = build_maxcomm_stage1(apply_damage(s), s.dscs);
    CHECK_FALSE(bm.model.has("alpha:b12"));
    CHECK_FALSE(bm.model.has("delta:2"));
    CHECK(bm.model.has("lambda:t13@1:d1"));
    int lambda_terms = 0;
    for (const LinTerm& t : bm.model.objective.terms)
        if (bm.model.variables[static_cast<std::size_t>(t.var)].name.rfind("lambda:", 0) == 0)
            ++lambda_terms;
    CHECK(lambda_terms == 5);
}
