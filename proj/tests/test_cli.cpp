#include "catch_amalgamated.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "test_util.hpp"

namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
    const std::string cmd = std::string(GRIDHEAL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string capture(const std::string& args) {
    const fs::path tmp = fs::temp_directory_path() / "gridheal_cli_capture.txt";
    const std::string cmd =
        std::string(GRIDHEAL_CLI_PATH) + " " + args + " > " + tmp.string() + " 2>/dev/null";
    std::system(cmd.c_str());
    return testutil::read_file(tmp.string());
}

fs::path temp_file(const std::string& name, const std::string& content) {
    const fs::path path = fs::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path;
}

} // namespace

TEST_CASE("cli exit codes", "[cli]") {
    const std::string t1 = testutil::fixture_path("t1.json");

    SECTION("usage errors") {
        CHECK(run("") == 64);
        CHECK(run("frobnicate") == 64);
        CHECK(run("solve --scenario " + t1 + " --strategy foo") == 64);
        CHECK(run("solve") == 64); // missing --scenario
    }
    SECTION("invalid scenario data") {
        const fs::path bad = temp_file("gridheal_bad.json", "{\"nodes\": []}");
        CHECK(run("solve --scenario " + bad.string()) == 65);
    }
    SECTION("infeasible model") {
        // a frozen-closed branch in a DG-less island cannot satisfy radiality
        const char* doc = R"({
          "nodes": [
            {"id": "a", "x_m": 0, "y_m": 0, "p_mw": 0, "dg": {"p_max_mw": 1.0}},
            {"id": "b", "x_m": 100, "y_m": 0, "p_mw": 0.5},
            {"id": "c", "x_m": 200, "y_m": 0, "p_mw": 0.5}
          ],
          "branches": [
            {"id": "ab", "from": "a", "to": "b", "closed": false, "switchable": false,
             "r_pu": 0.01, "x_pu": 0.01, "s_max_mva": 5},
            {"id": "bc", "from": "b", "to": "c", "closed": true, "switchable": false,
             "r_pu": 0.01, "x_pu": 0.01, "s_max_mva": 5}
          ]
        })";
        const fs::path path = temp_file("gridheal_infeasible.json", doc);
        CHECK(run("solve --scenario " + path.string()) == 3);
    }
}

TEST_CASE("cli solve, verify and map round trip", "[cli]") {
    const std::string t1 = testutil::fixture_path("t1.json");
    const fs::path plan = fs::temp_directory_path() / "gridheal_t1_plan.json";

    REQUIRE(run("solve --scenario " + t1 + " --strategy proposed --out " + plan.string()) == 0);
    REQUIRE(fs::exists(plan));
    const nlohmann::json jplan = nlohmann::json::parse(testutil::read_file(plan.string()));
    CHECK(jplan.at("restored_mw").get<double>() == 3.0);
    CHECK(jplan.at("strategy") == "proposed");

    CHECK(run("verify --scenario " + t1 + " --plan " + plan.string()) == 0);

    SECTION("tampered plan fails verification with exit 2") {
        nlohmann::json bad = jplan;
        bad["restored_mw"] = 9.9;
        const fs::path bad_path = temp_file("gridheal_bad_plan.json", bad.dump());
        CHECK(run("verify --scenario " + t1 + " --plan " + bad_path.string()) == 2);
    }
    SECTION("map renders the verified plan") {
        const fs::path map = fs::temp_directory_path() / "gridheal_t1_map.json";
        REQUIRE(run("map --scenario " + t1 + " --plan " + plan.string() + " --out " + map.string()) == 0);
        const nlohmann::json doc = nlohmann::json::parse(testutil::read_file(map.string()));
        CHECK(doc.at("type") == "FeatureCollection");
        CHECK(doc.at("features").size() == 10);
    }
    SECTION("map refuses a tampered plan with exit 4") {
        nlohmann::json bad = jplan;
        bad["branch_state"]["b34"] = 0;
        const fs::path bad_path = temp_file("gridheal_bad_plan2.json", bad.dump());
        CHECK(run("map --scenario " + t1 + " --plan " + bad_path.string()) == 4);
    }
}

TEST_CASE("cli nodsc strategy", "[cli]") {
    const std::string t1 = testutil::fixture_path("t1.json");
    const fs::path plan = fs::temp_directory_path() / "gridheal_t1_nodsc.json";
    REQUIRE(run("solve --scenario " + t1 + " --strategy nodsc --out " + plan.string()) == 0);
    const nlohmann::json jplan = nlohmann::json::parse(testutil::read_file(plan.string()));
    CHECK(jplan.at("restored_mw").get<double>() == 1.0);
}

TEST_CASE("cli candidates dump", "[cli]") {
    const std::string out = capture("candidates --scenario " + testutil::fixture_path("t1.json"));
    const nlohmann::json doc = nlohmann::json::parse(out);
    CHECK(doc.at("positions").size() == 4);
    CHECK(doc.at("coverage").size() == 4);
    CHECK(doc.at("travel_sq").size() == 4);
}

TEST_CASE("cli compare emits json and text with identical values", "[cli]") {
    const std::string t1 = testutil::fixture_path("t1.json");
    const nlohmann::json j = nlohmann::json::parse(capture("compare --scenario " + t1));
    CHECK(j.at("rows").size() == 3);
    const std::string text = capture("compare --scenario " + t1 + " --format text");
    CHECK(text.find("proposed") != std::string::npos);
    CHECK(text.find("3") != std::string::npos);
}

TEST_CASE("cli gen is deterministic", "[cli]") {
    const std::string a = capture("gen --seed 5");
    const std::string b = capture("gen --seed 5");
    CHECK(a == b);
    const std::string c = capture("gen --seed 6");
    CHECK(a != c);
    // generated output parses back
    CHECK_NOTHROW(gridheal::parse_scenario(a));
}
