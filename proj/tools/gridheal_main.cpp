#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "gridheal/backend.hpp"
#include "gridheal/candidates.hpp"
#include "gridheal/compare.hpp"
#include "gridheal/gen.hpp"
#include "gridheal/mapdoc.hpp"
#include "gridheal/runner.hpp"
#include "gridheal/scenario_json.hpp"
#include "gridheal/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitPostSolveVerify = 4;
constexpr int kExitUsage = 64;
constexpr int kExitBadData = 65;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw gridheal::Error("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& out_path, const std::string& content) {
    if (out_path.empty() || out_path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw gridheal::Error("cannot write '" + out_path + "'");
    out << content;
}

gridheal::Scenario load_scenario(const std::string& path, const std::string& mode_flag) {
    gridheal::Scenario s = gridheal::parse_scenario(read_file(path));
    if (mode_flag == "discrete") s.options.position_mode = gridheal::PositionMode::Discrete;
    else if (mode_flag == "continuous") s.options.position_mode = gridheal::PositionMode::Continuous;
    const auto violations = gridheal::validate(s);
    if (!violations.empty()) {
        for (const auto& v : violations)
            std::cerr << "invalid scenario: " << v.entity << ": " << v.invariant << "\n";
        throw gridheal::ParseError("scenario failed validation (" +
                                   std::to_string(violations.size()) + " violations)");
    }
    return s;
}

struct CommonArgs {
    std::string scenario;
    std::string backend;
    std::string out;
    std::string mode;
    std::string format = "json";
    double time_limit = 0.0;
};

gridheal::SolveParams solve_params(const CommonArgs& args) {
    gridheal::SolveParams params;
    if (args.time_limit > 0.0) params.time_limit_s = args.time_limit;
    return params;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Drone-small-cell dispatch and microgrid restoration toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string strategy = "proposed";
    std::string plan_path;
    std::uint64_t seed = 1;

    auto add_common = [&](CLI::App* cmd, bool with_scenario = true) {
        if (with_scenario)
            cmd->add_option("--scenario", args.scenario, "scenario JSON document")->required();
        cmd->add_option("--backend", args.backend, "solver backend (default: $GRIDHEAL_BACKEND or highs)");
        cmd->add_option("--out", args.out, "output path (default: stdout)");
        cmd->add_option("--mode", args.mode, "position mode override: discrete|continuous");
        cmd->add_option("--time-limit", args.time_limit, "solver time limit in seconds");
        cmd->add_option("--format", args.format, "output format: json|text");
    };

    CLI::App* solve = app.add_subcommand("solve", "solve one strategy and write the plan");
    add_common(solve);
    solve->add_option("--strategy", strategy, "proposed|nodsc|maxcomm");

    CLI::App* compare = app.add_subcommand("compare", "run all three strategies and tabulate");
    add_common(compare);

    CLI::App* verify = app.add_subcommand("verify", "check a plan against a scenario");
    add_common(verify);
    verify->add_option("--plan", plan_path, "plan JSON produced by solve")->required();

    CLI::App* candidates = app.add_subcommand("candidates", "dump the DSC candidate position set");
    add_common(candidates);

    CLI::App* map = app.add_subcommand("map", "render a verified plan as a feature collection");
    add_common(map);
    map->add_option("--plan", plan_path, "plan JSON produced by solve")->required();

    CLI::App* gen = app.add_subcommand("gen", "generate a seeded random tiny scenario");
    add_common(gen, false);
    gen->add_option("--seed", seed, "generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (solve->parsed()) {
            if (strategy != "proposed" && strategy != "nodsc" && strategy != "maxcomm") {
                std::cerr << "unknown strategy '" << strategy << "'\n";
                return kExitUsage;
            }
            const gridheal::Scenario s = load_scenario(args.scenario, args.mode);
            auto backend = gridheal::make_backend(args.backend);
            const gridheal::StrategyOutcome outcome =
                gridheal::run_strategy(s, strategy, *backend, solve_params(args));
            if (outcome.status == gridheal::SolveStatus::Infeasible) {
                std::cerr << "model is infeasible\n";
                return kExitInfeasible;
            }
            if (!outcome.plan) {
                std::cerr << "solve failed: " << outcome.message << "\n";
                return 1;
            }
            const gridheal::VerificationReport report = gridheal::verify_plan(s, *outcome.plan);
            if (!report.pass()) {
                std::cerr << "plan failed post-solve verification:\n"
                          << report.to_json().dump(2) << "\n";
                return kExitPostSolveVerify;
            }
            write_output(args.out, gridheal::serialize_plan(*outcome.plan));
            return kExitOk;
        }

        if (compare->parsed()) {
            const gridheal::Scenario s = load_scenario(args.scenario, args.mode);
            auto backend = gridheal::make_backend(args.backend);
            const gridheal::ComparisonTable table =
                gridheal::run_compare(s, *backend, solve_params(args));
            if (args.format == "text") write_output(args.out, table.to_text());
            else write_output(args.out, table.to_json().dump(2) + "\n");
            return kExitOk;
        }

        if (verify->parsed()) {
            const gridheal::Scenario s = load_scenario(args.scenario, args.mode);
            const gridheal::RestorationPlan plan = gridheal::parse_plan(read_file(plan_path));
            const gridheal::VerificationReport report = gridheal::verify_plan(s, plan);
            write_output(args.out, report.to_json().dump(2) + "\n");
            return report.pass() ? kExitOk : kExitVerifyFail;
        }

        if (candidates->parsed()) {
            const gridheal::Scenario s = load_scenario(args.scenario, args.mode);
            const gridheal::OperationalState state = gridheal::apply_damage(s);
            const gridheal::CandidateSet cs = gridheal::generate_candidates(state, s.dscs);
            nlohmann::json positions = nlohmann::json::array();
            for (const gridheal::Point& p : cs.positions)
                positions.push_back(nlohmann::json{{"x_m", p.x}, {"y_m", p.y}});
            nlohmann::json doc{{"positions", std::move(positions)},
                               {"coverage", cs.coverage},
                               {"travel_sq", cs.travel_sq}};
            write_output(args.out, doc.dump(2) + "\n");
            return kExitOk;
        }

        if (map->parsed()) {
            const gridheal::Scenario s = load_scenario(args.scenario, args.mode);
            const gridheal::RestorationPlan plan = gridheal::parse_plan(read_file(plan_path));
            nlohmann::json doc;
            try {
                doc = gridheal::emit_map(s, plan);
            } catch (const gridheal::Error& e) {
                std::cerr << e.what() << "\n";
                return kExitPostSolveVerify;
            }
            write_output(args.out, doc.dump(2) + "\n");
            return kExitOk;
        }

        if (gen->parsed()) {
            const gridheal::Scenario s = gridheal::make_tiny_scenario(seed);
            write_output(args.out, gridheal::serialize_scenario(s));
            return kExitOk;
        }
    } catch (const gridheal::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadData;
    } catch (const gridheal::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitUsage;
}
