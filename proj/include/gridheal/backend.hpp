#pragma once

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridheal/errors.hpp"
#include "gridheal/milp.hpp"

namespace gridheal {

enum class SolveStatus { Optimal, Infeasible, TimeLimit, Error };

inline const char* status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::TimeLimit: return "time_limit";
        default: return "error";
    }
}

struct SolveParams {
    double mip_gap = 1e-9;
    std::optional<double> time_limit_s;
};

struct SolveResult {
    SolveStatus status = SolveStatus::Error;
    double objective = 0.0;
    double bound = 0.0;
    std::vector<double> values; // by variable index
    double wall_time_s = 0.0;
    std::string message;

    double value(const MilpModel& m, const std::string& name) const {
        return values.at(static_cast<std::size_t>(m.var(name)));
    }
};

/// Narrow solver contract: declare variables, add linear (and optionally
/// cone) constraints, set a linear objective, solve, query values.
class SolverBackend {
public:
    virtual ~SolverBackend() = default;
    virtual std::string name() const = 0;
    virtual bool supports_soc() const = 0;
    virtual SolveResult solve(const MilpModel& model, const SolveParams& params) = 0;
};

namespace detail {

// Request/response worker around scipy.optimize.milp (HiGHS). One JSON
// object per line on stdin, one per line on stdout.
inline const char* highs_worker_source() {
    return R"PY(
import json
import sys
import time

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp

STATUS = {0: "optimal", 1: "time_limit", 2: "infeasible", 3: "error", 4: "error"}


def solve(req):
    model = req["model"]
    lb = np.asarray(model["lb"], dtype=float)
    ub = np.asarray(model["ub"], dtype=float)
    integrality = np.asarray(model["int"], dtype=np.uint8)
    n = lb.size
    c = np.zeros(n)
    for idx, coeff in model["obj"]:
        c[idx] += coeff
    maximize = bool(model.get("maximize", True))
    if maximize:
        c = -c

    rows, cols, vals, clo, cup = [], [], [], [], []
    for r, con in enumerate(model["cons"]):
        for idx, coeff in con["t"]:
            rows.append(r)
            cols.append(idx)
            vals.append(coeff)
        sense, rhs = con["s"], con["r"]
        if sense == "<":
            clo.append(-np.inf)
            cup.append(rhs)
        elif sense == ">":
            clo.append(rhs)
            cup.append(np.inf)
        else:
            clo.append(rhs)
            cup.append(rhs)

    params = req.get("params", {})
    options = {"presolve": True, "mip_rel_gap": float(params.get("mip_gap", 1e-9))}
    if params.get("time_limit_s") is not None:
        options["time_limit"] = float(params["time_limit_s"])

    kwargs = {}
    if clo:
        a = sparse.csc_array((vals, (rows, cols)), shape=(len(clo), n))
        kwargs["constraints"] = LinearConstraint(a, np.asarray(clo), np.asarray(cup))

    t0 = time.perf_counter()
    res = milp(c=c, integrality=integrality, bounds=Bounds(lb, ub), options=options, **kwargs)
    wall = time.perf_counter() - t0

    out = {
        "status": STATUS.get(res.status, "error"),
        "wall_time_s": wall,
        "message": str(res.message),
    }
    if res.x is not None:
        obj = float(res.fun)
        bound = res.mip_dual_bound
        bound = float(bound) if bound is not None else obj
        if maximize:
            obj, bound = -obj, -bound
        out["objective"] = obj
        out["bound"] = bound
        out["values"] = [float(v) for v in res.x]
    return out


def main():
    print(json.dumps({"ready": True, "solver": "highs"}), flush=True)
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            req = json.loads(line)
            if req.get("op") == "exit":
                break
            out = solve(req)
        except Exception as exc:  # report instead of dying; the parent decides
            out = {"status": "error", "message": f"{type(exc).__name__}: {exc}"}
        print(json.dumps(out), flush=True)


if __name__ == "__main__":
    main()
)PY";
}

/// Line-oriented bidirectional pipe to a child process.
class LineSubprocess {
public:
    LineSubprocess(const std::string& exe, const std::vector<std::string>& args) {
        int to_child[2];
        int from_child[2];
        if (::pipe(to_child) != 0 || ::pipe(from_child) != 0)
            throw BackendError("failed to create pipes for solver worker");
        const pid_t pid = ::fork();
        if (pid < 0) throw BackendError("failed to fork solver worker");
        if (pid == 0) {
            ::dup2(to_child[0], STDIN_FILENO);
            ::dup2(from_child[1], STDOUT_FILENO);
            ::close(to_child[0]);
            ::close(to_child[1]);
            ::close(from_child[0]);
            ::close(from_child[1]);
            std::vector<char*> argv;
            argv.push_back(const_cast<char*>(exe.c_str()));
            for (const std::string& a : args) argv.push_back(const_cast<char*>(a.c_str()));
            argv.push_back(nullptr);
            ::execvp(exe.c_str(), argv.data());
            ::perror("execvp");
            ::_exit(127);
        }
        pid_ = pid;
        ::close(to_child[0]);
        ::close(from_child[1]);
        to_ = ::fdopen(to_child[1], "w");
        from_ = ::fdopen(from_child[0], "r");
        if (!to_ || !from_) throw BackendError("failed to open solver worker streams");
    }

    ~LineSubprocess() {
        if (to_) ::fclose(to_);
        if (from_) ::fclose(from_);
        if (pid_ > 0) {
            int status = 0;
            ::waitpid(pid_, &status, 0);
        }
    }

    LineSubprocess(const LineSubprocess&) = delete;
    LineSubprocess& operator=(const LineSubprocess&) = delete;

    void write_line(const std::string& line) {
        if (std::fputs(line.c_str(), to_) == EOF || std::fputc('\n', to_) == EOF ||
            std::fflush(to_) != 0)
            throw BackendError("solver worker pipe closed while writing");
    }

    std::string read_line() {
        std::string out;
        char buf[4096];
        while (std::fgets(buf, sizeof(buf), from_)) {
            out += buf;
            if (!out.empty() && out.back() == '\n') {
                out.pop_back();
                return out;
            }
        }
        throw BackendError("solver worker exited unexpectedly (is scipy installed?)");
    }

private:
    pid_t pid_ = -1;
    FILE* to_ = nullptr;
    FILE* from_ = nullptr;
};

} // namespace detail

/// HiGHS driven through SciPy's milp binding in a persistent worker
/// process. Deterministic for fixed inputs; no second-order-cone support,
/// so continuous position mode is rejected.
class HighsBackend final : public SolverBackend {
public:
    HighsBackend() = default;

    std::string name() const override { return "highs"; }
    bool supports_soc() const override { return false; }

    SolveResult solve(const MilpModel& model, const SolveParams& params) override {
        if (!model.soc_constraints.empty())
            throw BackendError("backend 'highs' does not support second-order cone constraints; "
                               "use discrete position mode or attach a cone-capable backend");
        std::lock_guard<std::mutex> lock(mutex_);
        ensure_worker();

        nlohmann::json req;
        req["op"] = "solve";
        nlohmann::json jm;
        nlohmann::json lb = nlohmann::json::array();
        nlohmann::json ub = nlohmann::json::array();
        nlohmann::json integrality = nlohmann::json::array();
        for (const Variable& v : model.variables) {
            lb.push_back(v.lb);
            ub.push_back(v.ub);
            integrality.push_back(v.kind == VarKind::Binary ? 1 : 0);
        }
        jm["lb"] = std::move(lb);
        jm["ub"] = std::move(ub);
        jm["int"] = std::move(integrality);
        nlohmann::json cons = nlohmann::json::array();
        for (const LinCon& c : model.linear_constraints) {
            nlohmann::json terms = nlohmann::json::array();
            for (const LinTerm& t : c.terms) terms.push_back(nlohmann::json::array({t.var, t.coeff}));
            const char* s = c.sense == Sense::LE ? "<" : c.sense == Sense::GE ? ">" : "=";
            cons.push_back(nlohmann::json{{"t", std::move(terms)}, {"s", s}, {"r", c.rhs}});
        }
        jm["cons"] = std::move(cons);
        nlohmann::json obj = nlohmann::json::array();
        for (const LinTerm& t : model.objective.terms)
            obj.push_back(nlohmann::json::array({t.var, t.coeff}));
        jm["obj"] = std::move(obj);
        jm["maximize"] = model.objective.maximize;
        req["model"] = std::move(jm);
        nlohmann::json jp;
        jp["mip_gap"] = params.mip_gap;
        if (params.time_limit_s) jp["time_limit_s"] = *params.time_limit_s;
        req["params"] = std::move(jp);

        worker_->write_line(req.dump());
        const std::string line = worker_->read_line();
        nlohmann::json resp;
        try {
            resp = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
            throw BackendError("solver worker produced malformed output: " + line.substr(0, 200));
        }

        SolveResult result;
        const std::string status = resp.value("status", "error");
        if (status == "optimal") result.status = SolveStatus::Optimal;
        else if (status == "infeasible") result.status = SolveStatus::Infeasible;
        else if (status == "time_limit") result.status = SolveStatus::TimeLimit;
        else result.status = SolveStatus::Error;
        result.message = resp.value("message", "");
        result.wall_time_s = resp.value("wall_time_s", 0.0);
        if (resp.contains("values")) {
            result.objective = resp.value("objective", 0.0);
            result.bound = resp.value("bound", result.objective);
            result.values = resp["values"].get<std::vector<double>>();
            if (result.values.size() != model.variables.size())
                throw BackendError("solver worker returned wrong value count");
        }
        if (result.status == SolveStatus::Error && result.message.empty())
            result.message = "solver worker reported an error";
        return result;
    }

private:
    void ensure_worker() {
        if (worker_) return;
        script_path_ = worker_script_path();
        const char* python = std::getenv("GRIDHEAL_PYTHON");
        worker_ = std::make_unique<detail::LineSubprocess>(python ? python : "python3",
                                                           std::vector<std::string>{script_path_});
        const std::string hello = worker_->read_line();
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(hello);
        } catch (const nlohmann::json::parse_error&) {
            throw BackendError("solver worker failed to start: " + hello.substr(0, 200));
        }
        if (!j.value("ready", false)) throw BackendError("solver worker not ready: " + hello);
    }

    std::string worker_script_path() {
        if (const char* env = std::getenv("GRIDHEAL_SOLVER_SCRIPT")) return env;
        namespace fs = std::filesystem;
        const fs::path path =
            fs::temp_directory_path() / ("gridheal_highs_worker_" + std::to_string(::getpid()) + ".py");
        std::ofstream out(path);
        if (!out) throw BackendError("cannot write solver worker script to " + path.string());
        out << detail::highs_worker_source();
        out.close();
        return path.string();
    }

    std::mutex mutex_;
    std::unique_ptr<detail::LineSubprocess> worker_;
    std::string script_path_;
};

/// Backend selection: explicit name, else GRIDHEAL_BACKEND, else "highs".
inline std::unique_ptr<SolverBackend> make_backend(const std::string& name = "") {
    std::string chosen = name;
    if (chosen.empty()) {
        const char* env = std::getenv("GRIDHEAL_BACKEND");
        chosen = env ? env : "highs";
    }
    if (chosen == "highs") return std::make_unique<HighsBackend>();
    throw BackendError("unknown solver backend '" + chosen + "' (available: highs)");
}

} // namespace gridheal
