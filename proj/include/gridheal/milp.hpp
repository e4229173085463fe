#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "gridheal/errors.hpp"

namespace gridheal {

/// Shortest round-trip decimal form of a double, locale-independent.
inline std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

enum class VarKind { Binary, Continuous };
enum class Sense { LE, GE, EQ };

inline const char* sense_token(Sense s) {
    switch (s) {
        case Sense::LE: return "<=";
        case Sense::GE: return ">=";
        default: return "=";
    }
}

struct Variable {
    std::string name;
    VarKind kind = VarKind::Continuous;
    double lb = 0.0;
    double ub = 0.0;
    std::string symbol; // paper symbol instance, e.g. "α(8,21)"
};

struct LinTerm {
    int var = -1;
    double coeff = 0.0;
};

struct LinCon {
    std::vector<LinTerm> terms;
    Sense sense = Sense::LE;
    double rhs = 0.0;
    std::string tag; // equation family, e.g. "eq9", "radiality", "flow"
};

/// Affine expression a^T x + b, used inside cone constraints.
struct AffineExpr {
    std::vector<LinTerm> terms;
    double constant = 0.0;
};

/// ||(e_1, ..., e_m)||_2 <= rhs  (continuous position mode only).
struct SocCon {
    std::vector<AffineExpr> norm;
    AffineExpr rhs;
    std::string tag;
};

struct Objective {
    bool maximize = true;
    std::vector<LinTerm> terms;
};

/// Solver-agnostic variable/constraint/objective container. Built once,
/// never mutated afterwards; distinct models may be solved concurrently.
class MilpModel {
public:
    std::vector<Variable> variables;
    std::vector<LinCon> linear_constraints;
    std::vector<SocCon> soc_constraints;
    Objective objective;
    std::map<std::string, int> symbol_index; // paper symbol instance -> variable

    int add_variable(std::string name, VarKind kind, double lb, double ub, std::string symbol) {
        const int idx = static_cast<int>(variables.size());
        if (!by_name_.emplace(name, idx).second)
            throw Error("duplicate variable name '" + name + "'");
        if (!symbol.empty() && !symbol_index.emplace(symbol, idx).second)
            throw Error("duplicate variable symbol '" + symbol + "'");
        variables.push_back(Variable{std::move(name), kind, lb, ub, std::move(symbol)});
        return idx;
    }

    int add_binary(std::string name, std::string symbol, double lb = 0.0, double ub = 1.0) {
        return add_variable(std::move(name), VarKind::Binary, lb, ub, std::move(symbol));
    }

    void add_constraint(std::vector<LinTerm> terms, Sense sense, double rhs, std::string tag) {
        linear_constraints.push_back(LinCon{std::move(terms), sense, rhs, std::move(tag)});
    }

    bool has(const std::string& name) const { return by_name_.count(name) != 0; }

    int var(const std::string& name) const {
        const auto it = by_name_.find(name);
        if (it == by_name_.end()) throw Error("unknown variable '" + name + "'");
        return it->second;
    }

    const std::string& name_of(int idx) const { return variables[static_cast<std::size_t>(idx)].name; }

    /// Signed LHS value of a linear constraint under an assignment.
    double activity(const LinCon& c, const std::vector<double>& values) const {
        double a = 0.0;
        for (const LinTerm& t : c.terms) a += t.coeff * values[static_cast<std::size_t>(t.var)];
        return a;
    }

    /// Violation magnitude (0 when satisfied).
    double residual(const LinCon& c, const std::vector<double>& values) const {
        const double a = activity(c, values);
        switch (c.sense) {
            case Sense::LE: return std::max(0.0, a - c.rhs);
            case Sense::GE: return std::max(0.0, c.rhs - a);
            default: return std::abs(a - c.rhs);
        }
    }

    std::map<std::string, int> constraint_counts() const {
        std::map<std::string, int> counts;
        for (const LinCon& c : linear_constraints) ++counts[c.tag];
        for (const SocCon& c : soc_constraints) ++counts[c.tag];
        return counts;
    }

    /// Deterministic text form: VAR lines sorted by name, CON lines sorted
    /// by tag (stable), terms sorted by variable name.
    std::string dump() const {
        std::string out;
        std::vector<int> var_order(variables.size());
        for (std::size_t i = 0; i < variables.size(); ++i) var_order[i] = static_cast<int>(i);
        std::sort(var_order.begin(), var_order.end(), [this](int a, int b) {
            return variables[static_cast<std::size_t>(a)].name < variables[static_cast<std::size_t>(b)].name;
        });
        for (int i : var_order) {
            const Variable& v = variables[static_cast<std::size_t>(i)];
            out += "VAR " + v.name + (v.kind == VarKind::Binary ? " binary " : " continuous ") +
                   fmt_double(v.lb) + " " + fmt_double(v.ub) + " " + v.symbol + "\n";
        }

        auto term_block = [this](std::vector<LinTerm> terms) {
            std::sort(terms.begin(), terms.end(), [this](const LinTerm& a, const LinTerm& b) {
                return name_of(a.var) < name_of(b.var);
            });
            std::string s;
            for (const LinTerm& t : terms)
                s += " {" + fmt_double(t.coeff) + " " + name_of(t.var) + "}";
            return s;
        };

        std::vector<const LinCon*> cons;
        cons.reserve(linear_constraints.size());
        for (const LinCon& c : linear_constraints) cons.push_back(&c);
        std::stable_sort(cons.begin(), cons.end(),
                         [](const LinCon* a, const LinCon* b) { return a->tag < b->tag; });
        for (const LinCon* c : cons) {
            out += "CON " + c->tag + " " + sense_token(c->sense) + " " + fmt_double(c->rhs) +
                   term_block(c->terms) + "\n";
        }

        std::vector<const SocCon*> socs;
        for (const SocCon& c : soc_constraints) socs.push_back(&c);
        std::stable_sort(socs.begin(), socs.end(),
                         [](const SocCon* a, const SocCon* b) { return a->tag < b->tag; });
        for (const SocCon* c : socs) {
            out += "SOC " + c->tag + " norm[";
            for (std::size_t i = 0; i < c->norm.size(); ++i) {
                if (i) out += " ;";
                out += term_block(c->norm[i].terms);
                out += " {" + fmt_double(c->norm[i].constant) + " _}";
            }
            out += " ] <=" + term_block(c->rhs.terms) + " {" + fmt_double(c->rhs.constant) + " _}\n";
        }

        out += std::string("OBJ ") + (objective.maximize ? "maximize" : "minimize") +
               term_block(objective.terms) + "\n";
        return out;
    }

private:
    std::map<std::string, int> by_name_;
};

} // namespace gridheal
