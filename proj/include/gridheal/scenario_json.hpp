#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "gridheal/scenario.hpp"

namespace gridheal {

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& j, const std::string& key, const std::string& path) {
    const auto it = j.find(key);
    if (it == j.end()) throw ParseError(path + ": missing required key '" + key + "'");
    return *it;
}

inline double as_number(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number()) throw ParseError(path + ": expected a number");
    return j.get<double>();
}

inline std::string as_string(const nlohmann::json& j, const std::string& path) {
    if (!j.is_string()) throw ParseError(path + ": expected a string");
    return j.get<std::string>();
}

inline bool as_bool(const nlohmann::json& j, const std::string& path) {
    if (!j.is_boolean()) throw ParseError(path + ": expected a boolean");
    return j.get<bool>();
}

} // namespace detail

/// Parses the scenario document (see README for the schema). Comm-failure
/// regions are materialized into the explicit switch set here, so the
/// resulting Scenario always carries S_f as addresses.
inline Scenario parse_scenario(const std::string& text) {
    using nlohmann::json;
    using namespace detail;

    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("document is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("top level: expected an object");

    Scenario s;

    const json& nodes = require(doc, "nodes", "top level");
    if (!nodes.is_array()) throw ParseError("nodes: expected an array");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string path = "nodes[" + std::to_string(i) + "]";
        const json& jn = nodes[i];
        if (!jn.is_object()) throw ParseError(path + ": expected an object");
        Node n;
        n.id = as_string(require(jn, "id", path), path + ".id");
        n.position.x = as_number(require(jn, "x_m", path), path + ".x_m");
        n.position.y = as_number(require(jn, "y_m", path), path + ".y_m");
        n.load_p_mw = as_number(require(jn, "p_mw", path), path + ".p_mw");
        n.load_q_mvar = jn.contains("q_mvar") ? as_number(jn["q_mvar"], path + ".q_mvar") : 0.0;
        if (jn.contains("dg") && !jn["dg"].is_null()) {
            const json& jd = jn["dg"];
            if (!jd.is_object()) throw ParseError(path + ".dg: expected an object");
            DgRecord dg;
            dg.p_max_mw = as_number(require(jd, "p_max_mw", path + ".dg"), path + ".dg.p_max_mw");
            dg.q_max_mvar = jd.contains("q_max_mvar")
                                ? as_number(jd["q_max_mvar"], path + ".dg.q_max_mvar")
                                : dg.p_max_mw;
            n.dg = dg;
        }
        s.nodes.push_back(std::move(n));
    }

    const json& branches = require(doc, "branches", "top level");
    if (!branches.is_array()) throw ParseError("branches: expected an array");
    for (std::size_t i = 0; i < branches.size(); ++i) {
        const std::string path = "branches[" + std::to_string(i) + "]";
        const json& jb = branches[i];
        if (!jb.is_object()) throw ParseError(path + ": expected an object");
        Branch b;
        b.id = as_string(require(jb, "id", path), path + ".id");
        b.from = as_string(require(jb, "from", path), path + ".from");
        b.to = as_string(require(jb, "to", path), path + ".to");
        b.initial_closed = as_bool(require(jb, "closed", path), path + ".closed");
        b.switchable = as_bool(require(jb, "switchable", path), path + ".switchable");
        b.r_pu = as_number(require(jb, "r_pu", path), path + ".r_pu");
        b.x_pu = as_number(require(jb, "x_pu", path), path + ".x_pu");
        b.s_max_mva = as_number(require(jb, "s_max_mva", path), path + ".s_max_mva");
        s.branches.push_back(std::move(b));
    }

    if (doc.contains("dscs")) {
        const json& dscs = doc["dscs"];
        if (!dscs.is_array()) throw ParseError("dscs: expected an array");
        for (std::size_t i = 0; i < dscs.size(); ++i) {
            const std::string path = "dscs[" + std::to_string(i) + "]";
            const json& jd = dscs[i];
            if (!jd.is_object()) throw ParseError(path + ": expected an object");
            Dsc d;
            d.id = as_string(require(jd, "id", path), path + ".id");
            d.radius_m = as_number(require(jd, "radius_m", path), path + ".radius_m");
            if (!require(jd, "capacity", path).is_number_integer())
                throw ParseError(path + ".capacity: expected an integer");
            d.capacity = jd["capacity"].get<int>();
            d.initial_position.x = as_number(require(jd, "x0_m", path), path + ".x0_m");
            d.initial_position.y = as_number(require(jd, "y0_m", path), path + ".y0_m");
            s.dscs.push_back(std::move(d));
        }
    }

    if (doc.contains("options")) {
        const json& jo = doc["options"];
        if (!jo.is_object()) throw ParseError("options: expected an object");
        SolveOptions& o = s.options;
        if (jo.contains("voltage_min")) o.voltage_min = as_number(jo["voltage_min"], "options.voltage_min");
        if (jo.contains("voltage_max")) o.voltage_max = as_number(jo["voltage_max"], "options.voltage_max");
        if (jo.contains("voltage_ref")) o.voltage_ref = as_number(jo["voltage_ref"], "options.voltage_ref");
        if (jo.contains("coverage_tol")) o.coverage_tol = as_number(jo["coverage_tol"], "options.coverage_tol");
        if (jo.contains("position_mode")) {
            const std::string mode = as_string(jo["position_mode"], "options.position_mode");
            if (mode == "discrete") o.position_mode = PositionMode::Discrete;
            else if (mode == "continuous") o.position_mode = PositionMode::Continuous;
            else throw ParseError("options.position_mode: expected 'discrete' or 'continuous'");
        }
        if (jo.contains("big_m_policy")) {
            const json& jm = jo["big_m_policy"];
            if (jm.is_string() && jm.get<std::string>() == "auto") {
                o.big_m_policy.automatic = true;
            } else if (jm.is_object()) {
                o.big_m_policy.automatic = false;
                o.big_m_policy.m_coverage = as_number(require(jm, "m_coverage", "options.big_m_policy"),
                                                      "options.big_m_policy.m_coverage");
                o.big_m_policy.m_objective = as_number(require(jm, "m_objective", "options.big_m_policy"),
                                                       "options.big_m_policy.m_objective");
            } else {
                throw ParseError("options.big_m_policy: expected \"auto\" or {m_coverage, m_objective}");
            }
        }
    }

    s.finalize(); // derives switches; catches duplicates and dangling branch endpoints

    if (doc.contains("damage")) {
        const json& jd = doc["damage"];
        if (!jd.is_object()) throw ParseError("damage: expected an object");
        if (jd.contains("faulted")) {
            if (!jd["faulted"].is_array()) throw ParseError("damage.faulted: expected an array");
            for (const auto& v : jd["faulted"])
                s.damage.faulted_branches.insert(as_string(v, "damage.faulted[]"));
        }
        if (jd.contains("comm_failed")) {
            if (!jd["comm_failed"].is_array()) throw ParseError("damage.comm_failed: expected an array");
            for (const auto& v : jd["comm_failed"])
                s.damage.comm_failed_switches.insert(as_string(v, "damage.comm_failed[]"));
        }
        if (jd.contains("comm_failed_regions")) {
            const json& regions = jd["comm_failed_regions"];
            if (!regions.is_array()) throw ParseError("damage.comm_failed_regions: expected an array");
            for (std::size_t i = 0; i < regions.size(); ++i) {
                const std::string path = "damage.comm_failed_regions[" + std::to_string(i) + "]";
                const json& jr = regions[i];
                Point c;
                c.x = as_number(require(jr, "cx_m", path), path + ".cx_m");
                c.y = as_number(require(jr, "cy_m", path), path + ".cy_m");
                const double radius = as_number(require(jr, "radius_m", path), path + ".radius_m");
                // a region marks every switch inside it as comm-failed
                for (const Switch& sw : s.switches) {
                    if (euclidean_distance(sw.position, c) <= radius)
                        s.damage.comm_failed_switches.insert(sw.addr());
                }
            }
        }
    }

    s.finalize(); // re-validate references now that damage is materialized
    return s;
}

/// Inverse of parse_scenario up to field-wise equality: regions were already
/// materialized at parse time, so the output lists S_f explicitly.
inline std::string serialize_scenario(const Scenario& s, int indent = 2) {
    using nlohmann::json;
    json doc;

    json nodes = json::array();
    for (const Node& n : s.nodes) {
        json jn{{"id", n.id}, {"x_m", n.position.x}, {"y_m", n.position.y},
                {"p_mw", n.load_p_mw}, {"q_mvar", n.load_q_mvar}};
        if (n.dg) jn["dg"] = json{{"p_max_mw", n.dg->p_max_mw}, {"q_max_mvar", n.dg->q_max_mvar}};
        nodes.push_back(std::move(jn));
    }
    doc["nodes"] = std::move(nodes);

    json branches = json::array();
    for (const Branch& b : s.branches) {
        branches.push_back(json{{"id", b.id}, {"from", b.from}, {"to", b.to},
                                {"closed", b.initial_closed}, {"switchable", b.switchable},
                                {"r_pu", b.r_pu}, {"x_pu", b.x_pu}, {"s_max_mva", b.s_max_mva}});
    }
    doc["branches"] = std::move(branches);

    json dscs = json::array();
    for (const Dsc& d : s.dscs) {
        dscs.push_back(json{{"id", d.id}, {"radius_m", d.radius_m}, {"capacity", d.capacity},
                            {"x0_m", d.initial_position.x}, {"y0_m", d.initial_position.y}});
    }
    doc["dscs"] = std::move(dscs);

    doc["damage"] = json{{"faulted", s.damage.faulted_branches},
                         {"comm_failed", s.damage.comm_failed_switches}};

    json jo{{"voltage_min", s.options.voltage_min}, {"voltage_max", s.options.voltage_max},
            {"voltage_ref", s.options.voltage_ref}, {"coverage_tol", s.options.coverage_tol},
            {"position_mode", s.options.position_mode == PositionMode::Discrete ? "discrete" : "continuous"}};
    if (s.options.big_m_policy.automatic) {
        jo["big_m_policy"] = "auto";
    } else {
        jo["big_m_policy"] = json{{"m_coverage", s.options.big_m_policy.m_coverage},
                                  {"m_objective", s.options.big_m_policy.m_objective}};
    }
    doc["options"] = std::move(jo);

    return doc.dump(indent) + "\n";
}

inline bool scenario_equal(const Scenario& a, const Scenario& b) {
    if (a.nodes.size() != b.nodes.size() || a.branches.size() != b.branches.size() ||
        a.dscs.size() != b.dscs.size())
        return false;
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        const Node& x = a.nodes[i];
        const Node& y = b.nodes[i];
        if (x.id != y.id || x.position != y.position || x.load_p_mw != y.load_p_mw ||
            x.load_q_mvar != y.load_q_mvar || x.dg.has_value() != y.dg.has_value())
            return false;
        if (x.dg && (x.dg->p_max_mw != y.dg->p_max_mw || x.dg->q_max_mvar != y.dg->q_max_mvar)) return false;
    }
    for (std::size_t i = 0; i < a.branches.size(); ++i) {
        const Branch& x = a.branches[i];
        const Branch& y = b.branches[i];
        if (x.id != y.id || x.from != y.from || x.to != y.to || x.initial_closed != y.initial_closed ||
            x.switchable != y.switchable || x.r_pu != y.r_pu || x.x_pu != y.x_pu ||
            x.s_max_mva != y.s_max_mva)
            return false;
    }
    for (std::size_t i = 0; i < a.dscs.size(); ++i) {
        const Dsc& x = a.dscs[i];
        const Dsc& y = b.dscs[i];
        if (x.id != y.id || x.radius_m != y.radius_m || x.capacity != y.capacity ||
            x.initial_position != y.initial_position)
            return false;
    }
    return a.damage.faulted_branches == b.damage.faulted_branches &&
           a.damage.comm_failed_switches == b.damage.comm_failed_switches &&
           a.options.voltage_min == b.options.voltage_min &&
           a.options.voltage_max == b.options.voltage_max &&
           a.options.voltage_ref == b.options.voltage_ref &&
           a.options.coverage_tol == b.options.coverage_tol &&
           a.options.position_mode == b.options.position_mode;
}

} // namespace gridheal
