#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "gridheal/errors.hpp"
#include "gridheal/geometry.hpp"
#include "gridheal/scenario.hpp"

namespace gridheal {

/// Discretized DSC placement set. Columns of `coverage` follow the sorted
/// order of comm-failed switch addresses; `travel_sq` is the squared
/// distance from the fleet initial position (position of the first DSC).
struct CandidateSet {
    std::vector<Point> positions;
    std::vector<std::vector<bool>> coverage; // [candidate][failed switch]
    std::vector<double> travel_sq;
    double radius = 0.0;
};

namespace detail {

inline void push_unique(std::vector<Point>& pts, const Point& p) {
    for (const Point& q : pts)
        if (q == p) return;
    pts.push_back(p);
}

} // namespace detail

/// Candidate positions for one coverage radius: every comm-failed switch
/// position, both intersection points of each pair of radius-r circles
/// centered on comm-failed switches less than 2r apart, and the fleet
/// initial position(s). For every subset of failed switches coverable by
/// some radius-r disk, at least one candidate covers that subset: a minimal
/// enclosing disk of radius <= r can be translated until two points lie on
/// its boundary, or centered on a single point.
inline CandidateSet generate_candidates_for_radius(const OperationalState& state, double radius,
                                                   const std::vector<Point>& initial_positions) {
    const Scenario& s = state.scenario;
    CandidateSet cs;
    cs.radius = radius;

    std::vector<Point> failed_pos;
    failed_pos.reserve(state.failed_switches.size());
    for (int idx : state.failed_switches)
        failed_pos.push_back(s.switches[static_cast<std::size_t>(idx)].position);

    for (const Point& p : failed_pos) detail::push_unique(cs.positions, p);
    for (std::size_t i = 0; i < failed_pos.size(); ++i) {
        for (std::size_t j = i + 1; j < failed_pos.size(); ++j) {
            for (const Point& p : circle_intersections(failed_pos[i], failed_pos[j], radius))
                detail::push_unique(cs.positions, p);
        }
    }
    for (const Point& p : initial_positions) detail::push_unique(cs.positions, p);

    const Point origin = initial_positions.empty() ? Point{} : initial_positions.front();
    const double tol = s.options.coverage_tol;
    cs.coverage.reserve(cs.positions.size());
    cs.travel_sq.reserve(cs.positions.size());
    for (const Point& c : cs.positions) {
        std::vector<bool> row;
        row.reserve(failed_pos.size());
        for (const Point& swp : failed_pos)
            row.push_back(is_covered(euclidean_distance(c, swp), radius, tol));
        cs.coverage.push_back(std::move(row));
        cs.travel_sq.push_back(squared_distance(c, origin));
    }
    return cs;
}

/// Candidate set for a fleet of equal radii (the common case; the paper's
/// case study uses one shared radius). Unequal radii need per-DSC sets —
/// see fleet_candidates below.
inline CandidateSet generate_candidates(const OperationalState& state, const std::vector<Dsc>& fleet) {
    if (fleet.empty()) return CandidateSet{};
    std::vector<Point> initials;
    for (const Dsc& d : fleet) detail::push_unique(initials, d.initial_position);
    for (const Dsc& d : fleet) {
        if (d.radius_m != fleet.front().radius_m)
            throw Error("generate_candidates: fleet radii differ; use fleet_candidates for per-DSC sets");
    }
    return generate_candidates_for_radius(state, fleet.front().radius_m, initials);
}

/// Per-DSC placement alternatives actually handed to the model and the
/// oracle. Candidates with identical coverage sets are collapsed to the
/// travel-minimal representative, which preserves both the optimal value
/// and the optimal travel (done identically on both solve paths).
struct DscCandidates {
    std::vector<Point> positions;
    std::vector<double> travel_sq;               // squared distance from this DSC's initial position
    std::vector<std::vector<bool>> covers;       // [candidate][failed switch]
    std::vector<int> source_index;               // index into the raw CandidateSet
};

inline std::vector<DscCandidates> fleet_candidates(const OperationalState& state,
                                                   const std::vector<Dsc>& fleet) {
    std::vector<DscCandidates> out;
    if (fleet.empty()) return out;

    bool shared_init = true;
    bool shared_radius = true;
    for (const Dsc& d : fleet) {
        shared_init = shared_init && d.initial_position == fleet.front().initial_position;
        shared_radius = shared_radius && d.radius_m == fleet.front().radius_m;
    }

    std::vector<Point> initials;
    for (const Dsc& d : fleet) detail::push_unique(initials, d.initial_position);

    std::map<double, CandidateSet> by_radius;
    for (const Dsc& d : fleet) {
        if (!by_radius.count(d.radius_m))
            by_radius.emplace(d.radius_m, generate_candidates_for_radius(state, d.radius_m, initials));
    }

    for (const Dsc& d : fleet) {
        const CandidateSet& raw = by_radius.at(d.radius_m);
        DscCandidates dc;
        if (shared_init && shared_radius) {
            // dedupe by coverage set, keeping the travel-minimal candidate
            std::map<std::vector<bool>, int> best; // coverage -> raw index
            for (int c = 0; c < static_cast<int>(raw.positions.size()); ++c) {
                const auto it = best.find(raw.coverage[static_cast<std::size_t>(c)]);
                if (it == best.end()) {
                    best.emplace(raw.coverage[static_cast<std::size_t>(c)], c);
                } else if (raw.travel_sq[static_cast<std::size_t>(c)] <
                           raw.travel_sq[static_cast<std::size_t>(it->second)]) {
                    it->second = c;
                }
            }
            std::vector<int> keep;
            for (const auto& [cov, idx] : best) keep.push_back(idx);
            std::sort(keep.begin(), keep.end());
            for (int c : keep) {
                dc.positions.push_back(raw.positions[static_cast<std::size_t>(c)]);
                dc.travel_sq.push_back(raw.travel_sq[static_cast<std::size_t>(c)]);
                dc.covers.push_back(raw.coverage[static_cast<std::size_t>(c)]);
                dc.source_index.push_back(c);
            }
        } else {
            // distinct initial positions make travel DSC-specific; keep the
            // full set and recompute travel from this drone's start
            for (int c = 0; c < static_cast<int>(raw.positions.size()); ++c) {
                dc.positions.push_back(raw.positions[static_cast<std::size_t>(c)]);
                dc.travel_sq.push_back(squared_distance(raw.positions[static_cast<std::size_t>(c)],
                                                        d.initial_position));
                dc.covers.push_back(raw.coverage[static_cast<std::size_t>(c)]);
                dc.source_index.push_back(c);
            }
        }
        out.push_back(std::move(dc));
    }
    return out;
}

/// Big-M constants. m_coverage makes the coverage indicator non-binding
/// exactly when d <= r; m_objective keeps the full travel penalty below
/// half the smallest positive load, so load recovery always dominates.
struct BigM {
    double m_coverage = 0.0;
    double m_objective = 1.0;
};

inline BigM pick_big_m(const BoundingBox& extent, double radius, double min_load,
                       std::size_t fleet_size = 1) {
    if (extent.empty()) throw Error("pick_big_m: empty extent");
    if (min_load <= 0.0)
        throw Error("pick_big_m: min_load must be positive (exclude zero loads from the minimum)");
    BigM m;
    const double diag = extent.diagonal();
    m.m_coverage = radius + diag;
    const double n = static_cast<double>(std::max<std::size_t>(fleet_size, 1));
    // a degenerate extent means travel is identically zero; any positive
    // divisor keeps the objective well defined
    m.m_objective = diag > 0.0 ? n * diag * diag / (0.5 * min_load) : 1.0;
    return m;
}

/// Smallest strictly positive active load, or fallback when none exists
/// (the travel tie-break is then unconstrained by load dominance).
inline double min_positive_load(const Scenario& s, double fallback = 1.0) {
    double best = 0.0;
    for (const Node& n : s.nodes) {
        if (n.load_p_mw > 0.0 && (best == 0.0 || n.load_p_mw < best)) best = n.load_p_mw;
    }
    return best > 0.0 ? best : fallback;
}

} // namespace gridheal
