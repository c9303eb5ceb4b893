#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "branch_and_bound.hpp"
#include "formulations.hpp"
#include "simplex.hpp"
#include "solution.hpp"

namespace fsmvrp {

// Branching class per variable: usage, then type choice, then arcs.
inline std::vector<int> branching_priorities(const BuiltModel& built, const BranchingPriorities& p) {
    const auto& cat = *built.catalog;
    std::vector<int> prio(built.model.num_variables(), 0);
    for (std::size_t v = 0; v < cat.vehicles(); ++v) {
        prio[static_cast<std::size_t>(cat.u(v))] = p.usage;
        for (std::size_t t = 0; t < cat.types(); ++t) {
            if (cat.z(v, t) >= 0) prio[static_cast<std::size_t>(cat.z(v, t))] = p.type;
        }
        for (std::size_t t = 0; t < cat.layers(); ++t) {
            for (std::size_t i = 0; i < cat.locations(); ++i) {
                for (std::size_t j = 0; j < cat.locations(); ++j) {
                    if (i != j) prio[static_cast<std::size_t>(cat.x(v, t, i, j))] = p.arc;
                }
            }
        }
    }
    return prio;
}

inline MipResult solve_mip(const BuiltModel& built, const SolveParams& params, const std::optional<Assignment>& warm = std::nullopt) {
    if (!built.model.frozen()) throw ModelError("model must be frozen before solving");
    return solve_model(built.model, params, warm, branching_priorities(built, params.priorities));
}

namespace detail {

// Splits a balanced multigraph of arcs into closed walks; the one through
// `start` (if any) comes first.
inline std::vector<std::vector<std::size_t>> closed_walks(std::size_t locations, std::vector<std::pair<std::size_t, std::size_t>> arcs,
                                                          std::size_t start) {
    std::vector<std::vector<std::size_t>> out_arcs(locations);
    for (std::size_t a = 0; a < arcs.size(); ++a) out_arcs[arcs[a].first].push_back(a);
    for (auto& list : out_arcs) std::reverse(list.begin(), list.end());
    std::vector<std::vector<std::size_t>> walks;
    auto walk_from = [&](std::size_t s) {
        // Hierholzer: the circuit is emitted in reverse.
        std::vector<std::size_t> stack{s}, circuit;
        while (!stack.empty()) {
            const std::size_t a = stack.back();
            if (!out_arcs[a].empty()) {
                const std::size_t e = out_arcs[a].back();
                out_arcs[a].pop_back();
                stack.push_back(arcs[e].second);
            } else {
                circuit.push_back(a);
                stack.pop_back();
            }
        }
        std::reverse(circuit.begin(), circuit.end());
        if (circuit.size() > 1) circuit.pop_back();  // drop the repeated start
        return circuit;
    };
    if (!out_arcs[start].empty()) walks.push_back(walk_from(start));
    for (std::size_t s = 0; s < locations; ++s) {
        while (!out_arcs[s].empty()) walks.push_back(walk_from(s));
    }
    return walks;
}

}  // namespace detail

// Routes and integral deliveries read from an integral model point. Customer
// ids refer to `built.instance`; vehicles follow `built.fleet`. The depot walk
// is shortcut to a simple route; cycles that never reach the depot are kept
// in `detached`.
inline RoutingSolution decode(const BuiltModel& built, const Assignment& a) {
    const auto& cat = *built.catalog;
    const auto& inst = built.instance;
    const std::size_t L = cat.locations();
    RoutingSolution sol;
    sol.vehicles.resize(cat.vehicles());
    for (std::size_t v = 0; v < cat.vehicles(); ++v) {
        auto& r = sol.vehicles[v];
        std::vector<std::pair<std::size_t, std::size_t>> arcs;
        std::size_t layer = 0;
        for (std::size_t t = 0; t < cat.layers(); ++t) {
            std::vector<std::pair<std::size_t, std::size_t>> here;
            for (std::size_t i = 0; i < L; ++i) {
                for (std::size_t j = 0; j < L; ++j) {
                    if (i != j && a[cat.x(v, t, i, j)] > 0.5) here.emplace_back(i, j);
                }
            }
            if (!here.empty() && arcs.empty()) {
                arcs = std::move(here);
                layer = t;
            }
        }
        if (built.fleet.mode == FleetMode::stable) {
            r.type = built.fleet.vehicles[v].type;
        } else if (!arcs.empty()) {
            r.type = static_cast<int>(layer);
        }
        auto walks = detail::closed_walks(L, std::move(arcs), 0);
        for (auto& w : walks) {
            if (w.front() == 0) {
                for (std::size_t loc : w) {
                    if (loc == 0) continue;
                    const int id = inst.customers[loc - 1].id;
                    if (std::find(r.route.begin(), r.route.end(), id) == r.route.end()) r.route.push_back(id);
                }
            } else {
                std::vector<int> ids;
                for (std::size_t loc : w) ids.push_back(inst.customers[loc - 1].id);
                r.detached.push_back(std::move(ids));
            }
        }
    }
    if (!fill_deliveries(inst, built.fleet, sol)) {
        // Keep the model's own quantities so the checker can report the gap.
        for (std::size_t v = 0; v < cat.vehicles(); ++v) {
            auto& r = sol.vehicles[v];
            r.deliveries.clear();
            for (std::size_t i = 1; i < L; ++i) {
                std::vector<Quantity> q(cat.commodities(), 0);
                bool any = false;
                for (std::size_t k = 0; k < cat.commodities(); ++k) {
                    if (cat.y(v, i, k) < 0) continue;
                    q[k] = static_cast<Quantity>(std::llround(a[cat.y(v, i, k)]));
                    any = any || q[k] != 0;
                }
                if (any) r.deliveries[inst.customers[i - 1].id] = std::move(q);
            }
        }
    }
    sol.objective = objective_of(inst, built.fleet, sol);
    return sol;
}

}  // namespace fsmvrp
