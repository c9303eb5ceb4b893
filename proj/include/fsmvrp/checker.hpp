#pragma once

#include <algorithm>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"
#include "instance.hpp"
#include "solution.hpp"

namespace fsmvrp {

struct ValidationReport {
    bool fleet = true;
    bool demand = true;
    bool capacity = true;
    bool compatibility = true;
    bool connectivity = true;
    bool linkage = true;
    double objective = 0.0;
    std::vector<std::string> failures;

    bool ok() const { return fleet && demand && capacity && compatibility && connectivity && linkage; }
};

// Checks a solution against every routing rule; failures are verdicts.
inline ValidationReport validate_solution(const Instance& inst, const Fleet& fleet, const RoutingSolution& sol) {
    ValidationReport rep;
    auto fail = [&](bool& verdict, std::string why) {
        verdict = false;
        rep.failures.push_back(std::move(why));
    };
    const std::size_t K = inst.num_commodities();
    if (sol.vehicles.size() != fleet.size()) {
        fail(rep.fleet, "solution lists " + std::to_string(sol.vehicles.size()) + " vehicles, fleet has " + std::to_string(fleet.size()));
    }
    std::vector<std::vector<Quantity>> served(inst.num_locations(), std::vector<Quantity>(K, 0));
    for (std::size_t v = 0; v < sol.vehicles.size() && v < fleet.size(); ++v) {
        const auto& r = sol.vehicles[v];
        const std::string who = "vehicle " + std::to_string(v);
        if (fleet.mode == FleetMode::stable && r.type != fleet.vehicles[v].type) fail(rep.fleet, who + ": type differs from its pool");
        if (fleet.mode == FleetMode::flexible && r.used() && (r.type < 0 || static_cast<std::size_t>(r.type) >= inst.num_types())) {
            fail(rep.fleet, who + ": used without a vehicle type");
        }

        std::set<int> visited;
        for (int id : r.route) {
            if (inst.index_of_customer(id) < 0) {
                fail(rep.connectivity, who + ": unknown customer " + std::to_string(id));
            } else if (!visited.insert(id).second) {
                fail(rep.connectivity, who + ": visits customer " + std::to_string(id) + " twice");
            }
        }
        for (const auto& cyc : r.detached) {
            std::string ids;
            for (int id : cyc) ids += (ids.empty() ? "" : ",") + std::to_string(id);
            fail(rep.connectivity, who + ": cycle {" + ids + "} does not reach the depot");
        }

        const Quantity cap = vehicle_capacity(inst, fleet, v, r.type);
        const auto& comp = vehicle_compatibility(inst, fleet, v, r.type);
        Quantity load = 0;
        for (const auto& [id, q] : r.deliveries) {
            const int idx = inst.index_of_customer(id);
            if (idx < 0 || q.size() != K) {
                fail(rep.linkage, who + ": delivery to unknown customer " + std::to_string(id));
                continue;
            }
            bool positive = false;
            for (std::size_t k = 0; k < K; ++k) {
                if (q[k] < 0) fail(rep.linkage, who + ": negative delivery at customer " + std::to_string(id));
                if (q[k] > 0) {
                    positive = true;
                    if (k >= comp.size() || !comp[k]) {
                        fail(rep.compatibility, who + ": carries incompatible '" + inst.commodities[k] + "'");
                    }
                }
                load += q[k];
                served[static_cast<std::size_t>(idx)][k] += q[k];
            }
            if (positive && !visited.count(id)) fail(rep.linkage, who + ": delivers to unvisited customer " + std::to_string(id));
        }
        if (load > cap) fail(rep.capacity, who + ": load " + std::to_string(load) + " exceeds capacity " + std::to_string(cap));
    }
    for (std::size_t i = 1; i < inst.num_locations(); ++i) {
        for (std::size_t k = 0; k < K; ++k) {
            if (served[i][k] != inst.demand(i, k)) {
                fail(rep.demand, "customer " + std::to_string(inst.customers[i - 1].id) + ", '" + inst.commodities[k] + "': delivered " +
                                     std::to_string(served[i][k]) + " of " + std::to_string(inst.demand(i, k)));
            }
        }
    }
    if (rep.connectivity) rep.objective = objective_of(inst, fleet, sol);
    return rep;
}

struct OracleResult {
    double value = 0.0;
    RoutingSolution solution;
};

namespace detail {

// Shortest depot-anchored tour through each customer subset (bitmask over
// customers 0..n-1) and the matching visiting order.
struct SubsetTours {
    std::vector<double> length;
    std::vector<std::vector<std::size_t>> order;  // location indices
};

inline SubsetTours subset_tours(const Instance& inst) {
    const std::size_t n = inst.num_customers();
    const std::size_t full = std::size_t{1} << n;
    SubsetTours out{std::vector<double>(full, 0.0), std::vector<std::vector<std::size_t>>(full)};
    for (std::size_t mask = 1; mask < full; ++mask) {
        std::vector<std::size_t> perm;
        for (std::size_t c = 0; c < n; ++c) {
            if (mask >> c & 1U) perm.push_back(c + 1);
        }
        double best = std::numeric_limits<double>::infinity();
        std::vector<std::size_t> best_perm;
        do {
            double len = inst.dist(0, perm.front()) + inst.dist(perm.back(), 0);
            for (std::size_t p = 1; p < perm.size(); ++p) len += inst.dist(perm[p - 1], perm[p]);
            if (len < best - 1e-12) {
                best = len;
                best_perm = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        out.length[mask] = best;
        out.order[mask] = std::move(best_perm);
    }
    return out;
}

}  // namespace detail

inline constexpr std::size_t kOracleMaxCustomers = 5;
inline constexpr std::size_t kOracleMaxVehicles = 3;

// Exact optimum by enumerating one customer subset per vehicle (with its best
// tour) and testing delivery feasibility by max-flow. Identical vehicles take
// non-decreasing subsets; flexible vehicles enumerate (type, subset) pairs in
// non-decreasing order.
inline OracleResult brute_force_optimum(const Instance& inst, const Fleet& fleet) {
    const std::size_t n = inst.num_customers();
    const std::size_t V = fleet.size();
    if (n > kOracleMaxCustomers || V > kOracleMaxVehicles) {
        throw ModelError("brute-force oracle limited to " + std::to_string(kOracleMaxCustomers) + " customers and " +
                         std::to_string(kOracleMaxVehicles) + " vehicles");
    }
    const auto tours = detail::subset_tours(inst);
    const std::size_t full = std::size_t{1} << n;
    const std::size_t T = inst.num_types();
    const bool stable = fleet.mode == FleetMode::stable;

    // Choice per vehicle: code = type * full + mask (stable: type fixed).
    std::vector<std::size_t> choice(V, 0);
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_choice;

    auto type_of = [&](std::size_t v, std::size_t code) { return stable ? static_cast<std::size_t>(fleet.vehicles[v].type) : code / full; };
    auto evaluate = [&]() {
        double cost = 0.0;
        std::size_t covered = 0;
        for (std::size_t v = 0; v < V; ++v) {
            const std::size_t mask = choice[v] % full;
            covered |= mask;
            if (mask) cost += tours.length[mask] * vehicle_cost_per_km(inst, fleet, v, static_cast<int>(type_of(v, choice[v])));
        }
        if (covered != full - 1 || cost >= best - 1e-9) return;
        std::vector<DeliveryVehicle> dv(V);
        for (std::size_t v = 0; v < V; ++v) {
            const std::size_t mask = choice[v] % full;
            if (!mask) continue;
            const int t = static_cast<int>(type_of(v, choice[v]));
            dv[v] = {tours.order[mask], vehicle_capacity(inst, fleet, v, t), vehicle_compatibility(inst, fleet, v, t)};
        }
        if (!assign_deliveries(inst, dv)) return;
        best = cost;
        best_choice = choice;
    };
    const std::size_t codes = stable ? full : full * T;
    auto recurse = [&](auto&& self, std::size_t v) -> void {
        if (v == V) {
            evaluate();
            return;
        }
        const bool same_as_prev = v > 0 && (!stable || fleet.vehicles[v].type == fleet.vehicles[v - 1].type);
        for (std::size_t code = same_as_prev ? choice[v - 1] : 0; code < codes; ++code) {
            // An empty vehicle's type is irrelevant: keep only type 0.
            if (!stable && code % full == 0 && code != 0) continue;
            choice[v] = code;
            self(self, v + 1);
        }
    };
    recurse(recurse, 0);
    if (best_choice.empty()) throw InfeasibleError("no feasible routing for this fleet");

    OracleResult res;
    res.value = best;
    res.solution.vehicles.resize(V);
    for (std::size_t v = 0; v < V; ++v) {
        auto& r = res.solution.vehicles[v];
        const std::size_t mask = best_choice[v] % full;
        r.type = stable ? fleet.vehicles[v].type : (mask ? static_cast<int>(best_choice[v] / full) : -1);
        for (std::size_t loc : tours.order[mask]) r.route.push_back(inst.customers[loc - 1].id);
    }
    fill_deliveries(inst, fleet, res.solution);
    res.solution.objective = objective_of(inst, fleet, res.solution);
    return res;
}

}  // namespace fsmvrp
