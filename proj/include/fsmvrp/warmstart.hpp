#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "common.hpp"
#include "formulations.hpp"
#include "instance.hpp"
#include "solution.hpp"

namespace fsmvrp {

namespace detail {

// Location-indexed working form of a solution.
struct Plan {
    struct Vehicle {
        int type = -1;
        std::vector<std::size_t> route;
    };
    std::vector<Vehicle> vehicles;
};

inline double route_length(const Instance& inst, const std::vector<std::size_t>& route) {
    if (route.empty()) return 0.0;
    double len = inst.dist(0, route.front()) + inst.dist(route.back(), 0);
    for (std::size_t p = 1; p < route.size(); ++p) len += inst.dist(route[p - 1], route[p]);
    return len;
}

inline double plan_cost(const Instance& inst, const Fleet& fleet, const Plan& plan) {
    double total = 0.0;
    for (std::size_t v = 0; v < plan.vehicles.size(); ++v) {
        const auto& pv = plan.vehicles[v];
        if (!pv.route.empty()) total += vehicle_cost_per_km(inst, fleet, v, pv.type) * route_length(inst, pv.route);
    }
    return total;
}

// Cheapest position to insert `loc` into `route` and the added length.
inline std::pair<std::size_t, double> best_insertion(const Instance& inst, const std::vector<std::size_t>& route, std::size_t loc) {
    std::size_t best_pos = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p <= route.size(); ++p) {
        const std::size_t a = p == 0 ? 0 : route[p - 1];
        const std::size_t b = p == route.size() ? 0 : route[p];
        const double delta = inst.dist(a, loc) + inst.dist(loc, b) - inst.dist(a, b);
        if (delta < best - 1e-12) {
            best = delta;
            best_pos = p;
        }
    }
    return {best_pos, best};
}

inline std::vector<DeliveryVehicle> delivery_view(const Instance& inst, const Fleet& fleet, const Plan& plan) {
    std::vector<DeliveryVehicle> dv(plan.vehicles.size());
    for (std::size_t v = 0; v < plan.vehicles.size(); ++v) {
        const auto& pv = plan.vehicles[v];
        if (pv.route.empty()) continue;
        dv[v] = {pv.route, vehicle_capacity(inst, fleet, v, pv.type), vehicle_compatibility(inst, fleet, v, pv.type)};
    }
    return dv;
}

inline RoutingSolution plan_to_solution(const Instance& inst, const Fleet& fleet, const Plan& plan) {
    RoutingSolution sol;
    sol.vehicles.resize(plan.vehicles.size());
    for (std::size_t v = 0; v < plan.vehicles.size(); ++v) {
        const auto& pv = plan.vehicles[v];
        auto& r = sol.vehicles[v];
        r.type = fleet.mode == FleetMode::stable ? fleet.vehicles[v].type : (pv.route.empty() ? -1 : pv.type);
        for (std::size_t loc : pv.route) r.route.push_back(inst.customers[loc - 1].id);
    }
    if (!fill_deliveries(inst, fleet, sol)) throw InfeasibleError("routes cannot serve every demand");
    sol.objective = objective_of(inst, fleet, sol);
    return sol;
}

inline Plan solution_to_plan(const Instance& inst, const Fleet& fleet, const RoutingSolution& sol) {
    if (sol.vehicles.size() != fleet.size()) throw ModelError("solution and fleet sizes differ");
    Plan plan;
    plan.vehicles.resize(sol.vehicles.size());
    for (std::size_t v = 0; v < sol.vehicles.size(); ++v) {
        const auto& r = sol.vehicles[v];
        if (!r.detached.empty()) throw ModelError("solution has a cycle that does not reach the depot");
        plan.vehicles[v].type = fleet.mode == FleetMode::stable ? fleet.vehicles[v].type : r.type;
        for (int id : r.route) plan.vehicles[v].route.push_back(location_of(inst, id));
    }
    return plan;
}

// Commodities ordered by how few vehicle types carry them.
inline std::vector<std::size_t> restrictive_commodity_order(const Instance& inst) {
    std::vector<std::size_t> order(inst.num_commodities());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto carriers = [&](std::size_t k) {
        return std::count_if(inst.vehicle_types.begin(), inst.vehicle_types.end(), [&](const VehicleType& t) { return t.compatible[k]; });
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return carriers(a) < carriers(b); });
    return order;
}

// Every vehicle visits every customer it can serve; used when the greedy
// pass runs out of compatible capacity.
inline Plan visit_everything(const Instance& inst, const Fleet& fleet) {
    Plan plan;
    plan.vehicles.resize(fleet.size());
    int wide = 0;
    for (std::size_t t = 1; t < inst.num_types(); ++t) {
        const auto& a = inst.vehicle_types[t];
        const auto& b = inst.vehicle_types[static_cast<std::size_t>(wide)];
        if (a.compatible_count() > b.compatible_count() || (a.compatible_count() == b.compatible_count() && a.capacity > b.capacity)) {
            wide = static_cast<int>(t);
        }
    }
    for (std::size_t v = 0; v < fleet.size(); ++v) {
        auto& pv = plan.vehicles[v];
        pv.type = fleet.mode == FleetMode::stable ? fleet.vehicles[v].type : wide;
        const auto& comp = vehicle_compatibility(inst, fleet, v, pv.type);
        for (std::size_t i = 1; i < inst.num_locations(); ++i) {
            bool useful = false;
            for (std::size_t k = 0; k < inst.num_commodities(); ++k) useful = useful || (comp[k] && inst.demand(i, k) > 0);
            if (useful) pv.route.insert(pv.route.begin() + static_cast<std::ptrdiff_t>(best_insertion(inst, pv.route, i).first), i);
        }
    }
    return plan;
}

// Drops visits that deliver nothing.
inline void drop_idle_visits(const Instance& inst, const Fleet& fleet, RoutingSolution& sol) {
    for (auto& r : sol.vehicles) {
        std::vector<int> kept;
        for (int id : r.route) {
            auto it = r.deliveries.find(id);
            bool any = false;
            if (it != r.deliveries.end()) {
                for (Quantity q : it->second) any = any || q > 0;
            }
            if (any) {
                kept.push_back(id);
            } else if (it != r.deliveries.end()) {
                r.deliveries.erase(it);
            }
        }
        r.route = std::move(kept);
        if (r.route.empty() && fleet.mode == FleetMode::flexible) r.type = -1;
    }
    sol.objective = objective_of(inst, fleet, sol);
}

}  // namespace detail

// Greedy cheapest insertion: customers by decreasing demand, restrictive
// commodities first; each residual demand goes to the compatible vehicle with
// the lowest insertion cost per unit it can take, splitting when the vehicle
// fills up.
inline RoutingSolution construct_initial(const Instance& inst, const Fleet& fleet, std::uint64_t seed = 0) {
    WorkClock clock;
    const std::size_t V = fleet.size();
    const std::size_t L = inst.num_locations();
    std::vector<std::size_t> customers(L - 1);
    std::iota(customers.begin(), customers.end(), std::size_t{1});
    detail::Draw draw(seed);
    for (std::size_t p = customers.size(); p > 1; --p) std::swap(customers[p - 1], customers[static_cast<std::size_t>(draw.integer(0, static_cast<std::int64_t>(p - 1)))]);
    std::stable_sort(customers.begin(), customers.end(),
                     [&](std::size_t a, std::size_t b) { return inst.customers[a - 1].total_demand() > inst.customers[b - 1].total_demand(); });
    const auto commodity_order = detail::restrictive_commodity_order(inst);

    detail::Plan plan;
    plan.vehicles.resize(V);
    for (std::size_t v = 0; v < V && fleet.mode == FleetMode::stable; ++v) plan.vehicles[v].type = fleet.vehicles[v].type;
    std::vector<Quantity> load(V, 0);
    bool shortfall = false;
    for (std::size_t i : customers) {
        for (std::size_t k : commodity_order) {
            Quantity residual = inst.demand(i, k);
            while (residual > 0) {
                double best_key = std::numeric_limits<double>::infinity();
                std::size_t best_v = V;
                int best_type = -1;
                bool opened_flexible = false;
                auto consider = [&](std::size_t v, int type) {
                    const auto& pv = plan.vehicles[v];
                    if (!vehicle_compatibility(inst, fleet, v, type)[k]) return;
                    const Quantity room = vehicle_capacity(inst, fleet, v, type) - load[v];
                    if (room <= 0) return;
                    const bool visits = std::find(pv.route.begin(), pv.route.end(), i) != pv.route.end();
                    const double delta = visits ? 0.0 : detail::best_insertion(inst, pv.route, i).second;
                    const double key = vehicle_cost_per_km(inst, fleet, v, type) * delta / static_cast<double>(std::min(room, residual));
                    if (key < best_key - 1e-12) {
                        best_key = key;
                        best_v = v;
                        best_type = type;
                    }
                };
                for (std::size_t v = 0; v < V; ++v) {
                    const auto& pv = plan.vehicles[v];
                    if (fleet.mode == FleetMode::stable) {
                        consider(v, pv.type);
                    } else if (pv.type >= 0) {
                        consider(v, pv.type);
                    } else if (!opened_flexible) {
                        // Unopened flexible vehicles are interchangeable: try
                        // the first one with every type.
                        opened_flexible = true;
                        for (std::size_t t = 0; t < inst.num_types(); ++t) consider(v, static_cast<int>(t));
                    }
                }
                if (best_v == V) {
                    shortfall = true;
                    break;
                }
                auto& pv = plan.vehicles[best_v];
                pv.type = best_type;
                if (std::find(pv.route.begin(), pv.route.end(), i) == pv.route.end()) {
                    pv.route.insert(pv.route.begin() + static_cast<std::ptrdiff_t>(detail::best_insertion(inst, pv.route, i).first), i);
                }
                const Quantity amount = std::min(residual, vehicle_capacity(inst, fleet, best_v, best_type) - load[best_v]);
                load[best_v] += amount;
                residual -= amount;
            }
            if (shortfall) break;
        }
        if (shortfall) break;
    }
    RoutingSolution sol;
    if (!shortfall) {
        sol = detail::plan_to_solution(inst, fleet, plan);
    } else {
        detail::Plan wide = detail::visit_everything(inst, fleet);
        auto dv = detail::delivery_view(inst, fleet, wide);
        if (!assign_deliveries(inst, dv)) {
            for (std::size_t k = 0; k < inst.num_commodities(); ++k) {
                Quantity cap = 0;
                for (std::size_t v = 0; v < V; ++v) {
                    if (dv[v].capacity > 0 && dv[v].compatible[k]) cap += dv[v].capacity;
                }
                if (cap < inst.commodity_demand(k)) throw InfeasibleError("capacity shortfall for commodity '" + inst.commodities[k] + "'");
            }
            throw InfeasibleError("capacity shortfall: fleet cannot carry the total demand");
        }
        sol = detail::plan_to_solution(inst, fleet, wide);
        detail::drop_idle_visits(inst, fleet, sol);
    }
    sol.construction_time = clock.elapsed();
    return sol;
}

struct LnsOptions {
    double budget_s = 0.0;
    std::uint64_t seed = 0;
    WorkClock::Mode clock = WorkClock::Mode::wall;
    // Stops after this many destroy/repair rounds even with budget left.
    long max_iterations = std::numeric_limits<long>::max();
};

namespace detail {

// Removal saving of every customer: length saved by dropping it from each
// route that visits it, weighted by the route's cost per km.
inline std::vector<double> removal_savings(const Instance& inst, const Fleet& fleet, const Plan& plan) {
    std::vector<double> saving(inst.num_locations(), 0.0);
    for (std::size_t v = 0; v < plan.vehicles.size(); ++v) {
        const auto& r = plan.vehicles[v].route;
        const double cost = vehicle_cost_per_km(inst, fleet, v, plan.vehicles[v].type);
        for (std::size_t p = 0; p < r.size(); ++p) {
            const std::size_t a = p == 0 ? 0 : r[p - 1];
            const std::size_t b = p + 1 == r.size() ? 0 : r[p + 1];
            saving[r[p]] += cost * (inst.dist(a, r[p]) + inst.dist(r[p], b) - inst.dist(a, b));
        }
    }
    return saving;
}

// Re-inserts `removed` customers one by one. With `whole_first` each goes
// to the cheapest vehicle that can take it whole if there is one; otherwise
// it goes to the cheapest vehicles in turn until the deliveries become
// feasible. Insertion costs are scaled by a random factor in
// [1 - noise, 1 + noise].
inline bool repair(const Instance& inst, const Fleet& fleet, Plan& plan, const std::vector<std::size_t>& removed, WorkClock& clock,
                   Draw& draw, double noise, bool whole_first) {
    struct Option {
        double cost;
        std::size_t vehicle;
        int type;
    };
    std::vector<bool> active(inst.num_locations(), true);
    for (std::size_t c : removed) active[c] = false;
    const std::size_t V = plan.vehicles.size();
    auto feasible = [&] {
        clock.tick(static_cast<std::int64_t>(V));
        return assign_deliveries(inst, delivery_view(inst, fleet, plan), &active).has_value();
    };
    auto insert = [&](std::size_t v, int type, std::size_t c) {
        auto& pv = plan.vehicles[v];
        pv.type = type;
        pv.route.insert(pv.route.begin() + static_cast<std::ptrdiff_t>(best_insertion(inst, pv.route, c).first), c);
    };
    for (std::size_t c : removed) {
        active[c] = true;
        if (feasible()) continue;
        std::vector<bool> tried(V, false);
        auto options = [&] {
            std::vector<Option> out;
            bool fresh_seen = false;
            for (std::size_t v = 0; v < V; ++v) {
                if (tried[v]) continue;
                const auto& pv = plan.vehicles[v];
                std::vector<int> types;
                if (fleet.mode == FleetMode::stable || pv.type >= 0) {
                    types.push_back(pv.type);
                } else if (!fresh_seen) {
                    fresh_seen = true;
                    for (std::size_t t = 0; t < inst.num_types(); ++t) types.push_back(static_cast<int>(t));
                } else {
                    continue;
                }
                for (int t : types) {
                    const auto& comp = vehicle_compatibility(inst, fleet, v, t);
                    bool useful = false;
                    for (std::size_t k = 0; k < inst.num_commodities(); ++k) useful = useful || (comp[k] && inst.demand(c, k) > 0);
                    if (!useful) continue;
                    const double scale = 1.0 + noise * (2.0 * draw.uniform() - 1.0);
                    out.push_back({scale * vehicle_cost_per_km(inst, fleet, v, t) * best_insertion(inst, pv.route, c).second, v, t});
                }
            }
            std::stable_sort(out.begin(), out.end(), [](const Option& x, const Option& y) { return x.cost < y.cost; });
            return out;
        };
        bool placed = false;
        for (const auto& o : whole_first ? options() : std::vector<Option>{}) {
            const Plan::Vehicle saved = plan.vehicles[o.vehicle];
            insert(o.vehicle, o.type, c);
            if (feasible()) {
                placed = true;
                break;
            }
            plan.vehicles[o.vehicle] = saved;
        }
        while (!placed) {
            const auto list = options();
            if (list.empty()) return false;
            tried[list.front().vehicle] = true;
            insert(list.front().vehicle, list.front().type, c);
            placed = feasible();
        }
    }
    return true;
}

// Reorders `route` into its shortest closed tour from the depot: exact for
// short routes, 2-opt otherwise.
inline void optimize_route(const Instance& inst, std::vector<std::size_t>& route) {
    const std::size_t n = route.size();
    if (n < 3) return;
    constexpr std::size_t kExactLimit = 10;
    if (n <= kExactLimit) {
        const std::size_t full = (std::size_t{1} << n) - 1;
        const double inf = std::numeric_limits<double>::infinity();
        std::vector<double> dp((full + 1) * n, inf);
        std::vector<std::uint8_t> prev((full + 1) * n, 0);
        for (std::size_t a = 0; a < n; ++a) dp[(std::size_t{1} << a) * n + a] = inst.dist(0, route[a]);
        for (std::size_t mask = 1; mask <= full; ++mask) {
            for (std::size_t last = 0; last < n; ++last) {
                const double here = dp[mask * n + last];
                if (!(mask >> last & 1U) || here == inf) continue;
                for (std::size_t next = 0; next < n; ++next) {
                    if (mask >> next & 1U) continue;
                    const std::size_t to = (mask | std::size_t{1} << next) * n + next;
                    const double len = here + inst.dist(route[last], route[next]);
                    if (len < dp[to]) {
                        dp[to] = len;
                        prev[to] = static_cast<std::uint8_t>(last);
                    }
                }
            }
        }
        std::size_t last = 0;
        double best = inf;
        for (std::size_t a = 0; a < n; ++a) {
            const double len = dp[full * n + a] + inst.dist(route[a], 0);
            if (len < best - 1e-12) {
                best = len;
                last = a;
            }
        }
        if (best >= route_length(inst, route) - 1e-9) return;
        std::vector<std::size_t> tour(n);
        std::size_t mask = full;
        for (std::size_t p = n; p-- > 0;) {
            tour[p] = route[last];
            const std::size_t before = prev[mask * n + last];
            mask &= ~(std::size_t{1} << last);
            last = before;
        }
        route = std::move(tour);
        return;
    }
    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t a = 0; a + 1 < n; ++a) {
            for (std::size_t b = a + 1; b < n; ++b) {
                const std::size_t pa = a == 0 ? 0 : route[a - 1];
                const std::size_t nb = b + 1 == n ? 0 : route[b + 1];
                const double delta = inst.dist(pa, route[b]) + inst.dist(route[a], nb) - inst.dist(pa, route[a]) - inst.dist(route[b], nb);
                if (delta < -1e-9) {
                    std::reverse(route.begin() + static_cast<std::ptrdiff_t>(a), route.begin() + static_cast<std::ptrdiff_t>(b + 1));
                    improved = true;
                }
            }
        }
    }
}

// Removes visits that the delivery assignment leaves empty, then re-sequences
// every route.
inline void polish(const Instance& inst, const Fleet& fleet, Plan& plan) {
    if (auto y = assign_deliveries(inst, delivery_view(inst, fleet, plan))) {
        for (std::size_t v = 0; v < plan.vehicles.size(); ++v) {
            auto& pv = plan.vehicles[v];
            std::erase_if(pv.route, [&](std::size_t loc) {
                const auto& q = (*y)[v][loc];
                return std::all_of(q.begin(), q.end(), [](Quantity x) { return x == 0; });
            });
            if (pv.route.empty() && fleet.mode == FleetMode::flexible) pv.type = -1;
        }
    }
    for (auto& pv : plan.vehicles) optimize_route(inst, pv.route);
}

}  // namespace detail

// Destroy-and-repair search with record-to-record acceptance; returns the
// best plan found, or `start` when nothing strictly better turned up. The destroy
// step removes customers chosen at random, by largest removal saving, as a
// whole route or as a segment of one route; repair re-inserts them greedily with splitting.
inline RoutingSolution lns_improve(const Instance& inst, const Fleet& fleet, const RoutingSolution& start, const LnsOptions& options) {
    if (options.budget_s <= 0.0 || options.max_iterations <= 0) return start;
    WorkClock clock(options.clock);
    const Deadline deadline(clock, options.budget_s);
    detail::Draw draw(options.seed);
    const std::size_t n = inst.num_customers();
    detail::Plan best = detail::solution_to_plan(inst, fleet, start);
    double best_cost = detail::plan_cost(inst, fleet, best);
    bool improved = false;
    {
        detail::Plan polished = best;
        detail::polish(inst, fleet, polished);
        const double cost = detail::plan_cost(inst, fleet, polished);
        if (cost < best_cost - 1e-9) {
            best = std::move(polished);
            best_cost = cost;
            improved = true;
        }
    }
    // Trials within this fraction of the best cost become the new current plan.
    constexpr double kAcceptance = 0.03;
    detail::Plan current = best;
    // Non-improving rounds before the search returns to the best plan.
    constexpr long kRestartAfter = 2000;
    long last_improvement = 0;
    for (long iter = 0; iter < options.max_iterations && !deadline.expired(); ++iter) {
        clock.tick(1);
        if (iter - last_improvement > kRestartAfter && iter % kRestartAfter == 0) current = best;
        const std::size_t q = static_cast<std::size_t>(draw.integer(1, static_cast<std::int64_t>(std::max<std::size_t>(1, n / 2))));
        std::vector<std::size_t> removed;
        switch (draw.integer(0, 3)) {
            case 0: {
                std::vector<std::size_t> pool(n);
                std::iota(pool.begin(), pool.end(), std::size_t{1});
                for (std::size_t p = 0; p < q; ++p) {
                    const auto pick = static_cast<std::size_t>(draw.integer(static_cast<std::int64_t>(p), static_cast<std::int64_t>(n - 1)));
                    std::swap(pool[p], pool[pick]);
                    removed.push_back(pool[p]);
                }
                break;
            }
            case 1: {
                const auto saving = detail::removal_savings(inst, fleet, current);
                std::vector<std::size_t> pool(n);
                std::iota(pool.begin(), pool.end(), std::size_t{1});
                std::stable_sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) { return saving[a] > saving[b]; });
                // Skip a random number of the top entries to vary the choice.
                const auto skip = static_cast<std::size_t>(draw.integer(0, static_cast<std::int64_t>(n - q)));
                removed.assign(pool.begin() + static_cast<std::ptrdiff_t>(skip), pool.begin() + static_cast<std::ptrdiff_t>(skip + q));
                break;
            }
            case 2: {
                std::vector<std::size_t> used;
                for (std::size_t v = 0; v < current.vehicles.size(); ++v) {
                    if (!current.vehicles[v].route.empty()) used.push_back(v);
                }
                if (used.empty()) break;
                removed = current.vehicles[used[static_cast<std::size_t>(draw.integer(0, static_cast<std::int64_t>(used.size() - 1)))]].route;
                break;
            }
            default: {
                std::vector<std::size_t> used;
                for (std::size_t v = 0; v < current.vehicles.size(); ++v) {
                    if (!current.vehicles[v].route.empty()) used.push_back(v);
                }
                if (used.empty()) break;
                const auto& r = current.vehicles[used[static_cast<std::size_t>(draw.integer(0, static_cast<std::int64_t>(used.size() - 1)))]].route;
                const auto from = static_cast<std::size_t>(draw.integer(0, static_cast<std::int64_t>(r.size() - 1)));
                for (std::size_t p = from; p < r.size() && removed.size() < q; ++p) removed.push_back(r[p]);
                break;
            }
        }
        if (removed.empty()) continue;
        detail::Plan trial = current;
        for (auto& pv : trial.vehicles) {
            std::erase_if(pv.route, [&](std::size_t loc) { return std::find(removed.begin(), removed.end(), loc) != removed.end(); });
            if (pv.route.empty() && fleet.mode == FleetMode::flexible) pv.type = -1;
        }
        std::stable_sort(removed.begin(), removed.end(),
                         [&](std::size_t a, std::size_t b) { return inst.customers[a - 1].total_demand() > inst.customers[b - 1].total_demand(); });
        const double noise = draw.uniform() < 0.5 ? 0.0 : 0.3;
        const bool whole_first = draw.uniform() < 0.5;
        if (!detail::repair(inst, fleet, trial, removed, clock, draw, noise, whole_first)) continue;
        detail::polish(inst, fleet, trial);
        const double cost = detail::plan_cost(inst, fleet, trial);
        if (cost < best_cost - 1e-9) {
            best = trial;
            best_cost = cost;
            improved = true;
            last_improvement = iter;
        }
        if (cost < best_cost * (1.0 + kAcceptance)) current = std::move(trial);
    }
    if (!improved) return start;
    RoutingSolution out = detail::plan_to_solution(inst, fleet, best);
    out.construction_time = start.construction_time;
    return out;
}

// Permutes vehicles into the canonical order the ordering families expect and
// writes the solution as a model point. Throws ModelError naming the rows the
// point still violates.
inline Assignment encode_start(const BuiltModel& built, const RoutingSolution& solution) {
    const auto& cat = *built.catalog;
    const auto& inst = built.instance;
    const auto& fleet = built.fleet;
    const std::size_t V = cat.vehicles();
    const std::size_t L = cat.locations();
    const std::size_t K = cat.commodities();
    if (solution.vehicles.size() != V) throw ModelError("solution has " + std::to_string(solution.vehicles.size()) + " vehicles, model has " + std::to_string(V));
    const bool flexible = fleet.mode == FleetMode::flexible;

    std::vector<std::size_t> first_visit(V, L);
    for (std::size_t v = 0; v < V; ++v) {
        const auto& r = solution.vehicles[v];
        if (!r.detached.empty()) throw ModelError("solution has a cycle that does not reach the depot");
        if (!flexible && r.type != fleet.vehicles[v].type) throw ModelError("vehicle " + std::to_string(v) + " type differs from its pool");
        if (flexible && r.used() && (r.type < 0 || static_cast<std::size_t>(r.type) >= inst.num_types())) {
            throw ModelError("vehicle " + std::to_string(v) + " is used without a type");
        }
        for (int id : r.route) first_visit[v] = std::min(first_visit[v], location_of(inst, id));
    }
    const int last_type = static_cast<int>(inst.num_types()) - 1;
    auto sort_key = [&](std::size_t v) {
        const auto& r = solution.vehicles[v];
        return std::tuple(r.used() ? 0 : 1, flexible ? (r.used() ? r.type : last_type) : 0, first_visit[v], v);
    };
    // slot -> solution vehicle
    std::vector<std::size_t> order(V);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (!flexible) {
        std::size_t begin = 0;
        while (begin < V) {
            std::size_t end = begin;
            while (end < V && fleet.vehicles[end].type == fleet.vehicles[begin].type) ++end;
            std::sort(order.begin() + static_cast<std::ptrdiff_t>(begin), order.begin() + static_cast<std::ptrdiff_t>(end),
                      [&](std::size_t a, std::size_t b) { return sort_key(a) < sort_key(b); });
            begin = end;
        }
    } else {
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sort_key(a) < sort_key(b); });
        if (built.vehicle0_reserved && built.farthest > 0) {
            const int far_id = inst.customers[static_cast<std::size_t>(built.farthest) - 1].id;
            auto it = std::find_if(order.begin(), order.end(), [&](std::size_t v) {
                const auto& route = solution.vehicles[v].route;
                return std::find(route.begin(), route.end(), far_id) != route.end();
            });
            if (it != order.end()) std::rotate(order.begin(), it, it + 1);
        }
    }

    Assignment a;
    a.values.assign(built.model.num_variables(), 0.0);
    for (std::size_t slot = 0; slot < V; ++slot) {
        const auto& r = solution.vehicles[order[slot]];
        const int type = flexible ? (r.used() ? r.type : last_type) : fleet.vehicles[slot].type;
        const std::size_t layer = flexible ? static_cast<std::size_t>(type) : 0;
        if (flexible) a[cat.z(slot, layer)] = 1.0;
        a[cat.u(slot)] = r.used() ? 0.0 : 1.0;
        if (!r.used()) continue;

        std::vector<std::size_t> stops{0};
        for (int id : r.route) stops.push_back(location_of(inst, id));
        stops.push_back(0);
        for (std::size_t p = 0; p + 1 < stops.size(); ++p) a[cat.x(slot, layer, stops[p], stops[p + 1])] = 1.0;

        std::vector<std::vector<double>> delivered(L, std::vector<double>(K, 0.0));
        for (const auto& [id, q] : r.deliveries) {
            const std::size_t i = location_of(inst, id);
            for (std::size_t k = 0; k < K && k < q.size(); ++k) {
                if (q[k] == 0) continue;
                if (cat.y(slot, i, k) < 0) throw ModelError("vehicle " + std::to_string(order[slot]) + " cannot carry '" + inst.commodities[k] + "'");
                a[cat.y(slot, i, k)] = static_cast<double>(q[k]);
                delivered[i][k] = static_cast<double>(q[k]);
            }
        }
        if (cat.routing_mode() != RoutingMode::commodity) continue;

        // Loads by prefix sums; with the total-load rows the vehicle leaves
        // full and brings the surplus back.
        std::vector<double> carried(K, 0.0);
        for (std::size_t p = 1; p + 1 < stops.size(); ++p) {
            for (std::size_t k = 0; k < K; ++k) carried[k] += delivered[stops[p]][k];
        }
        if (built.has("total_load")) {
            const auto& comp = vehicle_compatibility(inst, fleet, slot, type);
            const double total = std::accumulate(carried.begin(), carried.end(), 0.0);
            const auto spare = static_cast<std::size_t>(std::find(comp.begin(), comp.end(), true) - comp.begin());
            carried[spare] += static_cast<double>(vehicle_capacity(inst, fleet, slot, type)) - total;
        }
        for (std::size_t p = 0; p + 1 < stops.size(); ++p) {
            if (p > 0) {
                for (std::size_t k = 0; k < K; ++k) carried[k] -= delivered[stops[p]][k];
            }
            for (std::size_t k = 0; k < K; ++k) {
                const int f = cat.f(slot, k, stops[p], stops[p + 1]);
                if (carried[k] != 0.0 && f < 0) throw ModelError("vehicle " + std::to_string(order[slot]) + " cannot carry '" + inst.commodities[k] + "'");
                if (f >= 0) a[f] = carried[k];
            }
        }
    }

    auto bad = built.model.violations(a.values, 1e-6);
    if (!bad.empty()) {
        std::string list;
        for (std::size_t i = 0; i < bad.size() && i < 5; ++i) list += (i ? ", " : "") + bad[i];
        throw ModelError("encoded start violates " + list);
    }
    return a;
}

}  // namespace fsmvrp
