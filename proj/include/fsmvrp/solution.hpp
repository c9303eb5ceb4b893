#pragma once

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"
#include "instance.hpp"

namespace fsmvrp {

// One vehicle's answer. `route` lists customer ids between the implicit depot
// departure and return. `detached` holds cycles that never reach the depot;
// a valid solution has none, but decoded MIP points keep them so the checker
// can see them.
struct VehicleRoute {
    // Vehicle type index; -1 for an unused flexible vehicle.
    int type = -1;
    std::vector<int> route;
    std::vector<std::vector<int>> detached;
    // Customer id -> quantity per commodity.
    std::map<int, std::vector<Quantity>> deliveries;

    bool used() const { return !route.empty() || !detached.empty(); }

    friend bool operator==(const VehicleRoute&, const VehicleRoute&) = default;
};

struct RoutingSolution {
    std::vector<VehicleRoute> vehicles;
    double objective = 0.0;
    double construction_time = 0.0;

    std::size_t used_vehicles() const {
        return static_cast<std::size_t>(std::count_if(vehicles.begin(), vehicles.end(), [](const VehicleRoute& r) { return r.used(); }));
    }
};

inline double vehicle_cost_per_km(const Instance& inst, const Fleet& fleet, std::size_t v, int type) {
    if (fleet.mode == FleetMode::stable) return fleet.vehicles.at(v).cost_per_km;
    if (type < 0 || static_cast<std::size_t>(type) >= inst.num_types()) return 0.0;
    return inst.vehicle_types[static_cast<std::size_t>(type)].cost_per_km;
}

inline Quantity vehicle_capacity(const Instance& inst, const Fleet& fleet, std::size_t v, int type) {
    if (fleet.mode == FleetMode::stable) return fleet.vehicles.at(v).capacity;
    if (type < 0 || static_cast<std::size_t>(type) >= inst.num_types()) return 0;
    return inst.vehicle_types[static_cast<std::size_t>(type)].capacity;
}

inline const std::vector<bool>& vehicle_compatibility(const Instance& inst, const Fleet& fleet, std::size_t v, int type) {
    static const std::vector<bool> none;
    if (fleet.mode == FleetMode::stable) return fleet.vehicles.at(v).compatible;
    if (type < 0 || static_cast<std::size_t>(type) >= inst.num_types()) return none;
    return inst.vehicle_types[static_cast<std::size_t>(type)].compatible;
}

// Location index of a customer id; throws InstanceError for unknown ids.
inline std::size_t location_of(const Instance& inst, int id) {
    const int idx = inst.index_of_customer(id);
    if (idx < 0) throw InstanceError("unknown customer id " + std::to_string(id));
    return static_cast<std::size_t>(idx);
}

inline double cycle_length(const Instance& inst, const std::vector<int>& ids, bool through_depot) {
    if (ids.empty()) return 0.0;
    double len = 0.0;
    std::size_t prev = through_depot ? 0 : location_of(inst, ids.back());
    for (int id : ids) {
        const std::size_t loc = location_of(inst, id);
        len += inst.dist(prev, loc);
        prev = loc;
    }
    if (through_depot) len += inst.dist(prev, 0);
    return len;
}

// Routing cost: sum over travelled arcs of cost per km times distance.
inline double objective_of(const Instance& inst, const Fleet& fleet, const RoutingSolution& sol) {
    double total = 0.0;
    for (std::size_t v = 0; v < sol.vehicles.size(); ++v) {
        const auto& r = sol.vehicles[v];
        double len = cycle_length(inst, r.route, true);
        for (const auto& c : r.detached) len += cycle_length(inst, c, false);
        if (len > 0.0) total += vehicle_cost_per_km(inst, fleet, v, r.type) * len;
    }
    return total;
}

// Dinic max-flow on integer capacities.
class MaxFlow {
public:
    explicit MaxFlow(std::size_t nodes) : adj_(nodes), level_(nodes), next_(nodes) {}

    std::size_t add_edge(std::size_t from, std::size_t to, Quantity cap) {
        adj_[from].push_back(edges_.size());
        edges_.push_back({to, cap, 0});
        adj_[to].push_back(edges_.size());
        edges_.push_back({from, 0, 0});
        return edges_.size() - 2;
    }

    Quantity run(std::size_t source, std::size_t sink) {
        Quantity total = 0;
        while (bfs(source, sink)) {
            std::fill(next_.begin(), next_.end(), 0);
            while (Quantity pushed = dfs(source, sink, std::numeric_limits<Quantity>::max())) total += pushed;
        }
        return total;
    }

    Quantity flow(std::size_t edge) const { return edges_[edge].flow; }

private:
    struct Edge {
        std::size_t to;
        Quantity cap;
        Quantity flow;
    };

    bool bfs(std::size_t s, std::size_t t) {
        std::fill(level_.begin(), level_.end(), -1);
        std::queue<std::size_t> q;
        level_[s] = 0;
        q.push(s);
        while (!q.empty()) {
            const std::size_t a = q.front();
            q.pop();
            for (std::size_t e : adj_[a]) {
                const auto& ed = edges_[e];
                if (ed.cap - ed.flow > 0 && level_[ed.to] < 0) {
                    level_[ed.to] = level_[a] + 1;
                    q.push(ed.to);
                }
            }
        }
        return level_[t] >= 0;
    }

    Quantity dfs(std::size_t a, std::size_t t, Quantity limit) {
        if (a == t) return limit;
        for (; next_[a] < adj_[a].size(); ++next_[a]) {
            const std::size_t e = adj_[a][next_[a]];
            auto& ed = edges_[e];
            if (ed.cap - ed.flow <= 0 || level_[ed.to] != level_[a] + 1) continue;
            if (Quantity got = dfs(ed.to, t, std::min(limit, ed.cap - ed.flow))) {
                ed.flow += got;
                edges_[e ^ 1].flow -= got;
                return got;
            }
        }
        return 0;
    }

    std::vector<std::vector<std::size_t>> adj_;
    std::vector<Edge> edges_;
    std::vector<int> level_;
    std::vector<std::size_t> next_;
};

// Vehicle-side data for delivery assignment: which locations it visits, its
// capacity and compatible commodities.
struct DeliveryVehicle {
    std::vector<std::size_t> visits;
    Quantity capacity = 0;
    std::vector<bool> compatible;
};

// Integral deliveries serving every demand through the given visits, or
// nullopt when none exist. Result is indexed [vehicle][location][commodity].
// When `active` is given only the marked locations need serving.
inline std::optional<std::vector<std::vector<std::vector<Quantity>>>> assign_deliveries(const Instance& inst,
                                                                                        const std::vector<DeliveryVehicle>& vehicles,
                                                                                        const std::vector<bool>* active = nullptr) {
    const std::size_t L = inst.num_locations();
    const std::size_t K = inst.num_commodities();
    const std::size_t V = vehicles.size();
    // Nodes: source, sink, one per (location, commodity), one per vehicle.
    const std::size_t source = 0, sink = 1, demand_base = 2, vehicle_base = demand_base + L * K;
    MaxFlow net(vehicle_base + V);
    Quantity needed = 0;
    for (std::size_t i = 1; i < L; ++i) {
        if (active && !(*active)[i]) continue;
        for (std::size_t k = 0; k < K; ++k) {
            const Quantity d = inst.demand(i, k);
            if (d > 0) net.add_edge(source, demand_base + i * K + k, d);
            needed += d;
        }
    }
    struct Link {
        std::size_t v, i, k, edge;
    };
    std::vector<Link> links;
    for (std::size_t v = 0; v < V; ++v) {
        const auto& dv = vehicles[v];
        if (dv.capacity <= 0) continue;
        net.add_edge(vehicle_base + v, sink, dv.capacity);
        std::vector<std::size_t> visits = dv.visits;
        std::sort(visits.begin(), visits.end());
        visits.erase(std::unique(visits.begin(), visits.end()), visits.end());
        for (std::size_t i : visits) {
            if (i == 0 || (active && !(*active)[i])) continue;
            for (std::size_t k = 0; k < K; ++k) {
                if (inst.demand(i, k) > 0 && k < dv.compatible.size() && dv.compatible[k]) {
                    links.push_back({v, i, k, net.add_edge(demand_base + i * K + k, vehicle_base + v, inst.demand(i, k))});
                }
            }
        }
    }
    if (net.run(source, sink) != needed) return std::nullopt;
    std::vector<std::vector<std::vector<Quantity>>> y(V, std::vector<std::vector<Quantity>>(L, std::vector<Quantity>(K, 0)));
    for (const auto& l : links) y[l.v][l.i][l.k] = net.flow(l.edge);
    return y;
}

// Fills every vehicle's deliveries from its route; returns false when the
// routes cannot serve all demand.
inline bool fill_deliveries(const Instance& inst, const Fleet& fleet, RoutingSolution& sol) {
    std::vector<DeliveryVehicle> dv(sol.vehicles.size());
    for (std::size_t v = 0; v < sol.vehicles.size(); ++v) {
        const auto& r = sol.vehicles[v];
        for (int id : r.route) dv[v].visits.push_back(location_of(inst, id));
        if (r.used()) {
            dv[v].capacity = vehicle_capacity(inst, fleet, v, r.type);
            dv[v].compatible = vehicle_compatibility(inst, fleet, v, r.type);
        }
    }
    auto y = assign_deliveries(inst, dv);
    if (!y) return false;
    for (std::size_t v = 0; v < sol.vehicles.size(); ++v) {
        auto& r = sol.vehicles[v];
        r.deliveries.clear();
        for (int id : r.route) r.deliveries[id] = (*y)[v][location_of(inst, id)];
    }
    return true;
}

// ---------------------------------------------------------------------------
// Documents

inline nlohmann::json to_json_document(const Instance& inst, const RoutingSolution& sol) {
    nlohmann::json doc;
    doc["objective"] = sol.objective;
    doc["vehicles"] = nlohmann::json::array();
    for (const auto& r : sol.vehicles) {
        nlohmann::json v;
        v["type"] = r.type >= 0 ? nlohmann::json(inst.vehicle_types.at(static_cast<std::size_t>(r.type)).id) : nlohmann::json(nullptr);
        v["route"] = r.route;
        if (!r.detached.empty()) v["detached"] = r.detached;
        nlohmann::json del = nlohmann::json::object();
        for (const auto& [id, q] : r.deliveries) {
            nlohmann::json per = nlohmann::json::object();
            for (std::size_t k = 0; k < q.size(); ++k) {
                if (q[k] != 0) per[inst.commodities[k]] = q[k];
            }
            del[std::to_string(id)] = per;
        }
        v["deliveries"] = del;
        doc["vehicles"].push_back(std::move(v));
    }
    return doc;
}

inline std::string save_solution(const Instance& inst, const RoutingSolution& sol) { return to_json_document(inst, sol).dump(2) + "\n"; }

inline RoutingSolution load_solution(const Instance& inst, const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InstanceError(std::string("solution document is not valid JSON: ") + e.what());
    }
    RoutingSolution sol;
    if (doc.contains("objective") && doc["objective"].is_number()) sol.objective = doc["objective"].get<double>();
    if (!doc.contains("vehicles") || !doc["vehicles"].is_array()) throw InstanceError("solution needs a vehicles array");
    try {
        for (const auto& v : doc["vehicles"]) {
            VehicleRoute r;
            if (v.contains("type") && !v["type"].is_null()) {
                r.type = inst.type_index(v["type"].get<std::string>());
                if (r.type < 0) throw InstanceError("unknown vehicle type '" + v["type"].get<std::string>() + "'");
            }
            if (v.contains("route")) r.route = v["route"].get<std::vector<int>>();
            if (v.contains("detached")) r.detached = v["detached"].get<std::vector<std::vector<int>>>();
            if (v.contains("deliveries")) {
                for (const auto& [key, per] : v["deliveries"].items()) {
                    std::vector<Quantity> q(inst.num_commodities(), 0);
                    for (const auto& [name, amount] : per.items()) {
                        const int k = inst.commodity_index(name);
                        if (k < 0) throw InstanceError("unknown commodity '" + name + "' in solution");
                        q[static_cast<std::size_t>(k)] = amount.get<Quantity>();
                    }
                    r.deliveries[std::stoi(key)] = std::move(q);
                }
            }
            sol.vehicles.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception& e) {
        throw InstanceError(std::string("malformed solution document: ") + e.what());
    }
    return sol;
}

inline RoutingSolution load_solution_file(const Instance& inst, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InstanceError("cannot open solution file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return load_solution(inst, buffer.str());
}

}  // namespace fsmvrp
