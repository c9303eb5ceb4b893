#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"

namespace fsmvrp {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

struct Customer {
    int id = 0;
    Point location;
    // Indexed like Instance::commodities.
    std::vector<Quantity> demand;

    Quantity total_demand() const { return std::accumulate(demand.begin(), demand.end(), Quantity{0}); }

    friend bool operator==(const Customer&, const Customer&) = default;
};

struct VehicleType {
    std::string id;
    Quantity capacity = 0;
    double cost_per_km = 0.0;
    // Indexed like Instance::commodities.
    std::vector<bool> compatible;

    std::size_t compatible_count() const {
        return static_cast<std::size_t>(std::count(compatible.begin(), compatible.end(), true));
    }

    friend bool operator==(const VehicleType&, const VehicleType&) = default;
};

enum class FleetMode { stable, flexible };

inline std::string to_string(FleetMode mode) { return mode == FleetMode::stable ? "stable" : "flexible"; }

// Optional fleet composition carried by an instance document.
struct FleetSpec {
    FleetMode mode = FleetMode::stable;
    // Stable: pool size per vehicle type index.
    std::vector<int> counts;
    // Flexible: number of untyped vehicles.
    int vehicles = 0;

    friend bool operator==(const FleetSpec&, const FleetSpec&) = default;
};

// A problem instance. Location index 0 is the depot and index i >= 1 is
// customers[i - 1]; customer ids are labels that survive re-indexing.
class Instance {
public:
    std::string name;
    int quantity_scale = 1;
    Point depot;
    std::vector<Customer> customers;
    std::vector<std::string> commodities;
    std::vector<VehicleType> vehicle_types;
    std::optional<FleetSpec> fleet;

    std::size_t num_customers() const { return customers.size(); }
    std::size_t num_locations() const { return customers.size() + 1; }
    std::size_t num_commodities() const { return commodities.size(); }
    std::size_t num_types() const { return vehicle_types.size(); }

    double dist(std::size_t i, std::size_t j) const { return dist_[i * num_locations() + j]; }
    bool has_explicit_distances() const { return explicit_distances_; }

    Quantity demand(std::size_t location, std::size_t commodity) const {
        return customers[location - 1].demand[commodity];
    }
    Quantity total_demand(std::size_t location) const { return customers[location - 1].total_demand(); }
    Quantity commodity_demand(std::size_t commodity) const {
        Quantity total = 0;
        for (const auto& c : customers) total += c.demand[commodity];
        return total;
    }
    Quantity overall_demand() const {
        Quantity total = 0;
        for (const auto& c : customers) total += c.total_demand();
        return total;
    }

    Point location(std::size_t i) const { return i == 0 ? depot : customers[i - 1].location; }

    // Location index of a customer id, or -1.
    int index_of_customer(int id) const {
        for (std::size_t i = 0; i < customers.size(); ++i) {
            if (customers[i].id == id) return static_cast<int>(i + 1);
        }
        return -1;
    }

    int commodity_index(const std::string& name) const {
        auto it = std::find(commodities.begin(), commodities.end(), name);
        return it == commodities.end() ? -1 : static_cast<int>(it - commodities.begin());
    }

    int type_index(const std::string& id) const {
        for (std::size_t t = 0; t < vehicle_types.size(); ++t) {
            if (vehicle_types[t].id == id) return static_cast<int>(t);
        }
        return -1;
    }

    Quantity max_capacity() const {
        Quantity best = 0;
        for (const auto& t : vehicle_types) best = std::max(best, t.capacity);
        return best;
    }
    Quantity min_capacity() const {
        Quantity best = std::numeric_limits<Quantity>::max();
        for (const auto& t : vehicle_types) best = std::min(best, t.capacity);
        return best;
    }

    // Recomputes Euclidean distances from coordinates.
    void compute_euclidean_distances() {
        const std::size_t n = num_locations();
        dist_.assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                const Point a = location(i);
                const Point b = location(j);
                dist_[i * n + j] = std::hypot(a.x - b.x, a.y - b.y);
            }
        }
        explicit_distances_ = false;
    }

    void set_distances(std::vector<double> matrix) {
        const std::size_t n = num_locations();
        if (matrix.size() != n * n) throw InstanceError("distance matrix has wrong size");
        dist_ = std::move(matrix);
        explicit_distances_ = true;
    }

    const std::vector<double>& distance_matrix() const { return dist_; }

    // Checks every structural invariant; throws InstanceError on the first
    // violation.
    void validate() const {
        const std::size_t k_count = commodities.size();
        if (k_count == 0) throw InstanceError("instance has no commodities");
        if (vehicle_types.empty()) throw InstanceError("instance has no vehicle types");
        if (quantity_scale <= 0) throw InstanceError("quantity_scale must be positive");
        for (const auto& t : vehicle_types) {
            if (t.capacity <= 0) throw InstanceError("vehicle type '" + t.id + "' has non-positive capacity");
            if (!(t.cost_per_km > 0.0)) throw InstanceError("vehicle type '" + t.id + "' has non-positive cost");
            if (t.compatible.size() != k_count) throw InstanceError("vehicle type '" + t.id + "' compatibility size mismatch");
            if (t.compatible_count() == 0) throw InstanceError("vehicle type '" + t.id + "' carries no commodity");
        }
        std::vector<int> seen_ids;
        for (const auto& c : customers) {
            if (c.demand.size() != k_count) throw InstanceError("customer " + std::to_string(c.id) + " demand size mismatch");
            for (Quantity q : c.demand) {
                if (q < 0) throw InstanceError("customer " + std::to_string(c.id) + " has negative demand");
            }
            if (c.total_demand() <= 0) throw InstanceError("customer " + std::to_string(c.id) + " has zero demand");
            if (c.id <= 0) throw InstanceError("customer ids must be positive");
            seen_ids.push_back(c.id);
        }
        std::sort(seen_ids.begin(), seen_ids.end());
        if (std::adjacent_find(seen_ids.begin(), seen_ids.end()) != seen_ids.end()) {
            throw InstanceError("duplicate customer id");
        }
        for (std::size_t k = 0; k < k_count; ++k) {
            if (commodity_demand(k) == 0) continue;
            bool carried = false;
            for (const auto& t : vehicle_types) carried = carried || t.compatible[k];
            if (!carried) throw InstanceError("commodity '" + commodities[k] + "' has demand but no compatible vehicle type");
        }
        const std::size_t n = num_locations();
        if (dist_.size() != n * n) throw InstanceError("distance matrix not initialised");
        for (std::size_t i = 0; i < n; ++i) {
            if (dist(i, i) != 0.0) throw InstanceError("distance matrix diagonal must be zero");
            for (std::size_t j = 0; j < n; ++j) {
                if (dist(i, j) < 0.0 || !std::isfinite(dist(i, j))) throw InstanceError("distances must be finite and nonnegative");
                if (dist(i, j) != dist(j, i)) throw InstanceError("distance matrix must be symmetric");
            }
        }
        if (fleet) {
            if (fleet->mode == FleetMode::stable) {
                if (fleet->counts.size() != vehicle_types.size()) throw InstanceError("fleet counts must cover every vehicle type");
                for (int c : fleet->counts) {
                    if (c < 0) throw InstanceError("fleet counts must be nonnegative");
                }
            } else if (fleet->vehicles < 0) {
                throw InstanceError("flexible fleet size must be nonnegative");
            }
        }
    }

    friend bool operator==(const Instance& a, const Instance& b) {
        return a.name == b.name && a.quantity_scale == b.quantity_scale && a.depot == b.depot &&
               a.customers == b.customers && a.commodities == b.commodities &&
               a.vehicle_types == b.vehicle_types && a.fleet == b.fleet && a.dist_ == b.dist_ &&
               a.explicit_distances_ == b.explicit_distances_;
    }

private:
    std::vector<double> dist_;
    bool explicit_distances_ = false;
};

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json to_json_document(const Instance& inst) {
    using nlohmann::json;
    json doc;
    doc["name"] = inst.name;
    doc["quantity_scale"] = inst.quantity_scale;
    doc["depot"] = {{"x", inst.depot.x}, {"y", inst.depot.y}};
    doc["commodities"] = inst.commodities;
    json customers = json::array();
    for (const auto& c : inst.customers) {
        json demand = json::object();
        for (std::size_t k = 0; k < inst.commodities.size(); ++k) demand[inst.commodities[k]] = c.demand[k];
        customers.push_back({{"id", c.id}, {"x", c.location.x}, {"y", c.location.y}, {"demand", demand}});
    }
    doc["customers"] = customers;
    json types = json::array();
    for (const auto& t : inst.vehicle_types) {
        json compatible = json::array();
        for (std::size_t k = 0; k < inst.commodities.size(); ++k) {
            if (t.compatible[k]) compatible.push_back(inst.commodities[k]);
        }
        types.push_back({{"id", t.id}, {"capacity", t.capacity}, {"cost_per_km", t.cost_per_km}, {"compatible", compatible}});
    }
    doc["vehicle_types"] = types;
    if (inst.has_explicit_distances()) {
        const std::size_t n = inst.num_locations();
        json rows = json::array();
        for (std::size_t i = 0; i < n; ++i) {
            json row = json::array();
            for (std::size_t j = 0; j < n; ++j) row.push_back(inst.dist(i, j));
            rows.push_back(row);
        }
        doc["distances"] = rows;
    }
    if (inst.fleet) {
        json fleet;
        fleet["mode"] = to_string(inst.fleet->mode);
        if (inst.fleet->mode == FleetMode::stable) {
            json counts = json::object();
            for (std::size_t t = 0; t < inst.vehicle_types.size(); ++t) counts[inst.vehicle_types[t].id] = inst.fleet->counts[t];
            fleet["counts"] = counts;
        } else {
            fleet["vehicles"] = inst.fleet->vehicles;
        }
        doc["fleet"] = fleet;
    }
    return doc;
}

inline std::string save_instance(const Instance& inst) { return to_json_document(inst).dump(2) + "\n"; }

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) throw InstanceError(where + ": missing field '" + key + "'");
    return obj.at(key);
}

inline double require_number(const nlohmann::json& obj, const char* key, const std::string& where) {
    const auto& v = require(obj, key, where);
    if (!v.is_number()) throw InstanceError(where + ": field '" + key + "' must be a number");
    return v.get<double>();
}

inline Quantity require_quantity(const nlohmann::json& v, const std::string& where) {
    if (!v.is_number_integer()) throw InstanceError(where + ": quantities must be integers at the declared scale");
    return v.get<Quantity>();
}

}  // namespace detail

inline Instance from_json_document(const nlohmann::json& doc) {
    using detail::require;
    using detail::require_number;
    Instance inst;
    if (!doc.is_object()) throw InstanceError("instance document must be an object");
    inst.name = doc.value("name", std::string{});
    if (doc.contains("quantity_scale")) {
        if (!doc["quantity_scale"].is_number_integer()) throw InstanceError("quantity_scale must be an integer");
        inst.quantity_scale = doc["quantity_scale"].get<int>();
    }
    const auto& depot = require(doc, "depot", "instance");
    inst.depot = {require_number(depot, "x", "depot"), require_number(depot, "y", "depot")};

    const auto& commodities = require(doc, "commodities", "instance");
    if (!commodities.is_array()) throw InstanceError("commodities must be an array");
    for (const auto& k : commodities) {
        if (!k.is_string()) throw InstanceError("commodity ids must be strings");
        if (inst.commodity_index(k.get<std::string>()) >= 0) throw InstanceError("duplicate commodity id");
        inst.commodities.push_back(k.get<std::string>());
    }

    const auto& customers = require(doc, "customers", "instance");
    if (!customers.is_array()) throw InstanceError("customers must be an array");
    for (const auto& c : customers) {
        Customer cust;
        const auto& id = require(c, "id", "customer");
        if (!id.is_number_integer()) throw InstanceError("customer id must be an integer");
        cust.id = id.get<int>();
        const std::string where = "customer " + std::to_string(cust.id);
        cust.location = {require_number(c, "x", where), require_number(c, "y", where)};
        cust.demand.assign(inst.commodities.size(), 0);
        const auto& demand = require(c, "demand", where);
        if (!demand.is_object()) throw InstanceError(where + ": demand must be an object");
        for (const auto& [key, value] : demand.items()) {
            const int k = inst.commodity_index(key);
            if (k < 0) throw InstanceError(where + ": unknown commodity '" + key + "'");
            cust.demand[static_cast<std::size_t>(k)] = detail::require_quantity(value, where);
        }
        inst.customers.push_back(std::move(cust));
    }

    const auto& types = require(doc, "vehicle_types", "instance");
    if (!types.is_array()) throw InstanceError("vehicle_types must be an array");
    for (const auto& t : types) {
        VehicleType vt;
        const auto& id = require(t, "id", "vehicle type");
        if (!id.is_string()) throw InstanceError("vehicle type id must be a string");
        vt.id = id.get<std::string>();
        if (inst.type_index(vt.id) >= 0) throw InstanceError("duplicate vehicle type id");
        const std::string where = "vehicle type '" + vt.id + "'";
        vt.capacity = detail::require_quantity(require(t, "capacity", where), where);
        vt.cost_per_km = require_number(t, "cost_per_km", where);
        vt.compatible.assign(inst.commodities.size(), false);
        const auto& compatible = require(t, "compatible", where);
        if (!compatible.is_array()) throw InstanceError(where + ": compatible must be an array");
        for (const auto& k : compatible) {
            const int idx = k.is_string() ? inst.commodity_index(k.get<std::string>()) : -1;
            if (idx < 0) throw InstanceError(where + ": unknown compatible commodity");
            vt.compatible[static_cast<std::size_t>(idx)] = true;
        }
        inst.vehicle_types.push_back(std::move(vt));
    }

    if (doc.contains("distances")) {
        const auto& rows = doc["distances"];
        const std::size_t n = inst.num_locations();
        if (!rows.is_array() || rows.size() != n) throw InstanceError("distances must be a square matrix over all locations");
        std::vector<double> matrix;
        matrix.reserve(n * n);
        for (const auto& row : rows) {
            if (!row.is_array() || row.size() != n) throw InstanceError("distances must be a square matrix over all locations");
            for (const auto& v : row) {
                if (!v.is_number()) throw InstanceError("distances must be numbers");
                matrix.push_back(v.get<double>());
            }
        }
        inst.set_distances(std::move(matrix));
    } else {
        inst.compute_euclidean_distances();
    }

    if (doc.contains("fleet")) {
        const auto& f = doc["fleet"];
        FleetSpec spec;
        const auto& mode = require(f, "mode", "fleet");
        if (mode == "stable") {
            spec.mode = FleetMode::stable;
            spec.counts.assign(inst.vehicle_types.size(), 0);
            const auto& counts = require(f, "counts", "fleet");
            if (!counts.is_object()) throw InstanceError("fleet counts must be an object");
            for (const auto& [key, value] : counts.items()) {
                const int t = inst.type_index(key);
                if (t < 0) throw InstanceError("fleet counts reference unknown vehicle type '" + key + "'");
                if (!value.is_number_integer()) throw InstanceError("fleet counts must be integers");
                spec.counts[static_cast<std::size_t>(t)] = value.get<int>();
            }
        } else if (mode == "flexible") {
            spec.mode = FleetMode::flexible;
            const auto& vehicles = require(f, "vehicles", "fleet");
            if (!vehicles.is_number_integer()) throw InstanceError("fleet vehicles must be an integer");
            spec.vehicles = vehicles.get<int>();
        } else {
            throw InstanceError("fleet mode must be 'stable' or 'flexible'");
        }
        inst.fleet = spec;
    }

    inst.validate();
    return inst;
}

inline Instance load_instance(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InstanceError(std::string("malformed instance document: ") + e.what());
    }
    return from_json_document(doc);
}

inline Instance load_instance_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InstanceError("cannot open instance file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return load_instance(buffer.str());
}

// ---------------------------------------------------------------------------
// Fleet

struct Vehicle {
    int type = 0;
    Quantity capacity = 0;
    double cost_per_km = 0.0;
    std::vector<bool> compatible;
};

// The concrete vehicle set V. Stable fleets list typed vehicles grouped in
// pools; flexible fleets only carry a count and leave types to the model.
struct Fleet {
    FleetMode mode = FleetMode::stable;
    std::vector<Vehicle> vehicles;
    // Stable: pool size per type index.
    std::vector<int> pool_size;
    // Stable: pool order, as type indices, in which vehicles are listed.
    std::vector<int> pool_order;
    int flexible_count = 0;
    Quantity cap_max = 0;
    Quantity cap_min = 0;

    std::size_t size() const { return mode == FleetMode::stable ? vehicles.size() : static_cast<std::size_t>(flexible_count); }

    // First vehicle index of each non-empty pool.
    std::vector<int> first_of_each_pool() const {
        std::vector<int> firsts;
        for (std::size_t v = 0; v < vehicles.size(); ++v) {
            if (v == 0 || vehicles[v].type != vehicles[v - 1].type) firsts.push_back(static_cast<int>(v));
        }
        return firsts;
    }
};

// Pools listed with the most compatible types first, then by type index.
inline std::vector<int> pool_order(const Instance& inst) {
    std::vector<int> order(inst.num_types());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return inst.vehicle_types[static_cast<std::size_t>(a)].compatible_count() >
               inst.vehicle_types[static_cast<std::size_t>(b)].compatible_count();
    });
    return order;
}

inline Fleet make_stable_fleet(const Instance& inst, const std::vector<int>& counts) {
    if (counts.size() != inst.num_types()) throw InstanceError("pool sizes must cover every vehicle type");
    Fleet fleet;
    fleet.mode = FleetMode::stable;
    fleet.pool_size = counts;
    fleet.pool_order = pool_order(inst);
    fleet.cap_min = std::numeric_limits<Quantity>::max();
    for (int t : fleet.pool_order) {
        const auto& vt = inst.vehicle_types[static_cast<std::size_t>(t)];
        if (counts[static_cast<std::size_t>(t)] < 0) throw InstanceError("pool sizes must be nonnegative");
        for (int c = 0; c < counts[static_cast<std::size_t>(t)]; ++c) {
            fleet.vehicles.push_back({t, vt.capacity, vt.cost_per_km, vt.compatible});
            fleet.cap_max = std::max(fleet.cap_max, vt.capacity);
            fleet.cap_min = std::min(fleet.cap_min, vt.capacity);
        }
    }
    if (fleet.vehicles.empty()) fleet.cap_min = 0;
    return fleet;
}

inline Fleet make_flexible_fleet(const Instance& inst, int count) {
    if (count < 0) throw InstanceError("flexible fleet size must be nonnegative");
    Fleet fleet;
    fleet.mode = FleetMode::flexible;
    fleet.flexible_count = count;
    fleet.cap_max = inst.max_capacity();
    fleet.cap_min = inst.min_capacity();
    return fleet;
}

// Cheapest compatible type per commodity (ties to the lower index); -1 for a
// commodity no type carries.
inline std::vector<int> cheapest_type_per_commodity(const Instance& inst) {
    std::vector<int> owner(inst.num_commodities(), -1);
    for (std::size_t k = 0; k < inst.num_commodities(); ++k) {
        for (std::size_t t = 0; t < inst.num_types(); ++t) {
            const auto& vt = inst.vehicle_types[t];
            if (!vt.compatible[k]) continue;
            if (owner[k] < 0 || vt.cost_per_km < inst.vehicle_types[static_cast<std::size_t>(owner[k])].cost_per_km) {
                owner[k] = static_cast<int>(t);
            }
        }
    }
    return owner;
}

// Sizes each pool from the demand of the commodities assigned to it:
// F_t = ceil(demand_t / cap_t) + slack.
inline Fleet size_stable_fleet(const Instance& inst, const std::vector<int>& commodity_owner, int slack = 1) {
    if (commodity_owner.size() != inst.num_commodities()) throw InstanceError("commodity partition must cover every commodity");
    if (slack < 0) throw InstanceError("fleet slack must be nonnegative");
    std::vector<Quantity> assigned(inst.num_types(), 0);
    for (std::size_t k = 0; k < inst.num_commodities(); ++k) {
        const int t = commodity_owner[k];
        const Quantity demand = inst.commodity_demand(k);
        if (t < 0 || static_cast<std::size_t>(t) >= inst.num_types()) {
            if (demand == 0) continue;
            throw InstanceError("commodity '" + inst.commodities[k] + "' is not assigned to a vehicle type");
        }
        if (!inst.vehicle_types[static_cast<std::size_t>(t)].compatible[k]) {
            throw InstanceError("commodity '" + inst.commodities[k] + "' assigned to incompatible type '" +
                                inst.vehicle_types[static_cast<std::size_t>(t)].id + "'");
        }
        assigned[static_cast<std::size_t>(t)] += demand;
    }
    std::vector<int> counts(inst.num_types(), 0);
    for (std::size_t t = 0; t < inst.num_types(); ++t) {
        const Quantity cap = inst.vehicle_types[t].capacity;
        counts[t] = static_cast<int>((assigned[t] + cap - 1) / cap) + slack;
    }
    return make_stable_fleet(inst, counts);
}

inline Fleet size_stable_fleet(const Instance& inst, int slack = 1) {
    return size_stable_fleet(inst, cheapest_type_per_commodity(inst), slack);
}

// |V| = ceil(total demand / smallest capacity).
inline int size_flexible_fleet(const Instance& inst) {
    const Quantity cap = inst.min_capacity();
    return static_cast<int>((inst.overall_demand() + cap - 1) / cap);
}

// Fleet from the instance document when present, otherwise from the sizing
// rules.
inline Fleet fleet_for(const Instance& inst, FleetMode mode, int stable_slack = 1) {
    if (inst.fleet && inst.fleet->mode == mode) {
        return mode == FleetMode::stable ? make_stable_fleet(inst, inst.fleet->counts)
                                         : make_flexible_fleet(inst, inst.fleet->vehicles);
    }
    if (inst.fleet && mode == FleetMode::flexible) {
        // A stable composition defines the flexible vehicle count too.
        return make_flexible_fleet(inst, std::accumulate(inst.fleet->counts.begin(), inst.fleet->counts.end(), 0));
    }
    return mode == FleetMode::stable ? size_stable_fleet(inst, stable_slack) : make_flexible_fleet(inst, size_flexible_fleet(inst));
}

// ---------------------------------------------------------------------------
// Aggregation

// Greedy seed-based clustering. Seeds are picked farthest-first (the first is
// the customer farthest from the depot, each next one maximises its distance
// to the seeds chosen so far); every unassigned customer strictly closer than
// `radius` to a seed joins its cluster. Clusters keep the seed's id and
// position in the customer list and sit at the demand-weighted centroid.
inline Instance aggregate_customers(const Instance& inst, double radius) {
    if (radius < 0.0) throw InstanceError("aggregation radius must be nonnegative");
    const std::size_t n = inst.num_customers();
    std::vector<int> cluster_of(n, -1);
    std::vector<std::size_t> seeds;
    std::vector<double> seed_dist(n, kInfinity);
    for (std::size_t round = 0; round < n; ++round) {
        std::optional<std::size_t> seed;
        double best = -1.0;
        for (std::size_t c = 0; c < n; ++c) {
            if (cluster_of[c] >= 0) continue;
            const double score = seeds.empty() ? inst.dist(0, c + 1) : seed_dist[c];
            if (score > best) {
                best = score;
                seed = c;
            }
        }
        if (!seed) break;
        const int cluster = static_cast<int>(seeds.size());
        seeds.push_back(*seed);
        cluster_of[*seed] = cluster;
        for (std::size_t c = 0; c < n; ++c) {
            if (cluster_of[c] < 0 && inst.dist(*seed + 1, c + 1) < radius) cluster_of[c] = cluster;
        }
        for (std::size_t c = 0; c < n; ++c) seed_dist[c] = std::min(seed_dist[c], inst.dist(*seed + 1, c + 1));
    }
    if (seeds.size() == n) return inst;

    std::vector<std::size_t> order = seeds;
    std::sort(order.begin(), order.end());
    Instance out = inst;
    out.customers.clear();
    std::vector<std::size_t> members_seed;
    for (std::size_t seed : order) {
        const int cluster = cluster_of[seed];
        Customer merged;
        merged.id = inst.customers[seed].id;
        merged.demand.assign(inst.num_commodities(), 0);
        double wx = 0.0, wy = 0.0, weight = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            if (cluster_of[c] != cluster) continue;
            const auto& src = inst.customers[c];
            for (std::size_t k = 0; k < inst.num_commodities(); ++k) merged.demand[k] += src.demand[k];
            const double w = static_cast<double>(src.total_demand());
            wx += w * src.location.x;
            wy += w * src.location.y;
            weight += w;
        }
        merged.location = {wx / weight, wy / weight};
        out.customers.push_back(std::move(merged));
        members_seed.push_back(seed);
    }
    if (inst.has_explicit_distances()) {
        // Clusters inherit the seed's distance rows.
        const std::size_t m = out.num_locations();
        std::vector<double> matrix(m * m, 0.0);
        auto original = [&](std::size_t i) { return i == 0 ? std::size_t{0} : members_seed[i - 1] + 1; };
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) matrix[i * m + j] = i == j ? 0.0 : inst.dist(original(i), original(j));
        }
        out.set_distances(std::move(matrix));
    } else {
        out.compute_euclidean_distances();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Generation

enum class DemandProfile {
    // Refrigerated and regular types, demands below a vehicle load.
    standard,
    // Like standard, but some customers exceed the largest capacity.
    split_heavy,
    // One type carrying every commodity.
    single_type,
};

inline std::optional<DemandProfile> parse_profile(const std::string& name) {
    if (name == "standard") return DemandProfile::standard;
    if (name == "split-heavy") return DemandProfile::split_heavy;
    if (name == "single-type") return DemandProfile::single_type;
    return std::nullopt;
}

struct GeneratorOptions {
    std::uint64_t seed = 1;
    int customers = 5;
    int commodities = 2;
    DemandProfile profile = DemandProfile::standard;
    // Side of the square holding customer coordinates, km; depot at its centre.
    double area = 100.0;
    Quantity capacity = 100;
    // Per-commodity demand is drawn from [1, max_demand_fraction * capacity].
    double max_demand_fraction = 0.35;
};

namespace detail {

// Platform-independent draws on top of mt19937_64.
class Draw {
public:
    explicit Draw(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * (1.0 / 9007199254740992.0); }
    std::int64_t integer(std::int64_t lo, std::int64_t hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo + 1);
        return lo + static_cast<std::int64_t>(engine_() % span);
    }

private:
    std::mt19937_64 engine_;
};

inline double round2(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace detail

// Deterministic synthetic instance. Commodity 0 is "chilled" and needs the
// refrigerated type; the rest are ambient goods any type carries.
inline Instance generate_instance(const GeneratorOptions& opt) {
    if (opt.customers < 1) throw InstanceError("generator needs at least one customer");
    if (opt.commodities < 1) throw InstanceError("generator needs at least one commodity");
    detail::Draw draw(opt.seed);
    Instance inst;
    inst.name = "gen-s" + std::to_string(opt.seed) + "-n" + std::to_string(opt.customers);
    inst.depot = {opt.area / 2.0, opt.area / 2.0};
    for (int k = 0; k < opt.commodities; ++k) {
        inst.commodities.push_back(k == 0 ? "chilled" : (k == 1 ? "ambient" : "ambient" + std::to_string(k)));
    }
    const auto k_count = static_cast<std::size_t>(opt.commodities);
    if (opt.profile == DemandProfile::single_type) {
        inst.vehicle_types.push_back({"refrigerated", opt.capacity, 1.5, std::vector<bool>(k_count, true)});
    } else {
        inst.vehicle_types.push_back({"refrigerated", opt.capacity, 1.5, std::vector<bool>(k_count, true)});
        std::vector<bool> regular(k_count, true);
        regular[0] = k_count == 1;
        inst.vehicle_types.push_back({"regular", opt.capacity, 1.0, regular});
    }
    const Quantity cap_max = inst.max_capacity();
    const auto max_part = std::max<Quantity>(1, static_cast<Quantity>(opt.max_demand_fraction * static_cast<double>(opt.capacity)));
    for (int c = 0; c < opt.customers; ++c) {
        Customer cust;
        cust.id = c + 1;
        cust.location = {detail::round2(draw.uniform() * opt.area), detail::round2(draw.uniform() * opt.area)};
        cust.demand.assign(k_count, 0);
        for (std::size_t k = 0; k < k_count; ++k) {
            // Roughly a third of the (customer, commodity) pairs are empty.
            if (draw.uniform() < 0.3) continue;
            cust.demand[k] = draw.integer(1, max_part);
        }
        if (cust.total_demand() == 0) cust.demand[draw.integer(0, static_cast<std::int64_t>(k_count) - 1)] = draw.integer(1, max_part);
        inst.customers.push_back(std::move(cust));
    }
    if (opt.profile == DemandProfile::split_heavy) {
        // Every third customer, and at least one, gets more than a full load.
        for (int c = 0; c < opt.customers; c += 3) {
            auto& cust = inst.customers[static_cast<std::size_t>(c)];
            const Quantity target = cap_max + draw.integer(1, std::max<Quantity>(1, cap_max / 2));
            const std::size_t k = static_cast<std::size_t>(draw.integer(0, static_cast<std::int64_t>(k_count) - 1));
            const Quantity others = cust.total_demand() - cust.demand[k];
            cust.demand[k] = std::max<Quantity>(1, target - others);
            if (cust.total_demand() <= cap_max) cust.demand[k] += cap_max + 1 - cust.total_demand();
        }
    }
    inst.compute_euclidean_distances();
    inst.validate();
    return inst;
}

inline Instance generate_instance(std::uint64_t seed, int n_customers, int n_commodities,
                                  DemandProfile profile = DemandProfile::standard) {
    GeneratorOptions opt;
    opt.seed = seed;
    opt.customers = n_customers;
    opt.commodities = n_commodities;
    opt.profile = profile;
    return generate_instance(opt);
}

}  // namespace fsmvrp
