#pragma once

#include <algorithm>
#include <array>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "formulations.hpp"

namespace fsmvrp {

inline constexpr std::array<const char*, 6> kCutFamilies = {"min_visits",         "min_vehicles",    "max_vehicles",
                                                            "fractional_subtour", "depot_outdegree", "single_visit"};
inline constexpr std::array<const char*, 3> kSymmetryFamilies = {"usage_order", "visit_order", "fleet_order"};
inline constexpr std::array<const char*, 2> kOrderingFamilies = {"customer_assignment", "total_load"};

struct StrengthenConfig {
    bool min_visits = false;
    bool min_vehicles = false;
    bool max_vehicles = false;
    bool fractional_subtour = false;
    bool depot_outdegree = false;
    bool single_visit = false;
    bool usage_order = false;
    bool visit_order = false;
    bool fleet_order = false;
    bool customer_assignment = false;
    bool total_load = false;
    // Re-index customers farthest first. Implied by customer_assignment.
    bool reorder_customers = false;

    bool* flag(const std::string& family) {
        if (family == "min_visits") return &min_visits;
        if (family == "min_vehicles") return &min_vehicles;
        if (family == "max_vehicles") return &max_vehicles;
        if (family == "fractional_subtour") return &fractional_subtour;
        if (family == "depot_outdegree") return &depot_outdegree;
        if (family == "single_visit") return &single_visit;
        if (family == "usage_order") return &usage_order;
        if (family == "visit_order") return &visit_order;
        if (family == "fleet_order") return &fleet_order;
        if (family == "customer_assignment") return &customer_assignment;
        if (family == "total_load") return &total_load;
        return nullptr;
    }
    bool enabled(const std::string& family) const { return *const_cast<StrengthenConfig*>(this)->flag(family); }

    static std::vector<std::string> family_names() {
        std::vector<std::string> names(kCutFamilies.begin(), kCutFamilies.end());
        names.insert(names.end(), kSymmetryFamilies.begin(), kSymmetryFamilies.end());
        names.insert(names.end(), kOrderingFamilies.begin(), kOrderingFamilies.end());
        return names;
    }

    std::vector<std::string> enabled_families() const {
        std::vector<std::string> on;
        for (const auto& f : family_names()) {
            if (enabled(f)) on.push_back(f);
        }
        return on;
    }

    static StrengthenConfig none() { return {}; }

    // Every family that applies to `kind`.
    static StrengthenConfig all_for(const ModelKind& kind) {
        StrengthenConfig c;
        for (const auto& f : family_names()) *c.flag(f) = true;
        c.reorder_customers = true;
        c.drop_incompatible(kind);
        return c;
    }

    static StrengthenConfig only(const std::string& family) {
        StrengthenConfig c;
        bool* f = c.flag(family);
        if (!f) throw ModelError("unknown strengthening family '" + family + "'");
        *f = true;
        return c;
    }

    void drop_incompatible(const ModelKind& kind) {
        if (kind.routing == RoutingMode::vehicle) total_load = false;
        if (kind.fleet == FleetMode::stable) fleet_order = false;
    }

    // Empty when every enabled family applies to `kind`.
    std::string incompatibility(const ModelKind& kind) const {
        if (total_load && kind.routing == RoutingMode::vehicle) return "total_load needs commodity routing";
        if (fleet_order && kind.fleet == FleetMode::stable) return "fleet_order needs a flexible fleet";
        return {};
    }
};

// Parses "all", "none" or a comma list of names from `group` into `config`.
// "all" only switches on the families that apply to `kind`.
template <std::size_t N>
void parse_family_list(const std::string& text, const std::array<const char*, N>& group, const ModelKind& kind,
                       StrengthenConfig& config) {
    if (text == "none" || text.empty()) {
        for (const char* f : group) *config.flag(f) = false;
        return;
    }
    if (text == "all") {
        StrengthenConfig all = StrengthenConfig::all_for(kind);
        for (const char* f : group) *config.flag(f) = all.enabled(f);
        return;
    }
    std::stringstream in(text);
    std::string name;
    while (std::getline(in, name, ',')) {
        if (name.empty()) continue;
        if (std::find_if(group.begin(), group.end(), [&](const char* f) { return name == f; }) == group.end()) {
            std::string known;
            for (const char* f : group) known += (known.empty() ? "" : ", ") + std::string(f);
            throw ModelError("unknown family '" + name + "' (expected all, none or a list of: " + known + ")");
        }
        *config.flag(name) = true;
    }
}

// Customers sorted by decreasing depot distance, ties by original order.
inline Instance reorder_customers_farthest_first(const Instance& inst) {
    const std::size_t n = inst.num_customers();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return inst.dist(0, a + 1) > inst.dist(0, b + 1); });
    Instance out = inst;
    for (std::size_t p = 0; p < n; ++p) out.customers[p] = inst.customers[order[p]];
    if (inst.has_explicit_distances()) {
        const std::size_t L = n + 1;
        auto loc = [&](std::size_t p) { return p == 0 ? std::size_t{0} : order[p - 1] + 1; };
        std::vector<double> matrix(L * L);
        for (std::size_t a = 0; a < L; ++a) {
            for (std::size_t b = 0; b < L; ++b) matrix[a * L + b] = inst.dist(loc(a), loc(b));
        }
        out.set_distances(std::move(matrix));
    } else {
        out.compute_euclidean_distances();
    }
    return out;
}

// Lower bound on the vehicles left at the depot: fleet size minus the most
// vehicles a solution visiting every customer with the fewest small-vehicle
// trips could need, floored at zero.
inline int depot_vehicle_bound(const Instance& inst, const Fleet& fleet) {
    const Quantity cap_min = fleet.mode == FleetMode::stable ? fleet.cap_min : inst.min_capacity();
    Quantity trips = 0;
    for (const auto& c : inst.customers) trips += (c.total_demand() + cap_min - 1) / cap_min;
    return static_cast<int>(std::max<Quantity>(0, static_cast<Quantity>(fleet.size()) - trips));
}

// Most vehicles the max_vehicles row lets a solution use.
inline int max_vehicles_allowed(const Instance& inst, const Fleet& fleet) {
    return static_cast<int>(fleet.size()) - depot_vehicle_bound(inst, fleet);
}

namespace detail {

inline Quantity fleet_cap_max(const Instance& inst, const Fleet& fleet) {
    return fleet.mode == FleetMode::stable ? fleet.cap_max : inst.max_capacity();
}

// Pairs (v-1, v) the ordering families link: consecutive vehicles of one pool
// (stable) or consecutive vehicles from `first` on (flexible).
inline std::vector<std::size_t> ordered_successors(const BuiltModel& b, std::size_t first) {
    std::vector<std::size_t> out;
    const auto& fleet = b.fleet;
    for (std::size_t v = std::max<std::size_t>(first, 1); v < fleet.size(); ++v) {
        if (fleet.mode == FleetMode::stable && fleet.vehicles[v].type != fleet.vehicles[v - 1].type) continue;
        out.push_back(v);
    }
    return out;
}

// Incoming arcs of location i for vehicle v over every layer.
inline void push_incoming(const VariableCatalog& cat, std::size_t v, std::size_t i, std::vector<Term>& row, double coef = 1.0) {
    for (std::size_t t = 0; t < cat.layers(); ++t) {
        for (std::size_t j = 0; j < cat.locations(); ++j) {
            if (j != i) row.push_back({cat.x(v, t, j, i), coef});
        }
    }
}

inline void push_outgoing(const VariableCatalog& cat, std::size_t v, std::size_t i, std::vector<Term>& row, double coef = 1.0) {
    for (std::size_t t = 0; t < cat.layers(); ++t) {
        for (std::size_t j = 0; j < cat.locations(); ++j) {
            if (j != i) row.push_back({cat.x(v, t, i, j), coef});
        }
    }
}

}  // namespace detail

// Adds the enabled valid-cut families to `built.model`; returns the row count.
inline std::size_t apply_valid_cuts(BuiltModel& built, const StrengthenConfig& config) {
    if (auto why = config.incompatibility(built.kind); !why.empty()) throw ModelError(why);
    using detail::str;
    using detail::sub;
    auto& model = built.model;
    const auto& cat = *built.catalog;
    const auto& inst = built.instance;
    const auto& fleet = built.fleet;
    const std::size_t V = cat.vehicles();
    const std::size_t L = cat.locations();
    const Quantity cap_max = detail::fleet_cap_max(inst, fleet);
    const std::size_t before = model.num_constraints();

    if (config.min_visits) {
        for (std::size_t i = 1; i < L; ++i) {
            const Quantity dem = inst.customers[i - 1].total_demand();
            std::vector<Term> row;
            for (std::size_t v = 0; v < V; ++v) detail::push_incoming(cat, v, i, row);
            model.add_constraint(std::move(row), Sense::greater_equal, static_cast<double>((dem + cap_max - 1) / cap_max),
                                 "min_visits" + sub({{"i", str(i)}}));
        }
        built.families.insert("min_visits");
    }
    if (config.min_vehicles) {
        if (fleet.mode == FleetMode::stable) {
            // Aggregate ceiling: summing per-customer ceilings would forbid one
            // vehicle serving two small customers.
            const Quantity total = inst.overall_demand();
            const double needed = static_cast<double>((total + cap_max - 1) / cap_max);
            std::vector<Term> row;
            for (std::size_t v = 0; v < V; ++v) row.push_back({cat.u(v), 1.0});
            model.add_constraint(std::move(row), Sense::less_equal, static_cast<double>(V) - needed, "min_vehicles");
        } else {
            for (std::size_t k = 0; k < cat.commodities(); ++k) {
                std::vector<Term> row;
                for (std::size_t v = 0; v < V; ++v) {
                    for (std::size_t t = 0; t < cat.types(); ++t) {
                        row.push_back({cat.z(v, t), static_cast<double>(inst.vehicle_types[t].capacity)});
                    }
                }
                model.add_constraint(std::move(row), Sense::greater_equal, static_cast<double>(inst.commodity_demand(k)),
                                     "min_vehicles" + sub({{"k", inst.commodities[k]}}));
            }
        }
        built.families.insert("min_vehicles");
    }
    if (config.max_vehicles) {
        const int bound = depot_vehicle_bound(inst, fleet);
        if (bound > 0) {
            std::vector<Term> row;
            for (std::size_t v = 0; v < V; ++v) row.push_back({cat.u(v), 1.0});
            model.add_constraint(std::move(row), Sense::greater_equal, static_cast<double>(bound), "max_vehicles");
        }
        built.families.insert("max_vehicles");
    }
    if (config.fractional_subtour) {
        // Customer-to-customer arcs only: on arcs touching the depot the row
        // would cut off out-and-back routes.
        for (std::size_t v = 0; v < V; ++v) {
            for (std::size_t t = 0; t < cat.layers(); ++t) {
                for (std::size_t i = 1; i < L; ++i) {
                    for (std::size_t j = 1; j < L; ++j) {
                        if (i == j) continue;
                        std::vector<Term> row{{cat.x(v, t, i, j), 1.0}};
                        for (std::size_t l = 0; l < L; ++l) {
                            if (l != i && l != j) row.push_back({cat.x(v, t, j, l), -1.0});
                        }
                        model.add_constraint(std::move(row), Sense::less_equal, 0.0,
                                             "fractional_subtour" + sub({{"v", str(v)}, {"t", str(t)}, {"i", str(i)}, {"j", str(j)}}));
                    }
                }
            }
        }
        built.families.insert("fractional_subtour");
    }
    if (config.depot_outdegree) {
        for (std::size_t v = 0; v < V; ++v) {
            std::vector<Term> row;
            detail::push_outgoing(cat, v, 0, row);
            row.push_back({cat.u(v), 1.0});
            model.add_constraint(std::move(row), Sense::equal, 1.0, "depot_outdegree" + sub({{"v", str(v)}}));
        }
        built.families.insert("depot_outdegree");
    }
    if (config.single_visit) {
        for (std::size_t v = 0; v < V; ++v) {
            for (std::size_t i = 1; i < L; ++i) {
                std::vector<Term> out_row;
                detail::push_outgoing(cat, v, i, out_row);
                model.add_constraint(std::move(out_row), Sense::less_equal, 1.0, "single_visit" + sub({{"v", str(v)}, {"i", str(i)}, {"dir", "out"}}));
                std::vector<Term> in_row;
                detail::push_incoming(cat, v, i, in_row);
                model.add_constraint(std::move(in_row), Sense::less_equal, 1.0, "single_visit" + sub({{"v", str(v)}, {"i", str(i)}, {"dir", "in"}}));
            }
        }
        built.families.insert("single_visit");
    }
    return model.num_constraints() - before;
}

// Adds the enabled symmetry and ordering families; returns the row count.
//
// Unused vehicles come last: u_v >= u_{v-1}. With customer assignment on a
// flexible fleet, vehicle 0 serves the farthest customer and the type and
// visit ordering start at vehicle 1.
inline std::size_t apply_symmetry(BuiltModel& built, const StrengthenConfig& config) {
    if (auto why = config.incompatibility(built.kind); !why.empty()) throw ModelError(why);
    using detail::str;
    using detail::sub;
    auto& model = built.model;
    const auto& cat = *built.catalog;
    const auto& inst = built.instance;
    const auto& fleet = built.fleet;
    const std::size_t V = cat.vehicles();
    const std::size_t L = cat.locations();
    const std::size_t T = cat.types();
    const bool flexible = fleet.mode == FleetMode::flexible;
    const std::size_t before = model.num_constraints();

    if (config.customer_assignment && flexible) built.vehicle0_reserved = true;
    const std::size_t first_ordered = built.vehicle0_reserved ? 2 : 1;

    if (config.usage_order) {
        for (std::size_t v : detail::ordered_successors(built, 1)) {
            model.add_constraint({{cat.u(v), 1.0}, {cat.u(v - 1), -1.0}}, Sense::greater_equal, 0.0, "usage_order" + sub({{"v", str(v)}}));
        }
        built.families.insert("usage_order");
    }
    if (config.visit_order) {
        // Vehicle v may enter customer j only if vehicle v-1 enters some
        // customer with index <= j.
        for (std::size_t v : detail::ordered_successors(built, first_ordered)) {
            for (std::size_t t = 0; t < cat.layers(); ++t) {
                for (std::size_t j = 1; j < L; ++j) {
                    std::vector<Term> prefix;
                    if (flexible) {
                        for (std::size_t s = 0; s < t; ++s) prefix.push_back({cat.z(v - 1, s), 1.0});
                    }
                    for (std::size_t l = 1; l <= j; ++l) {
                        for (std::size_t h = 0; h < L; ++h) {
                            if (h != l) prefix.push_back({cat.x(v - 1, t, h, l), 1.0});
                        }
                    }
                    for (std::size_t i = 0; i < L; ++i) {
                        if (i == j) continue;
                        auto row = prefix;
                        row.push_back({cat.x(v, t, i, j), -1.0});
                        model.add_constraint(std::move(row), Sense::greater_equal, 0.0,
                                             "visit_order" + sub({{"v", str(v)}, {"t", str(t)}, {"i", str(i)}, {"j", str(j)}}));
                    }
                }
            }
        }
        built.families.insert("visit_order");
    }
    if (config.fleet_order) {
        for (std::size_t v : detail::ordered_successors(built, first_ordered)) {
            for (std::size_t t = 0; t < T; ++t) {
                std::vector<Term> row;
                for (std::size_t s = 0; s <= t; ++s) row.push_back({cat.z(v - 1, s), 1.0});
                row.push_back({cat.z(v, t), -1.0});
                model.add_constraint(std::move(row), Sense::greater_equal, 0.0, "fleet_order" + sub({{"v", str(v)}, {"t", str(t)}}));
            }
        }
        built.families.insert("fleet_order");
    }
    if (config.customer_assignment) {
        // The farthest customer has the smallest index once customers are
        // reordered; otherwise pick it directly.
        std::size_t far = 1;
        for (std::size_t i = 2; i < L; ++i) {
            if (inst.dist(0, i) > inst.dist(0, far)) far = i;
        }
        built.farthest = static_cast<int>(far);
        std::vector<Term> row;
        if (flexible) {
            detail::push_incoming(cat, 0, far, row);
            model.add_constraint(std::move(row), Sense::equal, 1.0, "customer_assignment");
        } else {
            for (int v : fleet.first_of_each_pool()) detail::push_incoming(cat, static_cast<std::size_t>(v), far, row);
            model.add_constraint(std::move(row), Sense::greater_equal, 1.0, "customer_assignment");
        }
        built.families.insert("customer_assignment");
    }
    if (config.total_load) {
        const double cap_max = static_cast<double>(detail::fleet_cap_max(inst, fleet));
        for (std::size_t v = 0; v < V; ++v) {
            std::vector<Term> load;
            for (std::size_t k = 0; k < cat.commodities(); ++k) {
                for (std::size_t j = 1; j < L; ++j) {
                    if (cat.f(v, k, 0, j) >= 0) load.push_back({cat.f(v, k, 0, j), 1.0});
                }
            }
            if (load.empty()) continue;
            if (!flexible) {
                const double cap = static_cast<double>(fleet.vehicles[v].capacity);
                auto row = load;
                row.push_back({cat.u(v), cap});
                model.add_constraint(std::move(row), Sense::equal, cap, "total_load" + sub({{"v", str(v)}}));
            } else {
                auto upper = load;
                auto lower = load;
                for (std::size_t t = 0; t < T; ++t) {
                    const double cap = static_cast<double>(inst.vehicle_types[t].capacity);
                    upper.push_back({cat.z(v, t), -cap});
                    lower.push_back({cat.z(v, t), -cap});
                }
                lower.push_back({cat.u(v), cap_max});
                model.add_constraint(std::move(upper), Sense::less_equal, 0.0, "total_load" + sub({{"v", str(v)}, {"side", "upper"}}));
                model.add_constraint(std::move(lower), Sense::greater_equal, 0.0, "total_load" + sub({{"v", str(v)}, {"side", "lower"}}));
            }
        }
        built.families.insert("total_load");
    }
    return model.num_constraints() - before;
}

}  // namespace fsmvrp
