#pragma once

#include <algorithm>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "branch_and_bound.hpp"
#include "common.hpp"
#include "instance.hpp"
#include "mip_model.hpp"

namespace fsmvrp {

enum class RoutingMode { commodity, vehicle };

struct ModelKind {
    FleetMode fleet = FleetMode::stable;
    RoutingMode routing = RoutingMode::commodity;

    // "sc", "sv", "fc" or "ff": fleet letter then routing letter.
    std::string name() const {
        std::string s = fleet == FleetMode::stable ? "s" : "f";
        if (routing == RoutingMode::commodity) return s + "c";
        return s + (fleet == FleetMode::stable ? "v" : "f");
    }

    static std::optional<ModelKind> parse(const std::string& name) {
        if (name == "sc") return ModelKind{FleetMode::stable, RoutingMode::commodity};
        if (name == "sv" || name == "sf") return ModelKind{FleetMode::stable, RoutingMode::vehicle};
        if (name == "fc") return ModelKind{FleetMode::flexible, RoutingMode::commodity};
        if (name == "ff" || name == "fv") return ModelKind{FleetMode::flexible, RoutingMode::vehicle};
        return std::nullopt;
    }

    static std::vector<ModelKind> all() {
        return {{FleetMode::stable, RoutingMode::commodity},
                {FleetMode::stable, RoutingMode::vehicle},
                {FleetMode::flexible, RoutingMode::commodity},
                {FleetMode::flexible, RoutingMode::vehicle}};
    }

    friend bool operator==(const ModelKind&, const ModelKind&) = default;
};

// Index from symbol subscripts to model variable ids (-1 when absent).
//
// Arc variables live on one layer per vehicle in stable mode and one layer per
// (vehicle, type) in flexible mode; the stable accessors use layer 0.
class VariableCatalog {
public:
    VariableCatalog(FleetMode fleet, RoutingMode routing, std::size_t vehicles, std::size_t types, std::size_t locations,
                    std::size_t commodities)
        : fleet_(fleet), routing_(routing), V_(vehicles), T_(types), L_(locations), K_(commodities) {
        layers_ = fleet == FleetMode::stable ? 1 : T_;
        x_.assign(V_ * layers_ * L_ * L_, -1);
        y_.assign(V_ * L_ * K_, -1);
        u_.assign(V_, -1);
        if (fleet == FleetMode::flexible) z_.assign(V_ * T_, -1);
        if (routing == RoutingMode::commodity) f_.assign(V_ * K_ * L_ * L_, -1);
    }

    FleetMode fleet_mode() const { return fleet_; }
    RoutingMode routing_mode() const { return routing_; }
    std::size_t vehicles() const { return V_; }
    std::size_t types() const { return T_; }
    std::size_t layers() const { return layers_; }
    std::size_t locations() const { return L_; }
    std::size_t commodities() const { return K_; }
    std::size_t num_arcs() const { return L_ * (L_ - 1); }

    int x(std::size_t v, std::size_t i, std::size_t j) const { return x_[xi(v, 0, i, j)]; }
    int x(std::size_t v, std::size_t t, std::size_t i, std::size_t j) const { return x_[xi(v, t, i, j)]; }
    int y(std::size_t v, std::size_t i, std::size_t k) const { return y_[(v * L_ + i) * K_ + k]; }
    int u(std::size_t v) const { return u_[v]; }
    int z(std::size_t v, std::size_t t) const { return z_.empty() ? -1 : z_[v * T_ + t]; }
    int f(std::size_t v, std::size_t k, std::size_t i, std::size_t j) const {
        return f_.empty() ? -1 : f_[((v * K_ + k) * L_ + i) * L_ + j];
    }

    void set_x(std::size_t v, std::size_t t, std::size_t i, std::size_t j, int id) { x_[xi(v, t, i, j)] = id; }
    void set_y(std::size_t v, std::size_t i, std::size_t k, int id) { y_[(v * L_ + i) * K_ + k] = id; }
    void set_u(std::size_t v, int id) { u_[v] = id; }
    void set_z(std::size_t v, std::size_t t, int id) { z_[v * T_ + t] = id; }
    void set_f(std::size_t v, std::size_t k, std::size_t i, std::size_t j, int id) { f_[((v * K_ + k) * L_ + i) * L_ + j] = id; }

    std::size_t count_x() const { return count(x_); }
    std::size_t count_y() const { return count(y_); }
    std::size_t count_u() const { return count(u_); }
    std::size_t count_z() const { return count(z_); }
    std::size_t count_f() const { return count(f_); }

private:
    std::size_t xi(std::size_t v, std::size_t t, std::size_t i, std::size_t j) const { return ((v * layers_ + t) * L_ + i) * L_ + j; }
    static std::size_t count(const std::vector<int>& ids) {
        return static_cast<std::size_t>(std::count_if(ids.begin(), ids.end(), [](int id) { return id >= 0; }));
    }

    FleetMode fleet_;
    RoutingMode routing_;
    std::size_t V_, T_, L_, K_, layers_;
    std::vector<int> x_, y_, u_, z_, f_;
};

struct BuiltModel {
    Model model;
    std::shared_ptr<const VariableCatalog> catalog;
    ModelKind kind;
    Fleet fleet;
    // The instance in the model's own customer order.
    Instance instance;
    // Families of strengthening rows added to the model.
    std::set<std::string> families;
    // Location index of the farthest customer when customer assignment is on.
    int farthest = -1;
    // Flexible fleet: vehicle 0 is reserved for the farthest customer and the
    // ordering families start at vehicle 1.
    bool vehicle0_reserved = false;
    std::vector<std::string> notes;

    bool has(const std::string& family) const { return families.count(family) > 0; }
};

namespace detail {

inline std::string sub(std::initializer_list<std::pair<const char*, std::string>> parts) {
    std::string s = "[";
    bool first = true;
    for (const auto& [k, v] : parts) {
        s += (first ? "" : ",") + std::string(k) + "=" + v;
        first = false;
    }
    return s + "]";
}

inline std::string str(std::size_t v) { return std::to_string(v); }

// Capacity and compatibility of vehicle v on layer t.
inline Quantity layer_capacity(const Instance& inst, const Fleet& fleet, std::size_t v, std::size_t t) {
    return fleet.mode == FleetMode::stable ? fleet.vehicles[v].capacity : inst.vehicle_types[t].capacity;
}

inline double layer_cost(const Instance& inst, const Fleet& fleet, std::size_t v, std::size_t t) {
    return fleet.mode == FleetMode::stable ? fleet.vehicles[v].cost_per_km : inst.vehicle_types[t].cost_per_km;
}

}  // namespace detail

// Creates x, y, u (and z for flexible fleets, f for commodity routing) with
// their bounds, objective coefficients and branching classes.
inline std::shared_ptr<VariableCatalog> create_variables(const Instance& inst, const Fleet& fleet, RoutingMode routing, Model& model,
                                                         const BranchingPriorities& priorities = {}) {
    const std::size_t V = fleet.size();
    const std::size_t T = inst.num_types();
    const std::size_t L = inst.num_locations();
    const std::size_t K = inst.num_commodities();
    auto cat = std::make_shared<VariableCatalog>(fleet.mode, routing, V, T, L, K);
    const bool stable = fleet.mode == FleetMode::stable;
    const double cap_max = static_cast<double>(stable ? fleet.cap_max : inst.max_capacity());
    using detail::str;
    for (std::size_t v = 0; v < V; ++v) {
        for (std::size_t t = 0; t < cat->layers(); ++t) {
            const double cost = detail::layer_cost(inst, fleet, v, t);
            for (std::size_t i = 0; i < L; ++i) {
                for (std::size_t j = 0; j < L; ++j) {
                    if (i == j) continue;
                    const std::string name = stable ? "x_" + str(v) + "_" + str(i) + "_" + str(j)
                                                    : "x_" + str(v) + "_" + str(t) + "_" + str(i) + "_" + str(j);
                    cat->set_x(v, t, i, j, model.add_variable(VarKind::binary, 0, 1, cost * inst.dist(i, j), priorities.arc, name));
                }
            }
        }
    }
    for (std::size_t v = 0; v < V; ++v) {
        for (std::size_t i = 1; i < L; ++i) {
            for (std::size_t k = 0; k < K; ++k) {
                if (stable && !fleet.vehicles[v].compatible[k]) continue;
                const double ub = stable ? static_cast<double>(fleet.vehicles[v].capacity) : cap_max;
                cat->set_y(v, i, k, model.add_variable(VarKind::continuous, 0, ub, 0, 0, "y_" + str(v) + "_" + str(i) + "_" + str(k)));
            }
        }
    }
    for (std::size_t v = 0; v < V; ++v) cat->set_u(v, model.add_variable(VarKind::binary, 0, 1, 0, priorities.usage, "u_" + str(v)));
    if (!stable) {
        for (std::size_t v = 0; v < V; ++v) {
            for (std::size_t t = 0; t < T; ++t) {
                cat->set_z(v, t, model.add_variable(VarKind::binary, 0, 1, 0, priorities.type, "z_" + str(v) + "_" + str(t)));
            }
        }
    }
    if (routing == RoutingMode::commodity) {
        for (std::size_t v = 0; v < V; ++v) {
            const double ub = stable ? static_cast<double>(fleet.vehicles[v].capacity) : cap_max;
            for (std::size_t k = 0; k < K; ++k) {
                if (stable && !fleet.vehicles[v].compatible[k]) continue;
                for (std::size_t i = 0; i < L; ++i) {
                    for (std::size_t j = 0; j < L; ++j) {
                        if (i == j) continue;
                        cat->set_f(v, k, i, j,
                                   model.add_variable(VarKind::continuous, 0, ub, 0, 0,
                                                      "f_" + str(v) + "_" + str(k) + "_" + str(i) + "_" + str(j)));
                    }
                }
            }
        }
    }
    return cat;
}

// Demand satisfaction, per-vehicle capacity (stable), usage linking and
// visited linking.
//
// The usage link is sum_E x[v] <= |E| (1 - u_v): u_v = 1 marks an unused
// vehicle, which must not move.
inline void build_core(const Instance& inst, const Fleet& fleet, const VariableCatalog& cat, Model& model) {
    using detail::str;
    using detail::sub;
    const std::size_t V = cat.vehicles();
    const std::size_t L = cat.locations();
    const std::size_t K = cat.commodities();
    const double arcs = static_cast<double>(cat.num_arcs());
    for (std::size_t i = 1; i < L; ++i) {
        for (std::size_t k = 0; k < K; ++k) {
            std::vector<Term> row;
            for (std::size_t v = 0; v < V; ++v) {
                if (cat.y(v, i, k) >= 0) row.push_back({cat.y(v, i, k), 1.0});
            }
            const Quantity dem = inst.demand(i, k);
            if (row.empty()) {
                if (dem > 0) {
                    throw InfeasibleError("no vehicle can deliver commodity '" + inst.commodities[k] + "' to customer " +
                                          std::to_string(inst.customers[i - 1].id));
                }
                continue;
            }
            model.add_constraint(std::move(row), Sense::equal, static_cast<double>(dem),
                                 "demand" + sub({{"i", str(i)}, {"k", inst.commodities[k]}}));
        }
    }
    if (fleet.mode == FleetMode::stable) {
        for (std::size_t v = 0; v < V; ++v) {
            std::vector<Term> row;
            for (std::size_t i = 1; i < L; ++i) {
                for (std::size_t k = 0; k < K; ++k) {
                    if (cat.y(v, i, k) >= 0) row.push_back({cat.y(v, i, k), 1.0});
                }
            }
            if (row.empty()) continue;
            model.add_constraint(std::move(row), Sense::less_equal, static_cast<double>(fleet.vehicles[v].capacity),
                                 "capacity" + sub({{"v", str(v)}}));
        }
    }
    for (std::size_t v = 0; v < V; ++v) {
        std::vector<Term> row;
        for (std::size_t t = 0; t < cat.layers(); ++t) {
            for (std::size_t i = 0; i < L; ++i) {
                for (std::size_t j = 0; j < L; ++j) {
                    if (i != j) row.push_back({cat.x(v, t, i, j), 1.0});
                }
            }
        }
        row.push_back({cat.u(v), arcs});
        model.add_constraint(std::move(row), Sense::less_equal, arcs, "usage" + sub({{"v", str(v)}}));
    }
    for (std::size_t v = 0; v < V; ++v) {
        for (std::size_t i = 1; i < L; ++i) {
            for (std::size_t k = 0; k < K; ++k) {
                if (cat.y(v, i, k) < 0) continue;
                std::vector<Term> row{{cat.y(v, i, k), 1.0}};
                const double dem = static_cast<double>(inst.demand(i, k));
                if (dem > 0.0) {
                    for (std::size_t t = 0; t < cat.layers(); ++t) {
                        for (std::size_t j = 0; j < L; ++j) {
                            if (j != i) row.push_back({cat.x(v, t, j, i), -dem});
                        }
                    }
                }
                model.add_constraint(std::move(row), Sense::less_equal, 0.0,
                                     "visited" + sub({{"v", str(v)}, {"i", str(i)}, {"k", inst.commodities[k]}}));
            }
        }
    }
}

// Flexible fleets: one type per vehicle, capacity and compatibility through
// the type choice, and arcs restricted to the chosen type's layer. Stable
// fleets need no rows here.
inline void build_fleet(const Instance& inst, const Fleet& fleet, const VariableCatalog& cat, Model& model) {
    if (fleet.mode == FleetMode::stable) return;
    using detail::str;
    using detail::sub;
    const std::size_t V = cat.vehicles();
    const std::size_t T = cat.types();
    const std::size_t L = cat.locations();
    const std::size_t K = cat.commodities();
    for (std::size_t v = 0; v < V; ++v) {
        std::vector<Term> choice;
        for (std::size_t t = 0; t < T; ++t) choice.push_back({cat.z(v, t), 1.0});
        model.add_constraint(std::move(choice), Sense::equal, 1.0, "type_choice" + sub({{"v", str(v)}}));

        std::vector<Term> total;
        for (std::size_t i = 1; i < L; ++i) {
            for (std::size_t k = 0; k < K; ++k) total.push_back({cat.y(v, i, k), 1.0});
        }
        for (std::size_t t = 0; t < T; ++t) total.push_back({cat.z(v, t), -static_cast<double>(inst.vehicle_types[t].capacity)});
        model.add_constraint(std::move(total), Sense::less_equal, 0.0, "type_capacity" + sub({{"v", str(v)}}));

        for (std::size_t k = 0; k < K; ++k) {
            std::vector<Term> row;
            for (std::size_t i = 1; i < L; ++i) row.push_back({cat.y(v, i, k), 1.0});
            for (std::size_t t = 0; t < T; ++t) {
                const auto& vt = inst.vehicle_types[t];
                if (vt.compatible[k]) row.push_back({cat.z(v, t), -static_cast<double>(vt.capacity)});
            }
            model.add_constraint(std::move(row), Sense::less_equal, 0.0, "type_compat" + sub({{"v", str(v)}, {"k", inst.commodities[k]}}));
        }

        const double arcs = static_cast<double>(cat.num_arcs());
        for (std::size_t t = 0; t < T; ++t) {
            std::vector<Term> row;
            for (std::size_t i = 0; i < L; ++i) {
                for (std::size_t j = 0; j < L; ++j) {
                    if (i != j) row.push_back({cat.x(v, t, i, j), 1.0});
                }
            }
            row.push_back({cat.z(v, t), -arcs});
            model.add_constraint(std::move(row), Sense::less_equal, 0.0, "type_edges" + sub({{"v", str(v)}, {"t", str(t)}}));
        }
    }
}

// A depot-free connected component of one vehicle layer's used arcs.
struct Subtour {
    std::size_t vehicle = 0;
    // Type layer (always 0 for stable fleets).
    std::size_t layer = 0;
    std::vector<std::size_t> customers;
};

// Connected components (ignoring arc direction) of every vehicle layer's used
// arcs that do not contain the depot. `values` must be integral on x.
inline std::vector<Subtour> separate_subtours(const VariableCatalog& cat, std::span<const double> values) {
    std::vector<Subtour> found;
    const std::size_t L = cat.locations();
    std::vector<std::size_t> parent(L);
    std::vector<bool> touched(L);
    auto find = [&](std::size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    for (std::size_t v = 0; v < cat.vehicles(); ++v) {
        for (std::size_t t = 0; t < cat.layers(); ++t) {
            std::iota(parent.begin(), parent.end(), std::size_t{0});
            std::fill(touched.begin(), touched.end(), false);
            for (std::size_t i = 0; i < L; ++i) {
                for (std::size_t j = 0; j < L; ++j) {
                    if (i == j) continue;
                    const double x = values[static_cast<std::size_t>(cat.x(v, t, i, j))];
                    if (std::abs(x - std::round(x)) > 1e-6) throw ModelError("subtour separation needs integral arc values");
                    if (x < 0.5) continue;
                    touched[i] = touched[j] = true;
                    parent[find(i)] = find(j);
                }
            }
            std::vector<std::vector<std::size_t>> groups(L);
            for (std::size_t i = 1; i < L; ++i) {
                if (touched[i]) groups[find(i)].push_back(i);
            }
            const std::size_t depot_root = find(0);
            for (std::size_t r = 0; r < L; ++r) {
                if (groups[r].empty() || r == depot_root) continue;
                found.push_back({v, t, groups[r]});
            }
        }
    }
    std::sort(found.begin(), found.end(), [](const Subtour& a, const Subtour& b) {
        if (a.vehicle != b.vehicle) return a.vehicle < b.vehicle;
        if (a.layer != b.layer) return a.layer < b.layer;
        return a.customers < b.customers;
    });
    return found;
}

// sum_{i,j in S} x[v,(t),i,j] <= |S| - 1.
inline Constraint subtour_row(const VariableCatalog& cat, const Subtour& s) {
    std::vector<Term> row;
    for (std::size_t i : s.customers) {
        for (std::size_t j : s.customers) {
            if (i != j) row.push_back({cat.x(s.vehicle, s.layer, i, j), 1.0});
        }
    }
    std::string members;
    for (std::size_t i : s.customers) members += (members.empty() ? "" : " ") + std::to_string(i);
    return {std::move(row), Sense::less_equal, static_cast<double>(s.customers.size()) - 1.0,
            "subtour" + detail::sub({{"v", detail::str(s.vehicle)}, {"t", detail::str(s.layer)}, {"S", "{" + members + "}"}})};
}

// Degree balance per (vehicle, layer, location). Vehicle flow adds the lazy
// subtour hook; commodity flow adds per-commodity load balance at customers
// and load carried only on used arcs.
inline void build_routing(const Instance& inst, const Fleet& fleet, std::shared_ptr<const VariableCatalog> catalog, Model& model) {
    using detail::str;
    using detail::sub;
    const auto& cat = *catalog;
    const std::size_t V = cat.vehicles();
    const std::size_t L = cat.locations();
    const std::size_t K = cat.commodities();
    const bool flexible = fleet.mode == FleetMode::flexible;
    // Both routing kinds close routes at the depot through degree balance.
    for (std::size_t v = 0; v < V; ++v) {
        for (std::size_t t = 0; t < cat.layers(); ++t) {
            for (std::size_t i = 0; i < L; ++i) {
                std::vector<Term> row;
                for (std::size_t j = 0; j < L; ++j) {
                    if (j == i) continue;
                    row.push_back({cat.x(v, t, i, j), 1.0});
                    row.push_back({cat.x(v, t, j, i), -1.0});
                }
                auto tag = flexible ? "degree" + sub({{"v", str(v)}, {"t", str(t)}, {"i", str(i)}})
                                    : "degree" + sub({{"v", str(v)}, {"i", str(i)}});
                model.add_constraint(std::move(row), Sense::equal, 0.0, std::move(tag));
            }
        }
    }
    if (cat.routing_mode() == RoutingMode::vehicle) {
        model.add_lazy_hook([catalog](std::span<const double> values) {
            std::vector<Constraint> rows;
            for (const auto& s : separate_subtours(*catalog, values)) rows.push_back(subtour_row(*catalog, s));
            return rows;
        });
        return;
    }
    for (std::size_t v = 0; v < V; ++v) {
        for (std::size_t i = 1; i < L; ++i) {
            for (std::size_t k = 0; k < K; ++k) {
                if (cat.y(v, i, k) < 0) continue;
                std::vector<Term> row;
                for (std::size_t j = 0; j < L; ++j) {
                    if (j == i) continue;
                    row.push_back({cat.f(v, k, j, i), 1.0});
                    row.push_back({cat.f(v, k, i, j), -1.0});
                }
                row.push_back({cat.y(v, i, k), -1.0});
                model.add_constraint(std::move(row), Sense::equal, 0.0,
                                     "balance" + sub({{"v", str(v)}, {"i", str(i)}, {"k", inst.commodities[k]}}));
            }
        }
        for (std::size_t i = 0; i < L; ++i) {
            for (std::size_t j = 0; j < L; ++j) {
                if (i == j) continue;
                std::vector<Term> row;
                for (std::size_t k = 0; k < K; ++k) {
                    if (cat.f(v, k, i, j) >= 0) row.push_back({cat.f(v, k, i, j), 1.0});
                }
                if (row.empty()) continue;
                for (std::size_t t = 0; t < cat.layers(); ++t) {
                    row.push_back({cat.x(v, t, i, j), -static_cast<double>(detail::layer_capacity(inst, fleet, v, t))});
                }
                model.add_constraint(std::move(row), Sense::less_equal, 0.0, "carry" + sub({{"v", str(v)}, {"i", str(i)}, {"j", str(j)}}));
            }
        }
    }
}

}  // namespace fsmvrp
