#pragma once

#include <optional>
#include <string>

#include "formulations.hpp"
#include "strengthen.hpp"

namespace fsmvrp {

struct BuildOptions {
    StrengthenConfig strengthen;
    BranchingPriorities priorities;
    // Fleet to use; sized from the instance when absent.
    std::optional<Fleet> fleet;
    int stable_slack = 1;
};

// Throws InfeasibleError when the fleet cannot carry the demand of some
// commodity set, however it is routed.
inline void check_fleet_capacity(const Instance& inst, const Fleet& fleet) {
    if (fleet.mode == FleetMode::flexible) {
        const Quantity cap = static_cast<Quantity>(fleet.size()) * inst.max_capacity();
        if (cap < inst.overall_demand()) {
            throw InfeasibleError("fleet capacity " + std::to_string(cap) + " is below total demand " +
                                  std::to_string(inst.overall_demand()));
        }
        return;
    }
    Quantity total_cap = 0;
    for (const auto& v : fleet.vehicles) total_cap += v.capacity;
    if (total_cap < inst.overall_demand()) {
        throw InfeasibleError("fleet capacity " + std::to_string(total_cap) + " is below total demand " +
                              std::to_string(inst.overall_demand()));
    }
    for (std::size_t k = 0; k < inst.num_commodities(); ++k) {
        Quantity cap = 0;
        for (const auto& v : fleet.vehicles) {
            if (v.compatible[k]) cap += v.capacity;
        }
        if (cap < inst.commodity_demand(k)) {
            throw InfeasibleError("compatible capacity for '" + inst.commodities[k] + "' is below its demand");
        }
    }
}

// Composes variable creation, core, fleet and routing rows, then the enabled
// strengthening families, and freezes the model.
inline BuiltModel build_model(const Instance& input, const ModelKind& kind, const BuildOptions& options = {}) {
    input.validate();
    if (auto why = options.strengthen.incompatibility(kind); !why.empty()) throw ModelError(why);
    const bool reorder = options.strengthen.reorder_customers || options.strengthen.customer_assignment;
    BuiltModel built{
        .model = {},
        .catalog = nullptr,
        .kind = kind,
        .fleet = options.fleet ? *options.fleet : fleet_for(input, kind.fleet, options.stable_slack),
        .instance = reorder ? reorder_customers_farthest_first(input) : input,
    };
    if (built.fleet.mode != kind.fleet) throw ModelError("fleet mode does not match model kind " + kind.name());
    if (built.fleet.size() == 0) throw InfeasibleError("fleet is empty");
    check_fleet_capacity(built.instance, built.fleet);

    auto catalog = create_variables(built.instance, built.fleet, kind.routing, built.model, options.priorities);
    built.catalog = catalog;
    build_core(built.instance, built.fleet, *catalog, built.model);
    build_fleet(built.instance, built.fleet, *catalog, built.model);
    build_routing(built.instance, built.fleet, catalog, built.model);
    built.notes.push_back("usage link written as sum_E x[v] <= |E| (1 - u_v); u_v = 1 marks an unused vehicle");
    if (reorder) built.notes.push_back("customers re-indexed farthest first");
    apply_valid_cuts(built, options.strengthen);
    apply_symmetry(built, options.strengthen);
    built.model.freeze();
    return built;
}

inline BuiltModel build_model(const Instance& input, const std::string& kind_name, const BuildOptions& options = {}) {
    auto kind = ModelKind::parse(kind_name);
    if (!kind) throw ModelError("unknown model kind '" + kind_name + "' (expected sc, sv, fc or ff)");
    return build_model(input, *kind, options);
}

}  // namespace fsmvrp
