#include <gtest/gtest.h>

#include "test_support.hpp"

namespace fsmvrp {
namespace {

using testing::make_instance;

struct Case {
    Instance inst;
    Fleet fleet;
    RoutingSolution solution;
};

Case solved_case() {
    Instance inst = testing::oracle_suite(3).back();
    Fleet fleet = testing::oracle_fleet(inst, FleetMode::stable);
    RoutingSolution sol = brute_force_optimum(inst, fleet).solution;
    return {std::move(inst), std::move(fleet), std::move(sol)};
}

VehicleRoute& first_used(RoutingSolution& sol) {
    return *std::find_if(sol.vehicles.begin(), sol.vehicles.end(), [](const VehicleRoute& r) { return r.used(); });
}

TEST(ValidateSolution, OracleSolutionsPass) {
    for (const auto& inst : testing::oracle_suite(20)) {
        for (const auto mode : {FleetMode::stable, FleetMode::flexible}) {
            const Fleet fleet = testing::oracle_fleet(inst, mode);
            const auto oracle = brute_force_optimum(inst, fleet);
            const auto report = validate_solution(inst, fleet, oracle.solution);
            EXPECT_TRUE(report.ok()) << inst.name << ": " << (report.failures.empty() ? "" : report.failures.front());
            EXPECT_NEAR(report.objective, oracle.value, 1e-9);
        }
    }
}

TEST(ValidateSolution, NegativeDeliveryBreaksDemand) {
    Case c = solved_case();
    auto& r = first_used(c.solution);
    r.deliveries.begin()->second[0] -= 1;
    const auto report = validate_solution(c.inst, c.fleet, c.solution);
    EXPECT_FALSE(report.demand);
    EXPECT_FALSE(report.ok());
}

TEST(ValidateSolution, OverloadBreaksCapacity) {
    Case c = solved_case();
    auto& r = first_used(c.solution);
    r.deliveries.begin()->second[0] += c.fleet.cap_max + 1;
    const auto report = validate_solution(c.inst, c.fleet, c.solution);
    EXPECT_FALSE(report.capacity);
}

TEST(ValidateSolution, IncompatibleCommodityIsFlagged) {
    const Instance inst = make_instance({{3, 4, {2, 1}}}, {{"refrigerated", 10, 1.5, {true, true}}, {"regular", 10, 1.0, {false, true}}});
    const Fleet fleet = make_stable_fleet(inst, {0, 1});
    RoutingSolution sol;
    sol.vehicles.push_back({1, {1}, {}, {{1, {2, 1}}}});
    const auto report = validate_solution(inst, fleet, sol);
    EXPECT_FALSE(report.compatibility);
    EXPECT_TRUE(report.demand);
}

TEST(ValidateSolution, DeliveryWithoutVisitBreaksLinkage) {
    const Instance inst = make_instance({{3, 4, {2, 1}}, {6, 8, {1, 1}}}, {{"refrigerated", 10, 1.0, {true, true}}});
    const Fleet fleet = make_stable_fleet(inst, {1});
    RoutingSolution sol;
    sol.vehicles.push_back({0, {1}, {}, {{1, {2, 1}}, {2, {1, 1}}}});
    const auto report = validate_solution(inst, fleet, sol);
    EXPECT_FALSE(report.linkage);
    EXPECT_TRUE(report.capacity);
}

TEST(ValidateSolution, DetachedCycleBreaksConnectivity) {
    const Instance inst = make_instance({{3, 4, {1, 0}}, {3, 5, {0, 1}}}, {{"refrigerated", 10, 1.0, {true, true}}});
    const Fleet fleet = make_stable_fleet(inst, {1});
    RoutingSolution sol;
    VehicleRoute r;
    r.type = 0;
    r.detached = {{1, 2}};
    r.deliveries = {{1, {1, 0}}, {2, {0, 1}}};
    sol.vehicles.push_back(r);
    const auto report = validate_solution(inst, fleet, sol);
    EXPECT_FALSE(report.connectivity);
    EXPECT_FALSE(report.ok());
}

TEST(ValidateSolution, WrongVehicleCountBreaksFleet) {
    Case c = solved_case();
    c.solution.vehicles.pop_back();
    EXPECT_FALSE(validate_solution(c.inst, c.fleet, c.solution).fleet);
}

TEST(ObjectiveOf, EmptySolutionCostsNothing) {
    const Instance inst = make_instance({{3, 4, {1, 0}}}, {{"refrigerated", 10, 2.0, {true, true}}});
    const Fleet fleet = make_stable_fleet(inst, {2});
    RoutingSolution sol;
    sol.vehicles.resize(2, VehicleRoute{0, {}, {}, {}});
    EXPECT_EQ(objective_of(inst, fleet, sol), 0.0);
}

TEST(ObjectiveOf, RoundTripTimesCostPerKm) {
    const Instance inst = make_instance({{3, 4, {1, 0}}}, {{"refrigerated", 10, 2.0, {true, true}}});
    const Fleet fleet = make_stable_fleet(inst, {1});
    RoutingSolution sol;
    sol.vehicles.push_back({0, {1}, {}, {{1, {1, 0}}}});
    EXPECT_DOUBLE_EQ(objective_of(inst, fleet, sol), 20.0);
}

TEST(BruteForceOptimum, SingleCustomerUsesCheapestCompatibleType) {
    const Instance inst = make_instance({{3, 4, {0, 2}}}, {{"refrigerated", 10, 1.5, {true, true}}, {"regular", 10, 1.0, {false, true}}});
    const auto res = brute_force_optimum(inst, make_flexible_fleet(inst, 1));
    EXPECT_DOUBLE_EQ(res.value, 10.0);
    EXPECT_EQ(res.solution.vehicles[0].type, 1);
    const Instance chilled = make_instance({{3, 4, {2, 0}}}, {{"refrigerated", 10, 1.5, {true, true}}, {"regular", 10, 1.0, {false, true}}});
    EXPECT_DOUBLE_EQ(brute_force_optimum(chilled, make_flexible_fleet(chilled, 1)).value, 15.0);
}

TEST(BruteForceOptimum, OversizedDemandNeedsTwoRoundTrips) {
    const Instance inst = make_instance({{3, 4, {8, 7}}}, {{"truck", 10, 1.5, {true, true}}});
    const auto res = brute_force_optimum(inst, make_stable_fleet(inst, {2}));
    EXPECT_DOUBLE_EQ(res.value, 4 * 5.0 * 1.5);
    EXPECT_EQ(res.solution.used_vehicles(), 2u);
}

TEST(BruteForceOptimum, ThrowsBeyondSizeGuardAndWhenInfeasible) {
    const Instance big = generate_instance(1, 6, 2);
    EXPECT_THROW(brute_force_optimum(big, make_flexible_fleet(big, 2)), ModelError);
    const Instance inst = make_instance({{3, 4, {8, 7}}}, {{"truck", 10, 1.5, {true, true}}});
    EXPECT_THROW(brute_force_optimum(inst, make_stable_fleet(inst, {4})), ModelError);
    EXPECT_THROW(brute_force_optimum(inst, make_stable_fleet(inst, {1})), InfeasibleError);
}

// Random vehicle-to-customer assignments in random orders, kept when the
// deliveries can be filled.
TEST(BruteForceOptimum, NoRandomFeasibleSolutionIsCheaper) {
    std::mt19937_64 rng(17);
    for (const auto& inst : testing::oracle_suite(20)) {
        for (const auto mode : {FleetMode::stable, FleetMode::flexible}) {
            const Fleet fleet = testing::oracle_fleet(inst, mode);
            const double best = brute_force_optimum(inst, fleet).value;
            int feasible = 0;
            for (int trial = 0; trial < 200; ++trial) {
                RoutingSolution sol;
                sol.vehicles.resize(fleet.size());
                for (std::size_t v = 0; v < fleet.size(); ++v) {
                    sol.vehicles[v].type = mode == FleetMode::stable ? fleet.vehicles[v].type : static_cast<int>(rng() % inst.num_types());
                }
                for (const auto& c : inst.customers) {
                    const std::size_t copies = 1 + rng() % 2;
                    for (std::size_t k = 0; k < copies; ++k) {
                        auto& route = sol.vehicles[rng() % fleet.size()].route;
                        if (std::find(route.begin(), route.end(), c.id) == route.end()) route.push_back(c.id);
                    }
                }
                for (auto& r : sol.vehicles) {
                    std::shuffle(r.route.begin(), r.route.end(), rng);
                    if (r.route.empty() && mode == FleetMode::flexible) r.type = -1;
                }
                if (!fill_deliveries(inst, fleet, sol)) continue;
                const auto report = validate_solution(inst, fleet, sol);
                if (!report.ok()) continue;
                ++feasible;
                EXPECT_GE(report.objective, best - 1e-9) << inst.name;
            }
            EXPECT_GT(feasible, 0) << inst.name;
        }
    }
}

TEST(BruteForceOptimum, InvariantUnderCustomerReindexing) {
    for (const auto& inst : testing::oracle_suite(10)) {
        Instance permuted = inst;
        std::reverse(permuted.customers.begin(), permuted.customers.end());
        for (auto& c : permuted.customers) c.id += 100;
        permuted.compute_euclidean_distances();
        permuted.validate();
        for (const auto mode : {FleetMode::stable, FleetMode::flexible}) {
            const double a = brute_force_optimum(inst, testing::oracle_fleet(inst, mode)).value;
            const double b = brute_force_optimum(permuted, testing::oracle_fleet(permuted, mode)).value;
            EXPECT_TRUE(testing::close_rel(a, b)) << inst.name;
        }
    }
}

}  // namespace
}  // namespace fsmvrp
