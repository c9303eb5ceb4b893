#include <gtest/gtest.h>

#include "test_support.hpp"

namespace fsmvrp {
namespace {

TEST(AddVariable, BinaryBoundsAreForcedToUnitInterval) {
    Model m;
    const int x = m.add_variable(VarKind::binary, -3.0, 7.0);
    EXPECT_EQ(m.variable(x).lower, 0.0);
    EXPECT_EQ(m.variable(x).upper, 1.0);
}

TEST(AddVariable, ContinuousBoundsAreStoredVerbatim) {
    Model m;
    const int y = m.add_variable(VarKind::continuous, 0.0, 35.0, 2.5, 7, "y");
    EXPECT_EQ(m.variable(y).lower, 0.0);
    EXPECT_EQ(m.variable(y).upper, 35.0);
    EXPECT_EQ(m.variable(y).objective, 2.5);
    EXPECT_EQ(m.variable(y).priority, 7);
}

TEST(AddVariable, RejectsInvertedBounds) {
    Model m;
    EXPECT_THROW(m.add_variable(VarKind::continuous, 2.0, 1.0), ModelError);
}

TEST(AddVariable, ReturnsFreshIds) {
    Model m;
    EXPECT_EQ(m.add_variable(VarKind::binary, 0, 1), 0);
    EXPECT_EQ(m.add_variable(VarKind::binary, 0, 1), 1);
    EXPECT_EQ(m.num_variables(), 2u);
}

TEST(AddConstraint, StoresSparseRow) {
    Model m;
    const int a = m.add_variable(VarKind::binary, 0, 1);
    const int b = m.add_variable(VarKind::binary, 0, 1);
    const int c = m.add_constraint({{a, 1.0}, {b, 1.0}}, Sense::less_equal, 1.0, "pair");
    EXPECT_EQ(m.constraint(c).row.size(), 2u);
    EXPECT_EQ(m.constraint(c).sense, Sense::less_equal);
}

TEST(AddConstraint, RejectsEmptyRowUnknownVariableAndMissingTag) {
    Model m;
    const int a = m.add_variable(VarKind::binary, 0, 1);
    EXPECT_THROW(m.add_constraint({}, Sense::equal, 0.0, "empty"), ModelError);
    EXPECT_THROW(m.add_constraint({{a + 5, 1.0}}, Sense::equal, 0.0, "unknown"), ModelError);
    EXPECT_THROW(m.add_constraint({{a, 1.0}}, Sense::equal, 0.0, ""), ModelError);
}

TEST(AddConstraint, RetrievableByTag) {
    Model m;
    const int a = m.add_variable(VarKind::continuous, 0, 10);
    const int c = m.add_constraint({{a, 1.0}}, Sense::equal, 3.0, "demand[i=1,k=chilled]");
    ASSERT_TRUE(m.find_constraint("demand[i=1,k=chilled]").has_value());
    EXPECT_EQ(*m.find_constraint("demand[i=1,k=chilled]"), c);
    EXPECT_EQ(m.constraint(c).family(), "demand");
    EXPECT_FALSE(m.find_constraint("demand[i=2,k=chilled]").has_value());
}

TEST(Freeze, FrozenModelRejectsChanges) {
    Model m;
    const int a = m.add_variable(VarKind::binary, 0, 1);
    m.freeze();
    EXPECT_THROW(m.add_variable(VarKind::binary, 0, 1), ModelError);
    EXPECT_THROW(m.add_constraint({{a, 1.0}}, Sense::equal, 0.0, "late"), ModelError);
}

TEST(RelaxToLp, DropsIntegralityAndKeepsBounds) {
    Model m;
    for (int i = 0; i < 3; ++i) m.add_variable(VarKind::binary, 0, 1);
    const Model lp = relax_to_lp(m);
    EXPECT_EQ(lp.count_kind(VarKind::continuous), 3u);
    for (const auto& v : lp.variables()) {
        EXPECT_EQ(v.lower, 0.0);
        EXPECT_EQ(v.upper, 1.0);
    }
    EXPECT_TRUE(lp.is_relaxation());
}

TEST(RelaxToLp, IsIdempotent) {
    const auto inst = testing::oracle_suite(1).front();
    const auto built = testing::build_for(inst, *ModelKind::parse("sc"));
    const Model once = relax_to_lp(built.model);
    const Model twice = relax_to_lp(once);
    EXPECT_EQ(once.to_lp_format(), twice.to_lp_format());
}

TEST(RelaxToLp, OptimumBoundsOracleFromBelow) {
    for (const auto& inst : testing::oracle_suite(8)) {
        for (const auto& kind : ModelKind::all()) {
            const auto built = testing::build_for(inst, kind);
            const double oracle = brute_force_optimum(built.instance, built.fleet).value;
            const auto lp = lp::solve_lp(relax_to_lp(built.model));
            ASSERT_EQ(lp.status, lp::Status::optimal);
            EXPECT_LE(lp.objective, oracle + 1e-6) << inst.name << " " << kind.name();
        }
    }
}

TEST(ModelTags, EveryRowCarriesAKnownFamily) {
    const std::set<std::string> known = {"demand", "capacity", "usage", "visited", "type_choice", "type_capacity", "type_compat",
                                         "type_edges", "degree", "balance", "carry", "min_visits", "min_vehicles", "max_vehicles",
                                         "fractional_subtour", "depot_outdegree", "single_visit", "usage_order", "visit_order",
                                         "fleet_order", "customer_assignment", "total_load"};
    const auto inst = testing::oracle_suite(3).back();
    for (const auto& kind : ModelKind::all()) {
        const auto built = testing::build_for(inst, kind, StrengthenConfig::all_for(kind));
        for (const auto& c : built.model.constraints()) EXPECT_TRUE(known.count(std::string(c.family()))) << c.tag;
    }
}

TEST(Violations, ReportsBoundsIntegralityAndRowTags) {
    Model m;
    const int a = m.add_variable(VarKind::binary, 0, 1, 0, 0, "a");
    const int b = m.add_variable(VarKind::continuous, 0, 2, 0, 0, "b");
    m.add_constraint({{a, 1.0}, {b, 1.0}}, Sense::greater_equal, 2.0, "cover");
    EXPECT_TRUE(m.violations(std::vector<double>{1.0, 1.0}).empty());
    const auto bad = m.violations(std::vector<double>{0.5, 3.0});
    EXPECT_NE(std::find(bad.begin(), bad.end(), "integrality[a]"), bad.end());
    EXPECT_NE(std::find(bad.begin(), bad.end(), "bounds[b]"), bad.end());
    const auto short_row = m.violations(std::vector<double>{0.0, 1.0});
    EXPECT_NE(std::find(short_row.begin(), short_row.end(), "cover"), short_row.end());
}

TEST(LpExport, WritesTagsAsCommentsAndSections) {
    Model m;
    const int a = m.add_variable(VarKind::binary, 0, 1, 3.0, 0, "a");
    const int b = m.add_variable(VarKind::continuous, 0, 4, -1.0, 0, "b");
    m.add_constraint({{a, 1.0}, {b, 2.0}}, Sense::less_equal, 5.0, "usage[v=0]");
    const std::string text = m.to_lp_format();
    EXPECT_NE(text.find("Minimize"), std::string::npos);
    EXPECT_NE(text.find("\\ usage[v=0]"), std::string::npos);
    EXPECT_NE(text.find("a + 2 b <= 5"), std::string::npos);
    EXPECT_NE(text.find("Binaries\n a"), std::string::npos);
    EXPECT_NE(text.find("0 <= b <= 4"), std::string::npos);
}

}  // namespace
}  // namespace fsmvrp
