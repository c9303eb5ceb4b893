#include <gtest/gtest.h>

#include "test_support.hpp"

namespace fsmvrp {
namespace {

struct RandomLp {
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    std::vector<double> c;
    std::vector<double> upper;
};

// min c x, A x <= b, 0 <= x <= upper with b >= 0; upper bounds become rows in
// the tableau oracle.
RandomLp random_lp(std::mt19937_64& rng, std::size_t n, std::size_t m) {
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::uniform_real_distribution<double> rhs(0.5, 5.0);
    RandomLp lp;
    lp.A.assign(m, std::vector<double>(n));
    for (auto& row : lp.A) {
        for (auto& a : row) a = std::round(coef(rng) * 100.0) / 100.0;
    }
    for (std::size_t i = 0; i < m; ++i) lp.b.push_back(std::round(rhs(rng) * 10.0) / 10.0);
    for (std::size_t j = 0; j < n; ++j) lp.c.push_back(std::round(coef(rng) * 100.0) / 100.0);
    for (std::size_t j = 0; j < n; ++j) lp.upper.push_back(1.0 + static_cast<double>(rng() % 4));
    return lp;
}

Model to_model(const RandomLp& lp) {
    Model m;
    for (std::size_t j = 0; j < lp.c.size(); ++j) m.add_variable(VarKind::continuous, 0.0, lp.upper[j], lp.c[j]);
    for (std::size_t i = 0; i < lp.A.size(); ++i) {
        std::vector<Term> row;
        for (std::size_t j = 0; j < lp.c.size(); ++j) {
            if (lp.A[i][j] != 0.0) row.push_back({static_cast<int>(j), lp.A[i][j]});
        }
        m.add_constraint(std::move(row), Sense::less_equal, lp.b[i], "row[" + std::to_string(i) + "]");
    }
    return m;
}

double oracle_minimum(const RandomLp& lp) {
    auto A = lp.A;
    auto b = lp.b;
    for (std::size_t j = 0; j < lp.c.size(); ++j) {
        std::vector<double> row(lp.c.size(), 0.0);
        row[j] = 1.0;
        A.push_back(row);
        b.push_back(lp.upper[j]);
    }
    return *testing::tableau_minimum(A, b, lp.c);
}

TEST(SolveLp, BoundOptimumWithoutRows) {
    Model m;
    m.add_variable(VarKind::continuous, 0.0, 1.0, -1.0);
    const auto r = lp::solve_lp(m);
    ASSERT_EQ(r.status, lp::Status::optimal);
    EXPECT_DOUBLE_EQ(r.objective, -1.0);
    EXPECT_DOUBLE_EQ(r.values[0], 1.0);
}

TEST(SolveLp, ContradictoryRowsAreInfeasible) {
    Model m;
    const int x = m.add_variable(VarKind::continuous, 0.0, kInfinity, 0.0);
    m.add_constraint({{x, 1.0}}, Sense::greater_equal, 2.0, "low");
    m.add_constraint({{x, 1.0}}, Sense::less_equal, 1.0, "high");
    EXPECT_EQ(lp::solve_lp(m).status, lp::Status::infeasible);
}

TEST(SolveLp, DetectsUnboundedness) {
    Model m;
    const int x = m.add_variable(VarKind::continuous, 0.0, kInfinity, -1.0);
    const int y = m.add_variable(VarKind::continuous, 0.0, kInfinity, 0.0);
    m.add_constraint({{x, 1.0}, {y, -1.0}}, Sense::less_equal, 1.0, "gap");
    EXPECT_EQ(lp::solve_lp(m).status, lp::Status::unbounded);
}

TEST(SolveLp, RejectsEmptyModel) { EXPECT_THROW(lp::solve_lp(Model{}), ModelError); }

TEST(SolveLp, HandlesEqualityAndFreeVariables) {
    Model m;
    const int x = m.add_variable(VarKind::continuous, -kInfinity, kInfinity, 1.0);
    const int y = m.add_variable(VarKind::continuous, 0.0, 3.0, 2.0);
    m.add_constraint({{x, 1.0}, {y, 1.0}}, Sense::equal, 4.0, "sum");
    m.add_constraint({{x, 1.0}}, Sense::greater_equal, -2.0, "floor");
    const auto r = lp::solve_lp(m);
    ASSERT_EQ(r.status, lp::Status::optimal);
    EXPECT_NEAR(r.objective, 4.0 + 0.0, 1e-9);
    EXPECT_NEAR(r.values[0], 4.0, 1e-9);
}

TEST(SolveLp, MatchesDenseTableauOnRandomLps) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const RandomLp lp = random_lp(rng, 10, 3 + static_cast<std::size_t>(trial % 8));
        const Model m = to_model(lp);
        const auto r = lp::solve_lp(m);
        ASSERT_EQ(r.status, lp::Status::optimal) << "trial " << trial;
        EXPECT_NEAR(r.objective, oracle_minimum(lp), 1e-7) << "trial " << trial;
        EXPECT_TRUE(m.violations(r.values, 1e-7).empty()) << "trial " << trial;
    }
}

// min c x, A x >= b, 0 <= x <= u with c, A, b >= 0 and half the costs zero, so
// the dual phase starts from a highly degenerate slack basis. Checked against
// the dual max b y - u w, A^T y - w <= c, y, w >= 0 solved by the tableau.
TEST(SolveLp, DegenerateCoveringLpsMatchTheirDual) {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int optimal = 0;
    int infeasible = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 12;
        const std::size_t m = 4 + static_cast<std::size_t>(trial % 6);
        std::vector<std::vector<double>> A(m, std::vector<double>(n, 0.0));
        std::vector<double> b(m), c(n), u(n);
        for (std::size_t i = 0; i < m; ++i) {
            for (auto& a : A[i]) a = unit(rng) < 0.5 ? std::round(unit(rng) * 4.0) : 0.0;
            A[i][i] = std::max(A[i][i], 1.0);
        }
        for (auto& v : b) v = std::round(1.0 + unit(rng) * 4.0);
        for (auto& v : c) v = unit(rng) < 0.5 ? 0.0 : std::round(unit(rng) * 10.0);
        for (auto& v : u) v = 2.0 + static_cast<double>(rng() % 3);

        std::vector<std::vector<double>> dual_rows(n, std::vector<double>(m + n, 0.0));
        std::vector<double> dual_cost(m + n);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < m; ++i) dual_rows[j][i] = A[i][j];
            dual_rows[j][m + j] = -1.0;
            dual_cost[m + j] = u[j];
        }
        for (std::size_t i = 0; i < m; ++i) dual_cost[i] = -b[i];
        const auto dual_min = testing::tableau_minimum(dual_rows, c, dual_cost);

        Model model;
        for (std::size_t j = 0; j < n; ++j) model.add_variable(VarKind::continuous, 0.0, u[j], c[j]);
        for (std::size_t i = 0; i < m; ++i) {
            std::vector<Term> row;
            for (std::size_t j = 0; j < n; ++j) {
                if (A[i][j] != 0.0) row.push_back({static_cast<int>(j), A[i][j]});
            }
            model.add_constraint(std::move(row), Sense::greater_equal, b[i], "cover[" + std::to_string(i) + "]");
        }
        const auto perturbed = lp::solve_lp(model);
        const auto plain = lp::solve_lp(model, nullptr, {.dual_perturbation = 0.0});
        if (!dual_min) {
            // An unbounded dual certifies an infeasible primal.
            ++infeasible;
            EXPECT_EQ(perturbed.status, lp::Status::infeasible) << "trial " << trial;
            EXPECT_EQ(plain.status, lp::Status::infeasible) << "trial " << trial;
            continue;
        }
        ++optimal;
        ASSERT_EQ(perturbed.status, lp::Status::optimal) << "trial " << trial;
        ASSERT_EQ(plain.status, lp::Status::optimal) << "trial " << trial;
        EXPECT_NEAR(perturbed.objective, -*dual_min, 1e-7) << "trial " << trial;
        EXPECT_NEAR(plain.objective, -*dual_min, 1e-7) << "trial " << trial;
        EXPECT_TRUE(model.violations(perturbed.values, 1e-7).empty()) << "trial " << trial;
    }
    EXPECT_GT(optimal, 50);
}

TEST(Simplex, WarmResolveAfterBoundChangeMatchesColdSolve) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        RandomLp lp = random_lp(rng, 10, 6);
        const Model m = to_model(lp);
        lp::Simplex warm(m);
        ASSERT_EQ(warm.solve(), lp::Status::optimal);
        const int j = static_cast<int>(rng() % 10);
        const double hi = std::floor(warm.value(j) * 0.5);
        warm.set_bounds(j, 0.0, hi);
        ASSERT_EQ(warm.solve(), lp::Status::optimal);
        lp.upper[static_cast<std::size_t>(j)] = hi;
        EXPECT_NEAR(warm.objective(), oracle_minimum(lp), 1e-7) << "trial " << trial;
    }
}

TEST(Simplex, SnapshotRestoreReturnsToTheSameOptimum) {
    std::mt19937_64 rng(5);
    const RandomLp lp = random_lp(rng, 10, 7);
    const Model m = to_model(lp);
    lp::Simplex s(m);
    ASSERT_EQ(s.solve(), lp::Status::optimal);
    const double before = s.objective();
    const auto values = s.values();
    const auto snap = s.snapshot();
    s.set_bounds(0, 0.0, 0.0);
    s.set_bounds(1, 0.0, 0.0);
    s.solve();
    s.set_bounds(0, 0.0, lp.upper[0]);
    s.set_bounds(1, 0.0, lp.upper[1]);
    s.restore(snap);
    EXPECT_EQ(s.status(), lp::Status::optimal);
    EXPECT_DOUBLE_EQ(s.objective(), before);
    EXPECT_EQ(s.values(), values);
    ASSERT_EQ(s.solve(), lp::Status::optimal);
    EXPECT_NEAR(s.objective(), before, 1e-9);
}

TEST(Simplex, RestoreRejectsSnapshotFromBeforeAddedRows) {
    Model m;
    const int x = m.add_variable(VarKind::continuous, 0.0, 4.0, -1.0);
    lp::Simplex s(m);
    s.solve();
    const auto snap = s.snapshot();
    const std::vector<Term> row{{x, 1.0}};
    s.add_row(row, Sense::less_equal, 2.0);
    EXPECT_THROW(s.restore(snap), ModelError);
    ASSERT_EQ(s.solve(), lp::Status::optimal);
    EXPECT_NEAR(s.objective(), -2.0, 1e-9);
}

TEST(Simplex, IterationLimitGivesValidLowerBound) {
    std::mt19937_64 rng(77);
    int limited = 0;
    for (int trial = 0; trial < 40; ++trial) {
        RandomLp lp = random_lp(rng, 10, 8);
        const Model m = to_model(lp);
        lp::Simplex s(m);
        ASSERT_EQ(s.solve(), lp::Status::optimal);
        // Tighten several bounds so the dual phase needs pivots.
        for (int j = 0; j < 10; j += 2) {
            const double hi = std::floor(s.value(j) * 0.5);
            s.set_bounds(j, 0.0, hi);
            lp.upper[static_cast<std::size_t>(j)] = hi;
        }
        const auto status = s.solve(nullptr, 1);
        const double exact = oracle_minimum(lp);
        if (status == lp::Status::iteration_limit) {
            ++limited;
            EXPECT_LE(s.limit_bound(), exact + 1e-7) << "trial " << trial;
        } else {
            ASSERT_EQ(status, lp::Status::optimal);
            EXPECT_NEAR(s.objective(), exact, 1e-7);
        }
        ASSERT_EQ(s.solve(), lp::Status::optimal);
        EXPECT_NEAR(s.objective(), exact, 1e-7) << "trial " << trial;
    }
    EXPECT_GT(limited, 0);
}

TEST(Simplex, AddedRowsResolveToTheTighterOptimum) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        RandomLp lp = random_lp(rng, 10, 4);
        const Model m = to_model(lp);
        lp::Simplex s(m);
        ASSERT_EQ(s.solve(), lp::Status::optimal);
        std::vector<double> extra(10, 0.0);
        std::vector<Term> row;
        for (int j = 0; j < 10; ++j) {
            extra[static_cast<std::size_t>(j)] = 1.0;
            row.push_back({j, 1.0});
        }
        const auto x = s.values();
        const double cap = std::floor(std::accumulate(x.begin(), x.end(), 0.0) * 0.5);
        s.add_row(row, Sense::less_equal, cap);
        lp.A.push_back(extra);
        lp.b.push_back(cap);
        ASSERT_EQ(s.solve(), lp::Status::optimal);
        EXPECT_NEAR(s.objective(), oracle_minimum(lp), 1e-7) << "trial " << trial;
    }
}

TEST(Simplex, LoadedBasisReproducesOptimum) {
    std::mt19937_64 rng(8);
    const RandomLp lp = random_lp(rng, 10, 6);
    const Model m = to_model(lp);
    lp::Simplex first(m);
    ASSERT_EQ(first.solve(), lp::Status::optimal);
    lp::Simplex second(m);
    second.load_basis(first.basis());
    ASSERT_EQ(second.solve(), lp::Status::optimal);
    EXPECT_NEAR(second.objective(), first.objective(), 1e-9);
    EXPECT_EQ(second.iterations(), 0);
}

TEST(Simplex, DeadlineStopsWithTimeLimit) {
    std::mt19937_64 rng(3);
    const Model m = to_model(random_lp(rng, 10, 6));
    WorkClock clock(WorkClock::Mode::deterministic);
    const Deadline deadline(clock, 0.0);
    lp::Simplex s(m);
    EXPECT_EQ(s.solve(&deadline), lp::Status::time_limit);
}

}  // namespace
}  // namespace fsmvrp
