#include <gtest/gtest.h>

#include "test_support.hpp"

namespace fsmvrp {
namespace {

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

BenchCell solved_cell(double time) {
    BenchCell c;
    c.status = MipStatus::optimal;
    c.time = time;
    c.gap = 0.0;
    return c;
}

BenchCell timeout_cell(double gap) {
    BenchCell c;
    c.status = MipStatus::feasible;
    c.time = 900.0;
    c.gap = gap;
    return c;
}

BenchReport report_of(std::vector<std::string> variants, std::vector<BenchRow> rows) {
    BenchReport r;
    r.vehicle_flow.assign(variants.size(), false);
    r.variants = std::move(variants);
    r.rows = std::move(rows);
    return r;
}

TEST(VariantParse, KindsAndGroups) {
    EXPECT_EQ(Variant::parse("sc").config.enabled_families().size(), 0u);
    EXPECT_EQ(Variant::parse("sf").kind.name(), "sv");
    EXPECT_EQ(Variant::parse("fv").kind.name(), "ff");
    const auto cuts = Variant::parse("sv+cuts").config.enabled_families();
    EXPECT_EQ(cuts.size(), kCutFamilies.size());
    EXPECT_TRUE(Variant::parse("ff+symmetry").config.fleet_order);
    EXPECT_FALSE(Variant::parse("sc+symmetry").config.fleet_order);
    EXPECT_TRUE(Variant::parse("fc+ordering").config.total_load);
    EXPECT_EQ(Variant::parse("sc+all").config.enabled_families(), StrengthenConfig::all_for(*ModelKind::parse("sc")).enabled_families());
}

TEST(VariantParse, RejectsUnknownParts) {
    EXPECT_THROW(Variant::parse("xx"), ModelError);
    EXPECT_THROW(Variant::parse(""), ModelError);
    EXPECT_THROW(Variant::parse("sc+bogus"), ModelError);
}

TEST(WriteReport, CsvRowFormatsValueAndTime) {
    BenchRow row{"1", 31358.95, {solved_cell(15.19)}};
    const auto csv = write_report(report_of({"sc"}, {row}), ReportFormat::csv);
    const auto lines = lines_of(csv);
    ASSERT_EQ(lines.size(), 2u);
    EXPECT_EQ(lines[1].rfind("1,31358.95,15.19,", 0), 0u) << lines[1];
}

TEST(WriteReport, TimeoutCellShowsGapInParentheses) {
    BenchRow row{"1", 100.0, {timeout_cell(0.0523)}};
    const auto lines = lines_of(write_report(report_of({"sc"}, {row}), ReportFormat::csv));
    EXPECT_EQ(lines[1].rfind("1,100.00,(5.23%),", 0), 0u) << lines[1];
    EXPECT_EQ(detail::render_cell(timeout_cell(compute_gap(100.0, 90.0))), "(10.00%)");
}

TEST(WriteReport, SingleSolvedRowCsvIsHeaderPlusOneLine) {
    BenchRow row{"a", 10.0, {solved_cell(1.0), solved_cell(2.0)}};
    const auto report = report_of({"sc", "fc"}, {row});
    for (const auto& g : report.average_gaps()) EXPECT_FALSE(g.has_value());
    EXPECT_EQ(lines_of(write_report(report, ReportFormat::csv)).size(), 2u);
}

TEST(WriteReport, RejectsEmptyRows) { EXPECT_THROW(write_report(report_of({"sc"}, {}), ReportFormat::csv), ModelError); }

TEST(WriteReport, AverageGapIsMeanOverTimeoutsOnly) {
    std::vector<BenchRow> rows{
        {"1", 10.0, {solved_cell(5.0), timeout_cell(0.10)}},
        {"2", 10.0, {timeout_cell(0.20), timeout_cell(0.30)}},
        {"3", 10.0, {solved_cell(7.0), solved_cell(8.0)}},
    };
    const auto report = report_of({"sc", "sv"}, rows);
    const auto gaps = report.average_gaps();
    ASSERT_TRUE(gaps[0] && gaps[1]);
    EXPECT_NEAR(*gaps[0], 0.20, 1e-12);
    EXPECT_NEAR(*gaps[1], 0.20, 1e-12);
    const auto lines = lines_of(write_report(report, ReportFormat::csv));
    ASSERT_EQ(lines.size(), 5u);
    EXPECT_EQ(lines.back().rfind("Avg. gap,,20.00%,20.00%", 0), 0u) << lines.back();
}

// Independent argmin: any optimal time beats any gap; ties all win.
std::vector<std::size_t> expected_best(const BenchRow& row) {
    double best_time = kInfinity;
    double best_gap = kInfinity;
    for (const auto& c : row.cells) {
        if (c.status == MipStatus::optimal) best_time = std::min(best_time, std::round(c.time * 100) / 100);
        if (c.status == MipStatus::feasible) best_gap = std::min(best_gap, std::round(c.gap * 10000) / 10000);
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < row.cells.size(); ++i) {
        const auto& c = row.cells[i];
        if (std::isfinite(best_time)) {
            if (c.status == MipStatus::optimal && std::round(c.time * 100) / 100 == best_time) out.push_back(i);
        } else if (c.status == MipStatus::feasible && std::round(c.gap * 10000) / 10000 == best_gap) {
            out.push_back(i);
        }
    }
    return out;
}

TEST(WriteReport, MarkdownBoldsRowwiseBestCells) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        BenchRow row{"r", 1.0, {}};
        for (int c = 0; c < 4; ++c) {
            const int pick = static_cast<int>(rng() % 3);
            if (pick == 0) row.cells.push_back(solved_cell(static_cast<double>(rng() % 50) / 10.0));
            if (pick == 1) row.cells.push_back(timeout_cell(static_cast<double>(rng() % 20) / 100.0));
            if (pick == 2) {
                BenchCell none;
                none.status = MipStatus::unknown;
                row.cells.push_back(none);
            }
        }
        EXPECT_EQ(best_cells(row), expected_best(row)) << "trial " << trial;
        const auto report = report_of({"sc", "sv", "fc", "ff"}, {row});
        const auto lines = lines_of(write_report(report, ReportFormat::markdown));
        const std::string& body = lines[2];
        const auto best = expected_best(row);
        for (std::size_t c = 0; c < 4; ++c) {
            const std::string cell = detail::render_cell(row.cells[c]);
            const bool bold = body.find("| **" + cell + "** |") != std::string::npos;
            if (std::find(best.begin(), best.end(), c) != best.end()) EXPECT_TRUE(bold) << body;
        }
    }
}

TEST(RunBenchmark, DeterministicClockGivesIdenticalCsv) {
    const std::vector<Instance> instances{generate_instance(1, 4, 2), generate_instance(2, 4, 2)};
    BenchParams params;
    params.clock = WorkClock::Mode::deterministic;
    params.time_limit_s = 2.0;
    params.warmstart_budget_s = 0.2;
    const std::vector<std::string> variants{"sc", "sv+cuts", "fc", "ff+all"};
    const auto a = write_report(run_benchmark(instances, variants, params), ReportFormat::csv);
    const auto b = write_report(run_benchmark(instances, variants, params), ReportFormat::csv);
    EXPECT_EQ(a, b);
}

TEST(RunBenchmark, BestValueIsRowwiseMinimum) {
    const std::vector<Instance> instances{testing::oracle_suite(1).front()};
    BenchParams params;
    params.time_limit_s = 30.0;
    const auto report = run_benchmark(instances, {"sc", "sv", "fc", "ff"}, params);
    const auto& row = report.rows.front();
    double best = kInfinity;
    for (const auto& c : row.cells) {
        EXPECT_EQ(c.status, MipStatus::optimal);
        best = std::min(best, c.objective);
    }
    EXPECT_EQ(row.best_value, best);
    EXPECT_THROW(run_benchmark(instances, {"zz"}, params), ModelError);
    EXPECT_THROW(run_benchmark({}, {"sc"}, params), ModelError);
}

TEST(SweepWarmstartBudget, ZeroBudgetKeepsConstructedSolution) {
    const Instance inst = generate_instance(6, 6, 2);
    BenchParams params;
    params.clock = WorkClock::Mode::deterministic;
    const auto variant = Variant::parse("sc+all");
    const auto points = sweep_warmstart_budget(inst, variant, {0.0}, 2.0, params);
    ASSERT_EQ(points.size(), 1u);
    EXPECT_TRUE(points[0].used_constructive);
    const auto built = build_model(inst, variant.kind, BuildOptions{variant.config, {}, std::nullopt, params.stable_slack});
    EXPECT_DOUBLE_EQ(points[0].warm_value, construct_initial(built.instance, built.fleet, params.seed).objective);
    EXPECT_LE(points[0].final_value, points[0].warm_value + 1e-9);
}

TEST(SweepWarmstartBudget, FullBudgetLeavesMipOnlyTheRoot) {
    const Instance inst = generate_instance(6, 6, 2);
    BenchParams params;
    params.clock = WorkClock::Mode::deterministic;
    const auto points = sweep_warmstart_budget(inst, Variant::parse("sc"), {2.0}, 2.0, params);
    const auto& p = points.front();
    EXPECT_FALSE(p.used_constructive);
    EXPECT_DOUBLE_EQ(p.heuristic_time, 2.0);
    EXPECT_LE(p.mip_time, 0.5 + 1e-9);
    EXPECT_DOUBLE_EQ(p.final_value, p.warm_value);
    EXPECT_TRUE(std::isfinite(p.bound));
    EXPECT_NEAR(p.gap, compute_gap(p.warm_value, p.bound), 1e-12);
}

TEST(SweepWarmstartBudget, WallClockAccountingStaysWithinTotal) {
    const Instance inst = generate_instance(9, 7, 2);
    const double total = 3.0;
    const auto points = sweep_warmstart_budget(inst, Variant::parse("sc+all"), {0.0, 1.0, 3.0}, total, BenchParams{});
    for (const auto& p : points) {
        EXPECT_LE(p.heuristic_time + p.mip_time, total + 1.0) << "budget " << p.budget;
        EXPECT_LE(p.final_value, p.warm_value + 1e-9);
    }
    EXPECT_THROW(sweep_warmstart_budget(inst, Variant::parse("sc"), {4.0}, total, BenchParams{}), ModelError);
}

TEST(WriteSweep, OneLinePerBudget) {
    SweepPoint p;
    p.budget = 10.0;
    p.warm_value = 120.0;
    p.final_value = 110.0;
    p.bound = 100.0;
    p.gap = compute_gap(110.0, 100.0);
    const auto lines = lines_of(write_sweep({p}));
    ASSERT_EQ(lines.size(), 2u);
    EXPECT_EQ(lines[1], "10.00,0.00,0.00,120.00,110.00,100.00,9.09%,no");
}

}  // namespace
}  // namespace fsmvrp
