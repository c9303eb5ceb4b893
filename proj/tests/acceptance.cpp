// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fsmvrp/build.hpp"
#include "fsmvrp/checker.hpp"
#include "fsmvrp/harness.hpp"
#include "fsmvrp/solver.hpp"
#include "fsmvrp/warmstart.hpp"

namespace {

using namespace fsmvrp;

struct Verdict {
    bool pass = true;
    std::string detail;
};

bool close_rel(double a, double b) { return std::abs(a - b) <= 1e-6 * std::max(1.0, std::abs(b)); }

std::string fmt(const char* pattern, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, value);
    return buf;
}

// Same construction as the unit-test oracle suite: 2 to 4 customers, two
// commodities, at most three vehicles in either fleet mode.
std::vector<Instance> oracle_suite(std::size_t count) {
    std::vector<Instance> out;
    for (std::uint64_t seed = 1; out.size() < count; ++seed) {
        Instance inst = generate_instance(seed, 2 + static_cast<int>(seed % 3), 2);
        const Fleet stable = size_stable_fleet(inst, 0);
        if (stable.size() > kOracleMaxVehicles || static_cast<std::size_t>(size_flexible_fleet(inst)) > kOracleMaxVehicles) continue;
        inst.fleet = FleetSpec{FleetMode::stable, stable.pool_size, 0};
        inst.name = "oracle-" + std::to_string(seed);
        out.push_back(std::move(inst));
    }
    return out;
}

Fleet oracle_fleet(const Instance& inst, FleetMode mode) {
    return mode == FleetMode::stable ? make_stable_fleet(inst, inst.fleet->counts) : make_flexible_fleet(inst, size_flexible_fleet(inst));
}

BuiltModel build_with(const Instance& inst, const ModelKind& kind, const Fleet& fleet, const StrengthenConfig& config) {
    BuildOptions opt;
    opt.fleet = fleet;
    opt.strengthen = config;
    return build_model(inst, kind, opt);
}

SolveParams limit(double seconds) {
    SolveParams p;
    p.time_limit_s = seconds;
    return p;
}

Verdict formulation_equivalence() {
    const WorkClock clock;
    Verdict v;
    int checked = 0;
    for (const auto& inst : oracle_suite(20)) {
        for (const auto& kind : ModelKind::all()) {
            const Fleet fleet = oracle_fleet(inst, kind.fleet);
            const double oracle = brute_force_optimum(inst, fleet).value;
            const auto res = solve_mip(build_with(inst, kind, fleet, StrengthenConfig::none()), limit(120.0));
            ++checked;
            if (res.status != MipStatus::optimal || !close_rel(res.objective, oracle)) {
                v.pass = false;
                v.detail += " " + inst.name + "/" + kind.name();
            }
        }
    }
    const double elapsed = clock.elapsed();
    if (elapsed >= 600.0) v.pass = false;
    v.detail = std::to_string(checked) + " solves equal the brute-force optimum in " + fmt("%.1f", elapsed) + " s" +
               (v.detail.empty() ? "" : "; mismatches:" + v.detail);
    return v;
}

Verdict strengthening_safety() {
    Verdict v;
    int checked = 0;
    for (const auto& inst : oracle_suite(20)) {
        for (const auto& kind : ModelKind::all()) {
            const Fleet fleet = oracle_fleet(inst, kind.fleet);
            const double oracle = brute_force_optimum(inst, fleet).value;
            std::vector<std::pair<std::string, StrengthenConfig>> configs;
            for (const auto& family : StrengthenConfig::family_names()) {
                auto c = StrengthenConfig::only(family);
                if (c.incompatibility(kind).empty()) configs.emplace_back(family, c);
            }
            configs.emplace_back("all", StrengthenConfig::all_for(kind));
            for (const auto& [name, config] : configs) {
                const auto res = solve_mip(build_with(inst, kind, fleet, config), limit(120.0));
                ++checked;
                if (res.status != MipStatus::optimal || !close_rel(res.objective, oracle)) {
                    v.pass = false;
                    v.detail += " " + inst.name + "/" + kind.name() + "/" + name;
                }
            }
        }
    }
    v.detail = std::to_string(checked) + " family-by-kind solves keep the optimum" + (v.detail.empty() ? "" : "; changed:" + v.detail);
    return v;
}

Verdict subtour_soundness() {
    Verdict v;
    int solutions = 0;
    int triggered = 0;
    int without = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const Instance inst = generate_instance(1000 + seed, 3 + static_cast<int>(seed % 6), 2);
        for (const auto* name : {"sv", "ff"}) {
            const ModelKind kind = *ModelKind::parse(name);
            BuildOptions opt;
            const BuiltModel built = build_model(inst, kind, opt);
            const auto res = solve_mip(built, limit(1.0));
            triggered += res.lazy_rows_added > 0;
            if (!res.incumbent) {
                ++without;
                continue;
            }
            ++solutions;
            const auto sol = decode(built, *res.incumbent);
            const auto report = validate_solution(built.instance, built.fleet, sol);
            bool detached = false;
            for (const auto& r : sol.vehicles) detached = detached || !r.detached.empty();
            if (detached || !report.ok()) {
                v.pass = false;
                v.detail += " " + std::to_string(1000 + seed) + "/" + name;
            }
        }
    }
    if (triggered == 0) v.pass = false;
    v.detail = std::to_string(solutions) + " solutions checked (" + std::to_string(without) + " runs without incumbent), " +
               std::to_string(triggered) + " runs added subtour rows" + (v.detail.empty() ? "" : "; invalid:" + v.detail);
    return v;
}

Verdict relaxation_strength() {
    const ModelKind sc = *ModelKind::parse("sc");
    const ModelKind sv = *ModelKind::parse("sv");
    int stronger = 0;
    double sum_sc = 0.0;
    double sum_sv = 0.0;
    const int count = 30;
    for (int i = 0; i < count; ++i) {
        const auto seed = static_cast<std::uint64_t>(2000 + i);
        const Instance inst = generate_instance(seed, 5 + i % 2, 2);
        const Fleet fleet = fleet_for(inst, FleetMode::stable);
        const auto built_sc = build_with(inst, sc, fleet, StrengthenConfig::none());
        const auto built_sv = build_with(inst, sv, fleet, StrengthenConfig::none());
        const double root_sc = lp::solve_lp(relax_to_lp(built_sc.model)).objective;
        const double root_sv = lp::solve_lp(relax_to_lp(built_sv.model)).objective;
        const auto strong = build_with(inst, sc, fleet, StrengthenConfig::all_for(sc));
        const auto start = lns_improve(strong.instance, fleet, construct_initial(strong.instance, fleet, seed), {.budget_s = 1.0, .seed = seed});
        const auto best = solve_mip(strong, limit(10.0), encode_start(strong, start));
        const double best_known = std::min(best.objective, start.objective);
        const double gap_sc = compute_root_gap(best_known, root_sc);
        const double gap_sv = compute_root_gap(best_known, root_sv);
        stronger += gap_sc <= gap_sv + 1e-9;
        sum_sc += gap_sc;
        sum_sv += gap_sv;
    }
    Verdict v;
    v.pass = stronger * 10 >= count * 8;
    v.detail = std::to_string(stronger) + "/" + std::to_string(count) + " instances with sc root gap <= sv root gap; average root gap sc " +
               fmt("%.2f%%", 100.0 * sum_sc / count) + ", sv " + fmt("%.2f%%", 100.0 * sum_sv / count);
    return v;
}

Verdict warm_start_contract() {
    Verdict v;
    int runs = 0;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const Instance inst = generate_instance(3000 + seed, 5 + static_cast<int>(seed % 3), 2);
        for (const auto& kind : ModelKind::all()) {
            for (const bool strengthened : {false, true}) {
                BuildOptions opt;
                if (strengthened) opt.strengthen = StrengthenConfig::all_for(kind);
                const BuiltModel built = build_model(inst, kind, opt);
                const auto start = lns_improve(built.instance, built.fleet, construct_initial(built.instance, built.fleet, seed),
                                               {.budget_s = 0.5, .seed = seed});
                ++runs;
                const std::string who = " " + std::to_string(3000 + seed) + "/" + kind.name() + (strengthened ? "+all" : "");
                Assignment warm;
                try {
                    warm = encode_start(built, start);
                } catch (const ModelError& e) {
                    v.pass = false;
                    v.detail += who + " rejected (" + e.what() + ")";
                    continue;
                }
                if (!built.model.violations(warm.values).empty()) {
                    v.pass = false;
                    v.detail += who + " violates rows";
                    continue;
                }
                const auto res = solve_mip(built, limit(3.0), warm);
                if (!res.incumbent || res.objective > start.objective + 1e-6 * std::max(1.0, start.objective)) {
                    v.pass = false;
                    v.detail += who + " ended above the warm start";
                }
            }
        }
    }
    v.detail = std::to_string(runs) + " warm starts accepted, final incumbent never above the start" + (v.detail.empty() ? "" : ";" + v.detail);
    return v;
}

Verdict sweep_protocol() {
    Verdict v;
    const Instance inst = generate_instance(15, 15, 2);
    const double total = 12.0;
    const std::vector<double> budgets{0.0, 3.0, 6.0, 12.0};
    const auto variant = Variant::parse("sc+all");
    const BenchParams params;
    const auto points = sweep_warmstart_budget(inst, variant, budgets, total, params);
    BuildOptions opt;
    opt.strengthen = variant.config;
    const BuiltModel built = build_model(inst, variant.kind, opt);
    const double constructed = construct_initial(built.instance, built.fleet, params.seed).objective;
    if (!points.front().used_constructive || points.front().warm_value != constructed) {
        v.pass = false;
        v.detail += "budget 0 did not start from the constructed solution; ";
    }
    double worst = 0.0;
    std::string curve;
    for (const auto& p : points) {
        const double used = p.heuristic_time + p.mip_time;
        worst = std::max(worst, used - total);
        if (used > total + 1.0) v.pass = false;
        curve += " b=" + fmt("%.0f", p.budget) + " gap=" + (std::isfinite(p.gap) ? fmt("%.2f%%", 100.0 * p.gap) : "no root bound");
    }
    v.detail += "worst overrun " + fmt("%.2f", worst) + " s;" + curve;
    return v;
}

Verdict deterministic_csv() {
    std::vector<Instance> instances;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) instances.push_back(generate_instance(seed, 5, 2));
    BenchParams params;
    params.clock = WorkClock::Mode::deterministic;
    params.time_limit_s = 3.0;
    params.warmstart_budget_s = 0.5;
    const std::vector<std::string> variants{"sc", "sv+all", "fc+cuts", "ff+all"};
    const auto a = write_report(run_benchmark(instances, variants, params), ReportFormat::csv);
    const auto b = write_report(run_benchmark(instances, variants, params), ReportFormat::csv);
    Verdict v;
    v.pass = a == b;
    v.detail = std::to_string(a.size()) + " bytes, runs " + (v.pass ? "identical" : "differ");
    return v;
}

// Declared seed set for the 8-customer floor.
constexpr std::uint64_t kFloorSeeds[] = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

Verdict performance_floor() {
    Verdict v;
    const ModelKind sc = *ModelKind::parse("sc");
    double slowest = 0.0;
    for (const auto seed : kFloorSeeds) {
        const WorkClock clock;
        const Instance inst = generate_instance(seed, 8, 2);
        const Fleet fleet = make_stable_fleet(inst, {2, 2});
        const BuiltModel built = build_with(inst, sc, fleet, StrengthenConfig::all_for(sc));
        const auto start = lns_improve(built.instance, fleet, construct_initial(built.instance, fleet, seed), {.budget_s = 1.0, .seed = 1});
        const auto res = solve_mip(built, limit(60.0), encode_start(built, start));
        const double elapsed = clock.elapsed();
        slowest = std::max(slowest, elapsed);
        if (res.status != MipStatus::optimal || elapsed >= 60.0) {
            v.pass = false;
            v.detail += " seed " + std::to_string(seed) + " " + to_string(res.status) + " after " + fmt("%.1f", elapsed) + " s;";
        }
    }
    v.detail = std::to_string(std::size(kFloorSeeds)) + " instances (8 customers, 4 vehicles, 2 commodities), slowest " + fmt("%.1f", slowest) +
               " s" + (v.detail.empty() ? "" : ";" + v.detail);
    return v;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"formulation equivalence", formulation_equivalence},
        {"cut and symmetry safety", strengthening_safety},
        {"subtour soundness", subtour_soundness},
        {"relaxation strength", relaxation_strength},
        {"warm-start contract", warm_start_contract},
        {"sweep protocol", sweep_protocol},
        {"determinism", deterministic_csv},
        {"performance floor", performance_floor},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        failed += !v.pass;
        std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
