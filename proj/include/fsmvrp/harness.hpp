#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "build.hpp"
#include "checker.hpp"
#include "solver.hpp"
#include "strengthen.hpp"
#include "warmstart.hpp"

namespace fsmvrp {

// A model kind plus strengthening, written "sc", "sc+cuts", "ff+symmetry+ordering"
// or "sv+all".
struct Variant {
    ModelKind kind;
    StrengthenConfig config;
    std::string label;

    static Variant parse(const std::string& text) {
        std::vector<std::string> parts;
        std::stringstream in(text);
        std::string part;
        while (std::getline(in, part, '+')) parts.push_back(part);
        if (parts.empty() || parts.front().empty()) throw ModelError("empty variant");
        const auto kind = ModelKind::parse(parts.front());
        if (!kind) throw ModelError("unknown model '" + parts.front() + "' in variant '" + text + "' (expected sc, sv, fc or ff)");
        Variant v{*kind, StrengthenConfig::none(), text};
        for (std::size_t i = 1; i < parts.size(); ++i) {
            const std::string& group = parts[i];
            if (group == "all") {
                v.config = StrengthenConfig::all_for(v.kind);
            } else if (group == "cuts") {
                parse_family_list("all", kCutFamilies, v.kind, v.config);
            } else if (group == "symmetry") {
                parse_family_list("all", kSymmetryFamilies, v.kind, v.config);
            } else if (group == "ordering") {
                parse_family_list("all", kOrderingFamilies, v.kind, v.config);
            } else {
                throw ModelError("unknown variant part '" + group + "' in '" + text + "' (expected cuts, symmetry, ordering or all)");
            }
        }
        return v;
    }
};

struct BenchParams {
    double time_limit_s = 900.0;
    WorkClock::Mode clock = WorkClock::Mode::wall;
    // Heuristic seconds before the MIP; negative runs the MIP cold.
    double warmstart_budget_s = -1.0;
    std::uint64_t seed = 1;
    int stable_slack = 1;
};

struct SolveOutcome {
    std::optional<BuiltModel> built;
    MipResult result;
    bool infeasible = false;
    std::optional<double> warm_value;
};

// Builds and solves one variant. Model-level infeasibility (a fleet that
// cannot carry the demand) is reported instead of thrown.
inline SolveOutcome solve_variant(const Instance& inst, const Variant& variant, const BenchParams& params) {
    SolveOutcome out;
    BuildOptions options;
    options.strengthen = variant.config;
    options.stable_slack = params.stable_slack;
    try {
        out.built.emplace(build_model(inst, variant.kind, options));
    } catch (const InfeasibleError&) {
        out.infeasible = true;
        out.result.status = MipStatus::infeasible;
        return out;
    }
    const BuiltModel& built = *out.built;
    SolveParams sp;
    sp.time_limit_s = params.time_limit_s;
    sp.clock = params.clock;
    sp.seed = params.seed;
    std::optional<Assignment> warm;
    if (params.warmstart_budget_s >= 0.0) {
        try {
            const auto initial = construct_initial(built.instance, built.fleet, params.seed);
            const auto improved = lns_improve(built.instance, built.fleet, initial,
                                              {.budget_s = params.warmstart_budget_s, .seed = params.seed, .clock = params.clock});
            warm = encode_start(built, improved);
            out.warm_value = improved.objective;
        } catch (const InfeasibleError&) {
            // No heuristic start; the MIP decides feasibility.
        }
    }
    out.result = solve_mip(built, sp, warm);
    out.infeasible = out.result.status == MipStatus::infeasible;
    return out;
}

struct BenchCell {
    MipStatus status = MipStatus::unknown;
    double time = 0.0;
    double gap = kInfinity;
    double objective = kInfinity;
    long subtour_cuts = 0;
    bool vehicle_flow = false;
    double root_time = 0.0;
    double root_value = -kInfinity;
    double first_time = kInfinity;
    double first_value = kInfinity;

    bool solved() const { return status == MipStatus::optimal || status == MipStatus::infeasible; }
    bool timed_out() const { return status == MipStatus::feasible || status == MipStatus::unknown; }
};

struct BenchRow {
    std::string instance;
    double best_value = kInfinity;
    std::vector<BenchCell> cells;
};

struct BenchReport {
    std::vector<std::string> variants;
    std::vector<bool> vehicle_flow;
    std::vector<BenchRow> rows;

    // Mean gap over the timed-out cells of each variant that hold an incumbent.
    std::vector<std::optional<double>> average_gaps() const {
        std::vector<std::optional<double>> out(variants.size());
        for (std::size_t c = 0; c < variants.size(); ++c) {
            double sum = 0.0;
            int count = 0;
            for (const auto& row : rows) {
                const auto& cell = row.cells[c];
                if (cell.timed_out() && std::isfinite(cell.gap)) {
                    sum += cell.gap;
                    ++count;
                }
            }
            if (count) out[c] = sum / count;
        }
        return out;
    }
};

inline BenchCell cell_from(const SolveOutcome& outcome, const Variant& variant) {
    BenchCell cell;
    const auto& r = outcome.result;
    cell.status = r.status;
    cell.vehicle_flow = variant.kind.routing == RoutingMode::vehicle;
    if (outcome.infeasible && !outcome.built) return cell;
    cell.time = r.time;
    cell.gap = r.incumbent ? r.gap : kInfinity;
    cell.objective = r.incumbent ? r.objective : kInfinity;
    cell.subtour_cuts = r.lazy_rows_added;
    cell.root_time = r.root_lp_time;
    cell.root_value = r.root_status == lp::Status::optimal ? r.root_lp_value : -kInfinity;
    cell.first_time = r.first_incumbent_time;
    cell.first_value = r.first_incumbent_value;
    return cell;
}

// Runs every (instance, variant) pair with the shared limits; the best value
// of a row is the smallest incumbent over its variants.
inline BenchReport run_benchmark(const std::vector<Instance>& instances, const std::vector<std::string>& variants,
                                 const BenchParams& params) {
    if (instances.empty()) throw ModelError("benchmark needs at least one instance");
    if (variants.empty()) throw ModelError("benchmark needs at least one variant");
    std::vector<Variant> parsed;
    for (const auto& v : variants) parsed.push_back(Variant::parse(v));
    BenchReport report;
    for (const auto& v : parsed) {
        report.variants.push_back(v.label);
        report.vehicle_flow.push_back(v.kind.routing == RoutingMode::vehicle);
    }
    for (std::size_t i = 0; i < instances.size(); ++i) {
        BenchRow row;
        row.instance = instances[i].name.empty() ? std::to_string(i + 1) : instances[i].name;
        for (const auto& v : parsed) {
            row.cells.push_back(cell_from(solve_variant(instances[i], v, params), v));
            row.best_value = std::min(row.best_value, row.cells.back().objective);
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

namespace detail {

inline std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string percent(double fraction) { return std::isfinite(fraction) ? fixed2(100.0 * fraction) + "%" : "-"; }

// Solved cells show the time; timeouts show the gap in parentheses.
inline std::string render_cell(const BenchCell& c) {
    if (c.status == MipStatus::infeasible) return "infeasible";
    if (c.status == MipStatus::unbounded) return "unbounded";
    if (c.solved()) return fixed2(c.time);
    return "(" + percent(c.gap) + ")";
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return out + "\"";
}

inline std::string value_or_dash(double v) { return std::isfinite(v) ? fixed2(v) : "-"; }

// Ranking key for best-cell marking: solved times before any gap.
inline std::pair<int, double> cell_rank(const BenchCell& c) {
    if (c.status == MipStatus::optimal) return {0, std::round(c.time * 100.0) / 100.0};
    if (c.timed_out() && std::isfinite(c.gap)) return {1, std::round(c.gap * 10000.0) / 10000.0};
    return {2, 0.0};
}

}  // namespace detail

// Indices of the best cells of a row; several when tied.
inline std::vector<std::size_t> best_cells(const BenchRow& row) {
    std::vector<std::size_t> best;
    for (std::size_t c = 0; c < row.cells.size(); ++c) {
        const auto rank = detail::cell_rank(row.cells[c]);
        if (rank.first == 2) continue;
        if (best.empty() || rank < detail::cell_rank(row.cells[best.front()])) {
            best.assign(1, c);
        } else if (rank == detail::cell_rank(row.cells[best.front()])) {
            best.push_back(c);
        }
    }
    return best;
}

enum class ReportFormat { csv, markdown };

inline std::vector<std::string> report_header(const BenchReport& report) {
    std::vector<std::string> h{"instance", "value"};
    for (const auto& v : report.variants) h.push_back(v);
    for (std::size_t c = 0; c < report.variants.size(); ++c) {
        if (report.vehicle_flow[c]) h.push_back(report.variants[c] + " subtours");
    }
    for (const auto& v : report.variants) {
        h.push_back(v + " root time");
        h.push_back(v + " root gap");
        h.push_back(v + " first time");
        h.push_back(v + " first gap");
    }
    return h;
}

inline std::vector<std::string> report_fields(const BenchReport& report, const BenchRow& row) {
    std::vector<std::string> f{row.instance, detail::value_or_dash(row.best_value)};
    for (const auto& c : row.cells) f.push_back(detail::render_cell(c));
    for (std::size_t c = 0; c < row.cells.size(); ++c) {
        if (report.vehicle_flow[c]) f.push_back(std::to_string(row.cells[c].subtour_cuts));
    }
    for (const auto& c : row.cells) {
        const bool root = std::isfinite(c.root_value);
        f.push_back(root ? detail::fixed2(c.root_time) : "-");
        f.push_back(root ? detail::percent(compute_root_gap(row.best_value, c.root_value)) : "-");
        const bool first = std::isfinite(c.first_value);
        f.push_back(first ? detail::fixed2(c.first_time) : "-");
        f.push_back(first ? detail::percent(compute_gap(c.first_value, row.best_value)) : "-");
    }
    return f;
}

inline std::string write_report(const BenchReport& report, ReportFormat format) {
    if (report.rows.empty()) throw ModelError("report has no rows");
    std::ostringstream out;
    const auto header = report_header(report);
    const auto gaps = report.average_gaps();
    // The footer row appears only when some variant timed out with a gap.
    const bool has_gap = std::any_of(gaps.begin(), gaps.end(), [](const auto& g) { return g.has_value(); });
    std::vector<std::string> footer{"Avg. gap", ""};
    for (const auto& g : gaps) footer.push_back(g ? detail::percent(*g) : "");
    footer.resize(header.size());
    if (format == ReportFormat::csv) {
        auto line = [&](const std::vector<std::string>& fields) {
            for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << detail::csv_field(fields[i]);
            out << "\n";
        };
        line(header);
        for (const auto& row : report.rows) line(report_fields(report, row));
        if (has_gap) line(footer);
        return out.str();
    }
    auto line = [&](const std::vector<std::string>& fields) {
        out << "|";
        for (const auto& f : fields) out << " " << f << " |";
        out << "\n";
    };
    line(header);
    out << "|";
    for (std::size_t i = 0; i < header.size(); ++i) out << "---|";
    out << "\n";
    for (const auto& row : report.rows) {
        auto fields = report_fields(report, row);
        for (std::size_t c : best_cells(row)) fields[2 + c] = "**" + fields[2 + c] + "**";
        line(fields);
    }
    if (has_gap) line(footer);
    return out.str();
}

struct SweepPoint {
    double budget = 0.0;
    double heuristic_time = 0.0;
    double mip_time = 0.0;
    double warm_value = kInfinity;
    double final_value = kInfinity;
    double bound = -kInfinity;
    double gap = kInfinity;
    bool solved = false;
    bool used_constructive = false;
};

// Splits a fixed budget between the heuristic and the warm-started MIP: for
// budget b the heuristic (construction plus search) gets b seconds and the
// MIP the remainder. Budget 0 keeps the constructed solution as is.
inline std::vector<SweepPoint> sweep_warmstart_budget(const Instance& inst, const Variant& variant, const std::vector<double>& budgets,
                                                      double total_s, const BenchParams& params) {
    for (double b : budgets) {
        if (!(b >= 0.0 && b <= total_s)) throw ModelError("sweep budget " + detail::fixed2(b) + " is outside [0, total]");
    }
    BuildOptions options;
    options.strengthen = variant.config;
    options.stable_slack = params.stable_slack;
    const BuiltModel built = build_model(inst, variant.kind, options);
    std::vector<SweepPoint> points;
    for (double b : budgets) {
        SweepPoint p;
        p.budget = b;
        const bool wall = params.clock == WorkClock::Mode::wall;
        const WorkClock heuristic_clock;
        auto solution = construct_initial(built.instance, built.fleet, params.seed);
        if (b > 0.0) {
            // In deterministic mode the search alone consumes the nominal budget.
            const double remaining = std::max(0.0, b - (wall ? heuristic_clock.elapsed() : 0.0));
            solution = lns_improve(built.instance, built.fleet, solution, {.budget_s = remaining, .seed = params.seed, .clock = params.clock});
        } else {
            p.used_constructive = true;
        }
        p.heuristic_time = wall ? heuristic_clock.elapsed() : b;
        p.warm_value = solution.objective;
        SolveParams sp;
        sp.time_limit_s = std::max(0.0, total_s - p.heuristic_time);
        sp.clock = params.clock;
        sp.seed = params.seed;
        sp.min_root_time_s = 0.5;
        const auto result = solve_mip(built, sp, encode_start(built, solution));
        p.mip_time = result.time;
        p.final_value = result.objective;
        p.bound = result.best_bound;
        p.gap = result.gap;
        p.solved = result.status == MipStatus::optimal;
        points.push_back(p);
    }
    return points;
}

inline std::string write_sweep(const std::vector<SweepPoint>& points) {
    std::ostringstream out;
    out << "budget,heuristic_time,mip_time,warm_value,final_value,bound,gap,solved\n";
    for (const auto& p : points) {
        out << detail::fixed2(p.budget) << "," << detail::fixed2(p.heuristic_time) << "," << detail::fixed2(p.mip_time) << ","
            << detail::value_or_dash(p.warm_value) << "," << detail::value_or_dash(p.final_value) << "," << detail::value_or_dash(p.bound)
            << "," << detail::percent(p.gap) << "," << (p.solved ? "yes" : "no") << "\n";
    }
    return out.str();
}

}  // namespace fsmvrp
