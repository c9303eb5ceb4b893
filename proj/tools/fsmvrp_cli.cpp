#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fsmvrp/harness.hpp"

namespace {

using namespace fsmvrp;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitNoIncumbent = 3;

void emit(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw InstanceError("cannot write '" + path + "'");
    out << text;
}

std::vector<double> parse_numbers(const std::string& text) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

std::vector<std::string> split(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

struct ModelFlags {
    std::string model = "sc";
    std::string cuts = "none";
    std::string symmetry = "none";
    std::string ordering = "none";

    void attach(CLI::App& cmd) {
        cmd.add_option("--model", model, "Formulation: sc, sv, fc or ff")->capture_default_str();
        cmd.add_option("--cuts", cuts, "Valid cut families: all, none or a comma list")->capture_default_str();
        cmd.add_option("--symmetry", symmetry, "Symmetry families: all, none or a comma list")->capture_default_str();
        cmd.add_option("--ordering", ordering, "Ordering families: all, none or a comma list")->capture_default_str();
    }

    Variant variant() const {
        Variant v = Variant::parse(model);
        parse_family_list(cuts, kCutFamilies, v.kind, v.config);
        parse_family_list(symmetry, kSymmetryFamilies, v.kind, v.config);
        parse_family_list(ordering, kOrderingFamilies, v.kind, v.config);
        if (const auto why = v.config.incompatibility(v.kind); !why.empty()) throw ModelError(why);
        return v;
    }
};

struct RunFlags {
    double time_limit = 900.0;
    double warmstart_budget = -1.0;
    std::uint64_t seed = 1;
    bool deterministic = false;

    void attach(CLI::App& cmd) {
        cmd.add_option("--time-limit", time_limit, "MIP time limit in seconds")->capture_default_str()->check(CLI::NonNegativeNumber);
        cmd.add_option("--warmstart-budget", warmstart_budget, "Heuristic seconds before the MIP; negative disables the warm start")
            ->capture_default_str();
        cmd.add_option("--seed", seed, "Random seed")->capture_default_str();
        cmd.add_flag("--deterministic", deterministic, "Measure time in work units instead of wall-clock seconds");
    }

    BenchParams params() const {
        BenchParams p;
        p.time_limit_s = time_limit;
        p.warmstart_budget_s = warmstart_budget;
        p.seed = seed;
        p.clock = deterministic ? WorkClock::Mode::deterministic : WorkClock::Mode::wall;
        return p;
    }
};

int run_solve(const std::string& instance_path, const ModelFlags& model, const RunFlags& run, const std::string& output, bool log) {
    const Instance inst = load_instance_file(instance_path);
    const Variant variant = model.variant();
    const auto outcome = solve_variant(inst, variant, run.params());
    const auto& r = outcome.result;
    if (log) {
        for (const auto& e : r.events) {
            std::cerr << (e.kind == SolveEvent::Kind::incumbent ? "incumbent" : "bound") << " time=" << e.time << " node=" << e.node
                      << " value=" << e.value << "\n";
        }
    }
    std::cerr << "status: " << to_string(r.status) << "\n";
    if (outcome.infeasible) return kExitInfeasible;
    std::cerr << "objective: " << (r.incumbent ? detail::fixed2(r.objective) : "-") << "\n"
              << "bound: " << detail::value_or_dash(r.best_bound) << "\n"
              << "gap: " << detail::percent(r.incumbent ? r.gap : kInfinity) << "\n"
              << "nodes: " << r.nodes << "\n"
              << "subtour cuts: " << r.lazy_rows_added << "\n"
              << "time: " << detail::fixed2(r.time) << "\n";
    if (outcome.warm_value) std::cerr << "warm start: " << detail::fixed2(*outcome.warm_value) << "\n";
    if (!r.incumbent) return kExitNoIncumbent;
    const RoutingSolution sol = decode(*outcome.built, *r.incumbent);
    emit(save_solution(outcome.built->instance, sol), output);
    return kExitOk;
}

int run_check(const std::string& instance_path, const std::string& solution_path, const std::string& model_name, int stable_slack) {
    const Instance inst = load_instance_file(instance_path);
    const auto kind = ModelKind::parse(model_name);
    if (!kind) throw ModelError("unknown model '" + model_name + "'");
    const Fleet fleet = fleet_for(inst, kind->fleet, stable_slack);
    const RoutingSolution sol = load_solution_file(inst, solution_path);
    const auto report = validate_solution(inst, fleet, sol);
    for (const auto& f : report.failures) std::cout << "FAIL " << f << "\n";
    std::cout << (report.ok() ? "valid" : "invalid") << " objective=" << detail::fixed2(report.objective) << "\n";
    return report.ok() ? kExitOk : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fleet size and mix split-delivery vehicle routing solver"};
    app.require_subcommand(1);
    int exit_code = kExitOk;

    auto* gen = app.add_subcommand("gen", "Generate a seeded instance");
    GeneratorOptions gen_opt;
    std::string profile = "standard";
    std::string gen_output;
    gen->add_option("--seed", gen_opt.seed, "Random seed")->capture_default_str();
    gen->add_option("--customers", gen_opt.customers, "Number of customers")->capture_default_str();
    gen->add_option("--commodities", gen_opt.commodities, "Number of commodities")->capture_default_str();
    gen->add_option("--profile", profile, "standard, split-heavy or single-type")->capture_default_str();
    gen->add_option("--output", gen_output, "Output file (stdout when omitted)");

    auto* solve = app.add_subcommand("solve", "Solve one instance with one formulation");
    std::string solve_instance;
    ModelFlags solve_model;
    RunFlags solve_run;
    std::string solve_output;
    bool solve_log = false;
    solve->add_option("instance", solve_instance, "Instance document")->required();
    solve_model.attach(*solve);
    solve_run.attach(*solve);
    solve->add_option("--output", solve_output, "Solution file (stdout when omitted)");
    solve->add_flag("--log", solve_log, "Print incumbent and bound events");

    auto* bench = app.add_subcommand("bench", "Run variants over instances and report times or gaps");
    std::vector<std::string> bench_instances;
    std::string bench_variants = "sc,sv,fc,ff";
    std::string bench_format = "csv";
    std::string bench_output;
    int bench_generate = 0;
    int bench_customers = 5;
    RunFlags bench_run;
    bench->add_option("instances", bench_instances, "Instance documents");
    bench->add_option("--variants", bench_variants, "Comma list such as sc,sv+all,ff+cuts")->capture_default_str();
    bench->add_option("--generate", bench_generate, "Also generate this many seeded instances")->capture_default_str();
    bench->add_option("--customers", bench_customers, "Customers per generated instance")->capture_default_str();
    bench->add_option("--format", bench_format, "csv or markdown")->capture_default_str()->check(CLI::IsMember({"csv", "markdown"}));
    bench->add_option("--output", bench_output, "Report file (stdout when omitted)");
    bench_run.attach(*bench);

    auto* sweep = app.add_subcommand("sweep", "Split a fixed budget between the heuristic and the MIP");
    std::string sweep_instance;
    ModelFlags sweep_model;
    RunFlags sweep_run;
    std::string sweep_budgets = "0,10,30,60";
    double sweep_total = 120.0;
    std::string sweep_output;
    sweep->add_option("instance", sweep_instance, "Instance document")->required();
    sweep_model.attach(*sweep);
    sweep_run.attach(*sweep);
    sweep->add_option("--budgets", sweep_budgets, "Comma list of heuristic budgets in seconds")->capture_default_str();
    sweep->add_option("--total", sweep_total, "Total seconds per point")->capture_default_str();
    sweep->add_option("--output", sweep_output, "CSV file (stdout when omitted)");

    auto* check = app.add_subcommand("check", "Validate a solution document");
    std::string check_instance;
    std::string check_solution;
    std::string check_model = "sc";
    int check_slack = 1;
    check->add_option("instance", check_instance, "Instance document")->required();
    check->add_option("solution", check_solution, "Solution document")->required();
    check->add_option("--model", check_model, "Formulation whose fleet the solution uses")->capture_default_str();
    check->add_option("--stable-slack", check_slack, "Extra vehicles per stable pool")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            const auto p = parse_profile(profile);
            if (!p) throw InstanceError("unknown profile '" + profile + "'");
            gen_opt.profile = *p;
            emit(save_instance(generate_instance(gen_opt)), gen_output);
        } else if (*solve) {
            exit_code = run_solve(solve_instance, solve_model, solve_run, solve_output, solve_log);
        } else if (*bench) {
            std::vector<Instance> instances;
            for (const auto& path : bench_instances) instances.push_back(load_instance_file(path));
            for (int i = 0; i < bench_generate; ++i) {
                instances.push_back(generate_instance(bench_run.seed + static_cast<std::uint64_t>(i), bench_customers, 2));
            }
            const auto report = run_benchmark(instances, split(bench_variants), bench_run.params());
            emit(write_report(report, bench_format == "csv" ? ReportFormat::csv : ReportFormat::markdown), bench_output);
        } else if (*sweep) {
            const Instance inst = load_instance_file(sweep_instance);
            const auto points = sweep_warmstart_budget(inst, sweep_model.variant(), parse_numbers(sweep_budgets), sweep_total, sweep_run.params());
            emit(write_sweep(points), sweep_output);
        } else if (*check) {
            exit_code = run_check(check_instance, check_solution, check_model, check_slack);
        }
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return exit_code;
}
