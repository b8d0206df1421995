#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "thermstack/optimize.hpp"
#include "thermstack/scenarios.hpp"
#include "thermstack/thermstack.hpp"

namespace {

using namespace thermstack;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;

GridSpec parse_grid_flag(const std::string& text) {
    const auto x = text.find('x');
    if (x == std::string::npos)
        throw ParseError("grid must look like NXxNY, e.g. 64x64");
    GridSpec grid;
    grid.nx = std::stoi(text.substr(0, x));
    grid.ny = std::stoi(text.substr(x + 1));
    if (grid.nx < 2 || grid.ny < 2) throw ParseError("grid must be at least 2x2");
    return grid;
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write file '" + path + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void write_report_file(const ThermalReport& report, const std::string& path) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
        write_file(path, write_report_csv(report));
    else
        write_file(path, write_report_json(report));
}

void write_layer_maps(const ThermalReport& report, const std::string& dir) {
    std::filesystem::create_directories(dir);
    double lo = report.lowest.value_K, hi = report.peak.value_K;
    if (!(hi > lo)) hi = lo + 1.0;
    for (size_t li = 0; li < report.layer_maps.size(); ++li) {
        const std::string ppm =
            render_ppm(report.layer_maps[li], report.grid.nx, report.grid.ny, lo, hi);
        write_file(dir + "/layer" + std::to_string(li) + ".ppm", ppm);
    }
}

void print_report_summary(const ThermalReport& report) {
    std::printf("grid %dx%d, total power %.17g W, ambient %.17g K\n", report.grid.nx,
                report.grid.ny, report.total_power_W, report.ambient_K);
    std::printf("peak   %.17g K at layer %d (%.6g, %.6g) m\n", report.peak.value_K,
                report.peak.layer, report.peak.x, report.peak.y);
    std::printf("lowest %.17g K at layer %d (%.6g, %.6g) m\n", report.lowest.value_K,
                report.lowest.layer, report.lowest.x, report.lowest.y);
    for (const LayerStats& ls : report.layers) {
        std::printf("layer %d %-12s min %.17g max %.17g", ls.layer, ls.name.c_str(),
                    ls.min_K, ls.max_K);
        if (!std::isnan(ls.proc_peak_K))
            std::printf(" proc-peak %.17g", ls.proc_peak_K);
        std::printf("\n");
    }
    if (!report.references.empty()) {
        std::printf("reference comparison:\n");
        for (const ReferenceValue& rv : report.references)
            std::printf("  %-22s published %8.2f computed %8.2f delta %+7.2f\n",
                        rv.observable.c_str(), rv.published_K, rv.computed_K,
                        rv.computed_K - rv.published_K);
    }
    for (const std::string& note : report.notes)
        std::printf("note: %s\n", note.c_str());
}

int cmd_validate(const std::string& stack_path) {
    const StackConfig cfg = load_stack_config(stack_path);
    int violations = 0;
    for (const Layer& layer : cfg.stack.layers) {
        const auto result = validate_floorplan(layer.floorplan);
        for (const Violation& v : result.violations) {
            std::printf("layer %s: %s\n", layer.name.c_str(), v.message.c_str());
            ++violations;
        }
    }
    if (violations == 0) {
        std::printf("ok: %zu layers, %dx%d grid\n", cfg.stack.layers.size(),
                    cfg.grid.nx, cfg.grid.ny);
        return kExitOk;
    }
    std::printf("%d violation(s)\n", violations);
    return kExitInput;
}

int cmd_solve(const std::string& stack_path, const std::string& grid_flag,
              const std::string& report_path, const std::string& map_dir,
              double rel_tol, int max_iter) {
    const StackConfig cfg = load_stack_config(stack_path);
    const GridSpec grid = grid_flag.empty() ? cfg.grid : parse_grid_flag(grid_flag);
    SolveOptions opts;
    opts.rel_tol = rel_tol;
    opts.max_iter = max_iter;
    const PipelineResult result = run_stack(cfg.stack, grid, opts);
    print_report_summary(result.report);
    if (!report_path.empty()) write_report_file(result.report, report_path);
    if (!map_dir.empty()) write_layer_maps(result.report, map_dir);
    return kExitOk;
}

int cmd_scenario(const std::string& id, const std::string& grid_flag,
                 const std::string& report_path, const std::string& map_dir) {
    ScenarioRunOptions opts;
    if (!grid_flag.empty()) opts.grid = parse_grid_flag(grid_flag);
    const ThermalReport report = run_scenario(id, opts);
    std::printf("scenario %s\n", id.c_str());
    print_report_summary(report);
    if (!report_path.empty()) write_report_file(report, report_path);
    if (!map_dir.empty()) write_layer_maps(report, map_dir);
    return kExitOk;
}

int cmd_tables(const std::string& grid_flag, const std::string& json_path) {
    const GridSpec grid = grid_flag.empty() ? GridSpec{64, 64}
                                            : parse_grid_flag(grid_flag);
    const ComparisonDocument doc = paper_tables(grid);
    std::fputs(doc.text().c_str(), stdout);
    if (!json_path.empty()) write_file(json_path, doc.json().dump(2) + "\n");
    return kExitOk;
}

int cmd_optimize(const std::string& problem_path, const std::string& method_flag,
                 std::uint64_t seed_flag, bool seed_set, const std::string& out_prefix) {
    ProblemConfig cfg = parse_problem(detail::read_file(problem_path), problem_path);
    if (method_flag == "exhaustive") cfg.method = OptimizeMethod::Exhaustive;
    else if (method_flag == "anneal") cfg.method = OptimizeMethod::Anneal;
    else if (!method_flag.empty())
        throw ParseError("--method must be 'exhaustive' or 'anneal'");
    if (seed_set) cfg.seed = seed_flag;

    Placement best;
    double best_objective = 0.0;
    std::string trace_csv;
    if (cfg.method == OptimizeMethod::Exhaustive) {
        const ExhaustiveResult result = optimize_exhaustive(cfg.problem);
        best = result.best;
        best_objective = result.best_objective_K;
        std::printf("exhaustive: %zu placements evaluated, best objective %.17g K, "
                    "rescored %.17g K\n",
                    result.evaluated.size(), result.best_objective_K,
                    result.rescored_peak_K);
        trace_csv = "index,placement_hash,objective_K,accepted,best_K\n";
        double running = 1e300;
        char buf[128];
        for (size_t i = 0; i < result.evaluated.size(); ++i) {
            const auto& [placement, obj] = result.evaluated[i];
            running = std::min(running, obj);
            std::snprintf(buf, sizeof(buf), "%zu,%016llx,%.17g,%d,%.17g\n", i,
                          static_cast<unsigned long long>(
                              placement_hash(cfg.problem, placement)),
                          obj, obj == running ? 1 : 0, running);
            trace_csv += buf;
        }
    } else {
        const AnnealResult result = optimize_anneal(cfg.problem, cfg.seed, cfg.schedule);
        best = result.best;
        best_objective = result.best_objective_K;
        std::printf("anneal: seed %llu, %zu moves, best objective %.17g K\n",
                    static_cast<unsigned long long>(cfg.seed),
                    result.trace.entries.size(), result.best_objective_K);
        trace_csv = write_trace_csv(result.trace);
    }
    for (size_t i = 0; i < best.blocks.size(); ++i)
        std::printf("  %-8s layer %d at (%.6g, %.6g) m\n",
                    cfg.problem.blocks[i].name.c_str(), best.blocks[i].layer,
                    best.blocks[i].x, best.blocks[i].y);
    std::printf("best objective %.17g K\n", best_objective);

    const Stack placed = apply_placement(cfg.problem, best);
    for (int li : cfg.problem.placeable_layers) {
        const std::string path =
            out_prefix + "_layer" + std::to_string(li) + ".flp";
        write_file(path, write_floorplan(placed.layers[static_cast<size_t>(li)].floorplan));
    }
    write_file(out_prefix + "_trace.csv", trace_csv);
    return kExitOk;
}

int cmd_render(const std::string& report_path, int layer, const std::string& out_path,
               double t_min, double t_max, bool range_set) {
    const SavedField saved = parse_report_field(detail::read_file(report_path));
    if (layer < 0 || layer >= static_cast<int>(saved.layer_maps.size()))
        throw ParseError("layer index out of range (report has " +
                         std::to_string(saved.layer_maps.size()) + " layers)");
    const auto& map = saved.layer_maps[static_cast<size_t>(layer)];
    double lo = t_min, hi = t_max;
    if (!range_set) {
        lo = *std::min_element(map.begin(), map.end());
        hi = *std::max_element(map.begin(), map.end());
        if (!(hi > lo)) hi = lo + 1.0;
    }
    write_file(out_path, render_ppm(map, saved.grid.nx, saved.grid.ny, lo, hi));
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
#ifdef _OPENMP
    if (const char* threads = std::getenv("THERMSTACK_THREADS")) {
        const int n = std::atoi(threads);
        if (n > 0) omp_set_num_threads(n);
    }
#endif

    CLI::App app{"thermstack: steady-state compact thermal simulation and "
                 "placement search for stacked dies"};
    app.require_subcommand(1);

    std::string stack_path, grid_flag, report_path, map_dir;
    double rel_tol = 1e-8;
    int max_iter = 0;

    auto* validate = app.add_subcommand("validate", "check a stack config's floorplans");
    validate->add_option("--stack", stack_path, "stack config file")->required();

    auto* solve = app.add_subcommand("solve", "solve a stack config and write reports");
    solve->add_option("--stack", stack_path, "stack config file")->required();
    solve->add_option("--grid", grid_flag, "lateral grid NXxNY (default from config)");
    solve->add_option("--report", report_path, "report output (.json or .csv)");
    solve->add_option("--map-dir", map_dir, "directory for layer<i>.ppm thermal maps");
    solve->add_option("--tol", rel_tol, "relative residual tolerance")
        ->default_val(1e-8);
    solve->add_option("--max-iter", max_iter, "iteration cap (0 = automatic)")
        ->default_val(0);

    std::string scenario_id;
    auto* scenario_cmd =
        app.add_subcommand("scenario", "run a built-in experiment with references");
    scenario_cmd->add_option("--id", scenario_id, "scenario id (see 'tables')")
        ->required();
    scenario_cmd->add_option("--grid", grid_flag, "lateral grid NXxNY (default 64x64)");
    scenario_cmd->add_option("--report", report_path, "report output (.json or .csv)");
    scenario_cmd->add_option("--map-dir", map_dir, "directory for thermal maps");

    std::string json_path;
    auto* tables =
        app.add_subcommand("tables", "compare all scenarios against published values");
    tables->add_option("--grid", grid_flag, "lateral grid NXxNY (default 64x64)");
    tables->add_option("--json", json_path, "also write the comparison as JSON");

    std::string problem_path, method_flag, out_prefix = "optimized";
    std::uint64_t seed_flag = 1;
    auto* optimize = app.add_subcommand("optimize", "search processor placements");
    optimize->add_option("--problem", problem_path, "problem config file")->required();
    optimize->add_option("--method", method_flag, "exhaustive or anneal");
    auto* seed_opt = optimize->add_option("--seed", seed_flag, "annealing RNG seed");
    optimize->add_option("--out", out_prefix, "output prefix for floorplans and trace")
        ->capture_default_str();

    int layer_flag = 0;
    std::string out_path;
    double t_min = 0.0, t_max = 0.0;
    auto* render = app.add_subcommand("render", "re-render a map from a saved report");
    render->add_option("--report", report_path, "report.json with embedded field")
        ->required();
    render->add_option("--layer", layer_flag, "die layer index")->required();
    render->add_option("--out", out_path, "output PPM path")->required();
    auto* min_opt = render->add_option("--min", t_min, "fixed normalization minimum K");
    auto* max_opt = render->add_option("--max", t_max, "fixed normalization maximum K");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // exits 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (app.got_subcommand(validate)) return cmd_validate(stack_path);
        if (app.got_subcommand(solve))
            return cmd_solve(stack_path, grid_flag, report_path, map_dir, rel_tol,
                             max_iter);
        if (app.got_subcommand(scenario_cmd))
            return cmd_scenario(scenario_id, grid_flag, report_path, map_dir);
        if (app.got_subcommand(tables)) return cmd_tables(grid_flag, json_path);
        if (app.got_subcommand(optimize))
            return cmd_optimize(problem_path, method_flag, seed_flag,
                                seed_opt->count() > 0, out_prefix);
        if (app.got_subcommand(render))
            return cmd_render(report_path, layer_flag, out_path, t_min, t_max,
                              min_opt->count() > 0 && max_opt->count() > 0);
    } catch (const SolveError& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return kExitSolver;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    }
    return kExitUsage;
}
