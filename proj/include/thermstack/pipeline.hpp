#pragma once

#include <string>

#include "thermstack/analysis.hpp"
#include "thermstack/assemble.hpp"
#include "thermstack/mesh.hpp"
#include "thermstack/solver.hpp"

namespace thermstack {

struct PipelineResult {
    Mesh mesh;
    SparseSystem system;
    TemperatureField field;
    ThermalReport report;
};

struct SolveOptions {
    double rel_tol = 1e-8;
    int max_iter = 0; ///< 0 = 50·sqrt(N)
    double power_scale = 1.0;
    bool include_background = false;
};

/// Background-fill, discretize, assemble, solve and report in one step.
inline PipelineResult run_stack(const Stack& stack, const GridSpec& grid,
                                const SolveOptions& opts = {}) {
    Stack filled = stack;
    for (Layer& layer : filled.layers) {
        const auto check = validate_floorplan(layer.floorplan);
        if (!check.ok())
            throw std::invalid_argument("layer '" + layer.name + "': " +
                                        check.violations.front().message);
        layer.floorplan = fill_background(layer.floorplan);
        if (opts.power_scale != 1.0)
            for (Block& b : layer.floorplan.blocks) b.power *= opts.power_scale;
    }

    PipelineResult result;
    result.mesh = discretize(filled, grid);
    result.system = assemble(result.mesh);
    const auto sources = power_vector(result.mesh);
    for (size_t i = 0; i < sources.size(); ++i) result.system.P[i] += sources[i];
    result.field = solve_steady(result.system, opts.rel_tol, opts.max_iter);
    result.report = build_report(result.field, result.mesh, opts.include_background);
    return result;
}

/// Heat leaving through the package face at the solution, in W.
inline double package_outflow(const PipelineResult& r) {
    double flow = 0.0;
    for (const BoundaryCoupling& bc : r.system.boundary)
        flow += bc.conductance *
                (r.field.values[static_cast<size_t>(bc.cell)] - r.system.ambient);
    return flow;
}

} // namespace thermstack
