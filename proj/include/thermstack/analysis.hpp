#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermstack/floorplan.hpp"
#include "thermstack/mesh.hpp"
#include "thermstack/solver.hpp"

namespace thermstack {

struct BlockStats {
    std::string name;
    int layer = 0;
    double min_K = 0.0;
    double max_K = 0.0;
    double avg_K = 0.0; ///< volume-weighted
};

struct LayerStats {
    std::string name;
    int layer = 0;
    double min_K = 0.0;
    double max_K = 0.0;
    double avg_K = 0.0;
    /// Peak over this layer's processor blocks (power > 0); NaN if none.
    double proc_peak_K = std::numeric_limits<double>::quiet_NaN();
};

struct Extreme {
    double value_K = 0.0;
    int layer = 0;
    double x = 0.0, y = 0.0; ///< cell center
};

struct ReferenceValue {
    std::string observable;
    double published_K = 0.0;
    double computed_K = 0.0;
    std::string source;
};

/// Observables of one solved stack: per-block and per-layer statistics over
/// die cells, plus the global extremes. Package plates are instrumentation,
/// not part of the report.
struct ThermalReport {
    std::string scenario_id;
    GridSpec grid;
    double die_width = 0.0, die_height = 0.0;
    double ambient_K = 0.0;
    std::vector<BlockStats> blocks;
    std::vector<LayerStats> layers;
    Extreme peak;
    Extreme lowest;
    int solver_iterations = 0;
    double solver_residual = 0.0;
    double total_power_W = 0.0;
    std::vector<ReferenceValue> references;
    std::vector<std::string> notes;
    /// Per-layer hotspot projection (max over the layer's z-slabs per lateral
    /// cell), ny*nx row-major with iy = 0 at the die's bottom edge.
    std::vector<std::vector<double>> layer_maps;
};

/// Min/max/volume-weighted-average per block. Background tiles are skipped
/// unless `include_background`.
inline std::vector<BlockStats> block_stats(const TemperatureField& field,
                                           const Mesh& mesh,
                                           bool include_background = false) {
    std::vector<BlockStats> out;
    for (size_t li = 0; li < mesh.stack.layers.size(); ++li) {
        const Floorplan& fp = mesh.stack.layers[li].floorplan;
        const auto [first_slab, nslabs] = mesh.layer_slab_range(static_cast<int>(li));
        std::vector<BlockStats> stats(fp.blocks.size());
        std::vector<double> volume(fp.blocks.size(), 0.0);
        std::vector<double> weighted(fp.blocks.size(), 0.0);
        for (size_t bi = 0; bi < fp.blocks.size(); ++bi) {
            stats[bi].name = fp.blocks[bi].name;
            stats[bi].layer = static_cast<int>(li);
            stats[bi].min_K = std::numeric_limits<double>::infinity();
            stats[bi].max_K = -std::numeric_limits<double>::infinity();
        }
        const std::vector<int>& own = mesh.owner[li];
        for (int sz = 0; sz < nslabs; ++sz) {
            const Slab& s = mesh.slab(first_slab + sz);
            const double cell_vol = s.cell_area() * s.dz;
            for (size_t c = 0; c < own.size(); ++c) {
                const int bi = own[c];
                const double t = field.values[s.cell_offset + c];
                stats[static_cast<size_t>(bi)].min_K =
                    std::min(stats[static_cast<size_t>(bi)].min_K, t);
                stats[static_cast<size_t>(bi)].max_K =
                    std::max(stats[static_cast<size_t>(bi)].max_K, t);
                weighted[static_cast<size_t>(bi)] += t * cell_vol;
                volume[static_cast<size_t>(bi)] += cell_vol;
            }
        }
        for (size_t bi = 0; bi < stats.size(); ++bi) {
            if (volume[bi] <= 0.0) continue; // block owns no cells
            stats[bi].avg_K = weighted[bi] / volume[bi];
            if (include_background || !is_background_name(stats[bi].name))
                out.push_back(stats[bi]);
        }
    }
    return out;
}

/// Global peak and lowest over die cells; ties resolved to the lowest flat
/// cell index.
inline std::pair<Extreme, Extreme> global_extremes(const TemperatureField& field,
                                                   const Mesh& mesh) {
    if (field.values.empty()) throw std::invalid_argument("empty field");
    Extreme peak{-std::numeric_limits<double>::infinity(), 0, 0.0, 0.0};
    Extreme lowest{std::numeric_limits<double>::infinity(), 0, 0.0, 0.0};
    for (const Slab& s : mesh.slabs) {
        if (s.role != SlabRole::DieLayer) continue;
        for (int iy = 0; iy < s.ny; ++iy) {
            for (int ix = 0; ix < s.nx; ++ix) {
                const double t = field.values[s.flat(ix, iy)];
                if (t > peak.value_K)
                    peak = {t, s.layer_index, s.center_x(ix), s.center_y(iy)};
                if (t < lowest.value_K)
                    lowest = {t, s.layer_index, s.center_x(ix), s.center_y(iy)};
            }
        }
    }
    return {peak, lowest};
}

/// Lateral slice of one z-slab of a die layer, ny*nx row-major.
inline std::vector<double> slice(const TemperatureField& field, const Mesh& mesh,
                                 int layer, int z_index) {
    const auto [first_slab, nslabs] = mesh.layer_slab_range(layer);
    if (first_slab < 0 || z_index < 0 || z_index >= nslabs)
        throw std::out_of_range("slice: layer or z index out of range");
    const Slab& s = mesh.slab(first_slab + z_index);
    std::vector<double> out(s.cell_count());
    std::copy_n(field.values.begin() + static_cast<long>(s.cell_offset),
                s.cell_count(), out.begin());
    return out;
}

/// Difference between the processor-block peaks of two layers.
inline double layer_gap(const ThermalReport& report, int layer_a, int layer_b) {
    auto proc_peak = [&report](int layer) {
        if (layer < 0 || layer >= static_cast<int>(report.layers.size()))
            throw std::out_of_range("layer_gap: layer index out of range");
        const double v = report.layers[static_cast<size_t>(layer)].proc_peak_K;
        if (std::isnan(v))
            throw std::invalid_argument("layer " + std::to_string(layer) +
                                        " has no processor blocks");
        return v;
    };
    return proc_peak(layer_a) - proc_peak(layer_b);
}

/// Full report over a solved mesh.
inline ThermalReport build_report(const TemperatureField& field, const Mesh& mesh,
                                  bool include_background = false) {
    ThermalReport rep;
    rep.grid = mesh.grid;
    rep.die_width = mesh.die_width;
    rep.die_height = mesh.die_height;
    rep.ambient_K = mesh.stack.package.ambient;
    rep.solver_iterations = field.iterations;
    rep.solver_residual = field.residual;
    rep.blocks = block_stats(field, mesh, include_background);

    const auto all_blocks = block_stats(field, mesh, true);
    for (size_t li = 0; li < mesh.stack.layers.size(); ++li) {
        LayerStats ls;
        ls.name = mesh.stack.layers[li].name;
        ls.layer = static_cast<int>(li);
        ls.min_K = std::numeric_limits<double>::infinity();
        ls.max_K = -std::numeric_limits<double>::infinity();
        double vol = 0.0, weighted = 0.0;
        const auto [first_slab, nslabs] = mesh.layer_slab_range(static_cast<int>(li));
        for (int sz = 0; sz < nslabs; ++sz) {
            const Slab& s = mesh.slab(first_slab + sz);
            const double cell_vol = s.cell_area() * s.dz;
            for (size_t c = 0; c < s.cell_count(); ++c) {
                const double t = field.values[s.cell_offset + c];
                ls.min_K = std::min(ls.min_K, t);
                ls.max_K = std::max(ls.max_K, t);
                weighted += t * cell_vol;
                vol += cell_vol;
            }
        }
        ls.avg_K = weighted / vol;
        double proc_peak = -std::numeric_limits<double>::infinity();
        bool has_proc = false;
        const Floorplan& fp = mesh.stack.layers[li].floorplan;
        for (const BlockStats& bs : all_blocks) {
            if (bs.layer != static_cast<int>(li)) continue;
            for (const Block& b : fp.blocks) {
                if (b.name == bs.name && b.power > 0.0) {
                    proc_peak = std::max(proc_peak, bs.max_K);
                    has_proc = true;
                }
            }
        }
        if (has_proc) ls.proc_peak_K = proc_peak;
        rep.layers.push_back(ls);

        // Hotspot projection for rendering: per-column max across z-slabs.
        std::vector<double> map(static_cast<size_t>(mesh.grid.nx) * mesh.grid.ny,
                                -std::numeric_limits<double>::infinity());
        for (int sz = 0; sz < nslabs; ++sz) {
            const Slab& s = mesh.slab(first_slab + sz);
            for (size_t c = 0; c < s.cell_count(); ++c)
                map[c] = std::max(map[c], field.values[s.cell_offset + c]);
        }
        rep.layer_maps.push_back(std::move(map));
    }

    std::tie(rep.peak, rep.lowest) = global_extremes(field, mesh);

    double total = 0.0;
    for (const Layer& layer : mesh.stack.layers)
        for (const Block& b : layer.floorplan.blocks) total += b.power;
    rep.total_power_W = total;
    return rep;
}

} // namespace thermstack
