#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermstack/floorplan.hpp"
#include "thermstack/types.hpp"

namespace thermstack {

enum class SlabRole { DieLayer, Spreader, Sink };

/// One z-slab of cells on a uniform lateral grid. Die slabs share the die
/// grid; package slabs may use a coarser grid and a wider extent.
struct Slab {
    SlabRole role = SlabRole::DieLayer;
    int layer_index = -1;  ///< die layer index, -1 for package slabs
    int iz_in_layer = 0;
    double z0 = 0.0;       ///< bottom coordinate of the slab
    double dz = 0.0;
    double conductivity = 0.0;
    double x0 = 0.0, y0 = 0.0;
    double dx = 0.0, dy = 0.0;
    int nx = 0, ny = 0;
    std::size_t cell_offset = 0;

    std::size_t cell_count() const {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    }
    double cell_area() const { return dx * dy; }
    double center_x(int ix) const { return x0 + (ix + 0.5) * dx; }
    double center_y(int iy) const { return y0 + (iy + 0.5) * dy; }
    double center_z() const { return z0 + 0.5 * dz; }
    std::size_t flat(int ix, int iy) const {
        return cell_offset + static_cast<std::size_t>(iy) * nx + ix;
    }
};

struct Mesh {
    Stack stack;
    GridSpec grid;
    double dx = 0.0, dy = 0.0; ///< die cell pitch
    double die_width = 0.0, die_height = 0.0;
    std::vector<Slab> slabs; ///< physical bottom-to-top order
    /// Lateral owner block index per die layer (index into that layer's
    /// floorplan blocks), ny*nx row-major.
    std::vector<std::vector<int>> owner;
    std::size_t total_cells = 0;
    std::size_t die_cells = 0;
    int convection_slab = -1;   ///< slab holding the ambient-coupled face
    bool convection_on_top = true;
    /// Vertical face pair (i, i+1) carrying the die/package interface film;
    /// -1 when the film folds into the convection coupling instead.
    int film_below_slab = -1;

    const Slab& slab(int i) const { return slabs[static_cast<size_t>(i)]; }
    int die_slab_count() const {
        int n = 0;
        for (const Slab& s : slabs) n += (s.role == SlabRole::DieLayer) ? 1 : 0;
        return n;
    }
    /// First slab (in z order) of a die layer, and its slab span.
    std::pair<int, int> layer_slab_range(int layer) const {
        int first = -1, count = 0;
        for (int i = 0; i < static_cast<int>(slabs.size()); ++i) {
            if (slabs[i].role == SlabRole::DieLayer && slabs[i].layer_index == layer) {
                if (first < 0) first = i;
                ++count;
            }
        }
        return {first, count};
    }
};

namespace detail {

/// Package cells are coarser than die cells by an integer factor that must
/// divide both lateral counts; aim for roughly 1 mm pitch.
inline int package_coarsening(int nx, int ny, double dx, double dy) {
    const double target = 1.0e-3;
    const int want = std::max(1, static_cast<int>(std::floor(
                                      target / std::min(dx, dy) + 0.5)));
    const int g = std::gcd(nx, ny);
    int best = 1;
    for (int r = 1; r <= want; ++r) {
        if (g % r == 0) best = r;
    }
    return best;
}

inline int overhang_cells(double plate_width, double die_extent, double pitch) {
    const double over = 0.5 * (plate_width - die_extent);
    if (over <= 0.0) return 0;
    return static_cast<int>(std::floor(over / pitch + 0.5));
}

} // namespace detail

/// Discretizes the stack into finite-volume cells: nx*ny lateral die cells
/// per z-slab, with layer i contributing nz(i) slabs, plus coarser slabs for
/// the spreader and sink plates when their thickness is positive.
///
/// Pre: all layer floorplans cover the die exactly (run fill_background).
inline Mesh discretize(const Stack& stack, const GridSpec& grid) {
    if (stack.layers.empty()) throw std::invalid_argument("stack has no layers");
    if (grid.nx < 2 || grid.ny < 2)
        throw std::invalid_argument("grid must be at least 2x2");

    Mesh mesh;
    mesh.stack = stack;
    mesh.grid = grid;
    mesh.die_width = stack.layers.front().floorplan.die_width;
    mesh.die_height = stack.layers.front().floorplan.die_height;
    if (mesh.die_width <= 0.0 || mesh.die_height <= 0.0)
        throw std::invalid_argument("die dimensions must be positive");
    for (const Layer& layer : stack.layers) {
        if (layer.floorplan.die_width != mesh.die_width ||
            layer.floorplan.die_height != mesh.die_height)
            throw std::invalid_argument("layer '" + layer.name +
                                        "' has mismatched die dimensions");
        if (layer.thickness <= 0.0 || layer.nz < 1)
            throw std::invalid_argument("layer '" + layer.name +
                                        "' has invalid thickness or nz");
        if (layer.material.thermal_conductivity <= 0.0)
            throw std::invalid_argument("layer '" + layer.name +
                                        "' has nonpositive conductivity");
    }
    mesh.dx = mesh.die_width / grid.nx;
    mesh.dy = mesh.die_height / grid.ny;

    const PackageModel& pkg = stack.package;
    const int ratio = detail::package_coarsening(grid.nx, grid.ny, mesh.dx, mesh.dy);
    const double pdx = ratio * mesh.dx;
    const double pdy = ratio * mesh.dy;

    struct PlateSpec {
        SlabRole role;
        double thickness, k;
        int pad_x, pad_y;
    };
    std::vector<PlateSpec> plates; // inner (die side) to outer (ambient side)
    if (pkg.spreader_thickness > 0.0)
        plates.push_back({SlabRole::Spreader, pkg.spreader_thickness,
                          pkg.spreader_conductivity,
                          detail::overhang_cells(pkg.spreader_width, mesh.die_width, pdx),
                          detail::overhang_cells(pkg.spreader_width, mesh.die_height, pdy)});
    if (pkg.sink_base_thickness > 0.0)
        plates.push_back({SlabRole::Sink, pkg.sink_base_thickness,
                          pkg.sink_conductivity,
                          detail::overhang_cells(pkg.sink_width, mesh.die_width, pdx),
                          detail::overhang_cells(pkg.sink_width, mesh.die_height, pdy)});

    const bool attach_top = pkg.attach_side == AttachSide::Top;

    auto add_die_slabs = [&mesh, &grid](double& z) {
        for (int li = 0; li < static_cast<int>(mesh.stack.layers.size()); ++li) {
            const Layer& layer = mesh.stack.layers[li];
            const double dz = layer.thickness / layer.nz;
            for (int iz = 0; iz < layer.nz; ++iz) {
                Slab s;
                s.role = SlabRole::DieLayer;
                s.layer_index = li;
                s.iz_in_layer = iz;
                s.z0 = z;
                s.dz = dz;
                s.conductivity = layer.material.thermal_conductivity;
                s.x0 = 0.0;
                s.y0 = 0.0;
                s.dx = mesh.dx;
                s.dy = mesh.dy;
                s.nx = grid.nx;
                s.ny = grid.ny;
                mesh.slabs.push_back(s);
                z += dz;
            }
        }
    };
    auto add_plate_slab = [&mesh, &grid, ratio, pdx, pdy](const PlateSpec& p,
                                                          double& z) {
        Slab s;
        s.role = p.role;
        s.layer_index = -1;
        s.z0 = z;
        s.dz = p.thickness;
        s.conductivity = p.k;
        s.dx = pdx;
        s.dy = pdy;
        s.nx = grid.nx / ratio + 2 * p.pad_x;
        s.ny = grid.ny / ratio + 2 * p.pad_y;
        s.x0 = -p.pad_x * pdx;
        s.y0 = -p.pad_y * pdy;
        mesh.slabs.push_back(s);
        z += p.thickness;
    };

    double z = 0.0;
    if (attach_top) {
        add_die_slabs(z);
        for (const PlateSpec& p : plates) add_plate_slab(p, z);
        mesh.convection_slab = static_cast<int>(mesh.slabs.size()) - 1;
        mesh.convection_on_top = true;
        mesh.film_below_slab =
            plates.empty() ? -1
                           : static_cast<int>(mesh.slabs.size() - plates.size()) - 1;
    } else {
        double depth = 0.0;
        for (const PlateSpec& p : plates) depth += p.thickness;
        z = -depth;
        for (auto it = plates.rbegin(); it != plates.rend(); ++it)
            add_plate_slab(*it, z);
        const int n_plate_slabs = static_cast<int>(mesh.slabs.size());
        add_die_slabs(z);
        mesh.convection_slab = 0;
        mesh.convection_on_top = false;
        mesh.film_below_slab = plates.empty() ? -1 : n_plate_slabs - 1;
    }

    std::size_t offset = 0;
    for (Slab& s : mesh.slabs) {
        s.cell_offset = offset;
        offset += s.cell_count();
        if (s.role == SlabRole::DieLayer) mesh.die_cells += s.cell_count();
    }
    mesh.total_cells = offset;

    // Lateral block ownership per die layer: maximal footprint overlap,
    // ties to the lowest block index.
    mesh.owner.resize(stack.layers.size());
    for (size_t li = 0; li < stack.layers.size(); ++li) {
        const Floorplan& fp = stack.layers[li].floorplan;
        std::vector<int>& own = mesh.owner[li];
        std::vector<double> best(static_cast<size_t>(grid.nx) * grid.ny, 0.0);
        own.assign(static_cast<size_t>(grid.nx) * grid.ny, -1);
        for (int bi = 0; bi < static_cast<int>(fp.blocks.size()); ++bi) {
            const Block& b = fp.blocks[bi];
            const int ix0 = std::max(0, static_cast<int>(std::floor(b.x / mesh.dx)) - 1);
            const int ix1 = std::min(grid.nx, static_cast<int>(std::ceil(b.x_max() / mesh.dx)) + 1);
            const int iy0 = std::max(0, static_cast<int>(std::floor(b.y / mesh.dy)) - 1);
            const int iy1 = std::min(grid.ny, static_cast<int>(std::ceil(b.y_max() / mesh.dy)) + 1);
            for (int iy = iy0; iy < iy1; ++iy) {
                const double oy = std::max(0.0, std::min(b.y_max(), (iy + 1) * mesh.dy) -
                                                    std::max(b.y, iy * mesh.dy));
                if (oy <= 0.0) continue;
                for (int ix = ix0; ix < ix1; ++ix) {
                    const double ox = std::max(0.0, std::min(b.x_max(), (ix + 1) * mesh.dx) -
                                                        std::max(b.x, ix * mesh.dx));
                    if (ox <= 0.0) continue;
                    const double a = ox * oy;
                    const size_t c = static_cast<size_t>(iy) * grid.nx + ix;
                    if (a > best[c]) {
                        best[c] = a;
                        own[c] = bi;
                    }
                }
            }
        }
        for (size_t c = 0; c < own.size(); ++c) {
            if (own[c] < 0)
                throw std::invalid_argument(
                    "layer '" + stack.layers[li].name +
                    "' does not cover the die; run fill_background first");
        }
        // A powered block must be resolvable on this grid.
        for (int bi = 0; bi < static_cast<int>(fp.blocks.size()); ++bi) {
            const Block& b = fp.blocks[bi];
            if (b.power <= 0.0) continue;
            bool owns = false;
            for (size_t c = 0; c < own.size() && !owns; ++c) owns = own[c] == bi;
            if (owns) continue;
            bool center_inside = false;
            for (int iy = 0; iy < grid.ny && !center_inside; ++iy) {
                const double cy = (iy + 0.5) * mesh.dy;
                if (cy <= b.y || cy >= b.y_max()) continue;
                for (int ix = 0; ix < grid.nx; ++ix) {
                    const double cx = (ix + 0.5) * mesh.dx;
                    if (cx > b.x && cx < b.x_max()) { center_inside = true; break; }
                }
            }
            if (!center_inside)
                throw std::invalid_argument("grid too coarse for powered block '" +
                                            b.name + "'");
        }
    }
    return mesh;
}

/// Series two-half-cell conductance through a shared face of area `area`,
/// with an optional contact film in between. Symmetric in the two sides.
inline double face_conductance(double half_dist_a, double k_a, double half_dist_b,
                               double k_b, double area, double film_thickness = 0.0,
                               double film_k = 1.0) {
    double r = half_dist_a / (k_a * area) + half_dist_b / (k_b * area);
    if (film_thickness > 0.0) r += film_thickness / (film_k * area);
    return 1.0 / r;
}

} // namespace thermstack
