#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "thermstack/formats.hpp"
#include "thermstack/mesh.hpp"
#include "thermstack/sparse.hpp"

namespace thermstack {

namespace detail {

struct Face {
    int a, b;  ///< a < b
    double g;
};

/// Vertical faces between consecutive slabs. Cells of the finer slab nest in
/// the coarser slab's lattice; each fine cell couples through its own
/// footprint to the containing coarse cell.
inline void vertical_faces(const Mesh& mesh, int lower, int upper, double film_t,
                           double film_k, std::vector<Face>& faces) {
    const Slab& lo = mesh.slab(lower);
    const Slab& up = mesh.slab(upper);
    const bool lower_finer = lo.dx <= up.dx;
    const Slab& fine = lower_finer ? lo : up;
    const Slab& coarse = lower_finer ? up : lo;
    for (int iy = 0; iy < fine.ny; ++iy) {
        const double cy = fine.center_y(iy);
        if (cy < coarse.y0 || cy > coarse.y0 + coarse.ny * coarse.dy) continue;
        const int jy = std::min(coarse.ny - 1,
                                static_cast<int>((cy - coarse.y0) / coarse.dy));
        for (int ix = 0; ix < fine.nx; ++ix) {
            const double cx = fine.center_x(ix);
            if (cx < coarse.x0 || cx > coarse.x0 + coarse.nx * coarse.dx) continue;
            const int jx = std::min(coarse.nx - 1,
                                    static_cast<int>((cx - coarse.x0) / coarse.dx));
            const double area = fine.cell_area();
            const double g = face_conductance(0.5 * lo.dz, lo.conductivity,
                                              0.5 * up.dz, up.conductivity, area,
                                              film_t, film_k);
            int a = static_cast<int>(fine.flat(ix, iy));
            int b = static_cast<int>(coarse.flat(jx, jy));
            if (a > b) std::swap(a, b);
            faces.push_back({a, b, g});
        }
    }
}

} // namespace detail

/// Assembles the conductance matrix and the ambient boundary contribution.
/// Interior faces use the two-half-cell series conductance; lateral rim and
/// unmated vertical faces are adiabatic; the outermost package face couples
/// every cell to ambient through its share of the convection resistance.
inline SparseSystem assemble(const Mesh& mesh) {
    const PackageModel& pkg = mesh.stack.package;
    const int n = static_cast<int>(mesh.total_cells);

    std::vector<detail::Face> faces;
    faces.reserve(mesh.total_cells * 3);

    // Lateral faces within each slab.
    for (const Slab& s : mesh.slabs) {
        for (int iy = 0; iy < s.ny; ++iy) {
            for (int ix = 0; ix < s.nx; ++ix) {
                const int a = static_cast<int>(s.flat(ix, iy));
                if (ix + 1 < s.nx) {
                    const double g = face_conductance(0.5 * s.dx, s.conductivity,
                                                      0.5 * s.dx, s.conductivity,
                                                      s.dy * s.dz);
                    faces.push_back({a, static_cast<int>(s.flat(ix + 1, iy)), g});
                }
                if (iy + 1 < s.ny) {
                    const double g = face_conductance(0.5 * s.dy, s.conductivity,
                                                      0.5 * s.dy, s.conductivity,
                                                      s.dx * s.dz);
                    faces.push_back({a, static_cast<int>(s.flat(ix, iy + 1)), g});
                }
            }
        }
    }

    // Vertical faces between consecutive slabs.
    for (int i = 0; i + 1 < static_cast<int>(mesh.slabs.size()); ++i) {
        const bool has_film = (i == mesh.film_below_slab);
        detail::vertical_faces(mesh, i, i + 1,
                               has_film ? pkg.interface_thickness : 0.0,
                               pkg.interface_conductivity, faces);
    }

    // Convection couplings on the outer face.
    SparseSystem sys;
    sys.ambient = pkg.ambient;
    {
        const Slab& s = mesh.slab(mesh.convection_slab);
        const double a_total = s.nx * s.ny * s.cell_area();
        const bool film_here = mesh.film_below_slab < 0; // no plates: film folds in
        for (int iy = 0; iy < s.ny; ++iy) {
            for (int ix = 0; ix < s.nx; ++ix) {
                const double area = s.cell_area();
                double r = (0.5 * s.dz) / (s.conductivity * area);
                if (film_here && pkg.interface_thickness > 0.0)
                    r += pkg.interface_thickness / (pkg.interface_conductivity * area);
                r += pkg.convection_resistance * (a_total / area);
                sys.boundary.push_back({static_cast<int>(s.flat(ix, iy)), 1.0 / r});
            }
        }
    }

    // CSR assembly with sorted columns.
    std::vector<int> count(static_cast<size_t>(n) + 1, 0);
    for (const auto& f : faces) {
        ++count[static_cast<size_t>(f.a) + 1];
        ++count[static_cast<size_t>(f.b) + 1];
    }
    for (int i = 0; i < n; ++i) ++count[static_cast<size_t>(i) + 1]; // diagonal
    SparseMatrix& G = sys.G;
    G.n = n;
    G.row_ptr.assign(count.begin(), count.end());
    for (int i = 0; i < n; ++i) G.row_ptr[i + 1] += G.row_ptr[i];
    G.col.assign(G.row_ptr.back(), 0);
    G.val.assign(G.row_ptr.back(), 0.0);

    std::vector<int> cursor(G.row_ptr.begin(), G.row_ptr.end() - 1);
    std::vector<double> diag(static_cast<size_t>(n), 0.0);
    auto push = [&G, &cursor](int i, int j, double v) {
        const int k = cursor[static_cast<size_t>(i)]++;
        G.col[static_cast<size_t>(k)] = j;
        G.val[static_cast<size_t>(k)] = v;
    };
    // Reserve the diagonal slot first so each row can accumulate into it.
    for (int i = 0; i < n; ++i) push(i, i, 0.0);
    for (const auto& f : faces) {
        push(f.a, f.b, -f.g);
        push(f.b, f.a, -f.g);
        diag[static_cast<size_t>(f.a)] += f.g;
        diag[static_cast<size_t>(f.b)] += f.g;
    }
    sys.P.assign(static_cast<size_t>(n), 0.0);
    for (const auto& bc : sys.boundary) {
        diag[static_cast<size_t>(bc.cell)] += bc.conductance;
        sys.P[static_cast<size_t>(bc.cell)] += sys.ambient * bc.conductance;
    }
    for (int i = 0; i < n; ++i) G.val[static_cast<size_t>(G.row_ptr[i])] = diag[static_cast<size_t>(i)];

    // Sort each row's columns (diagonal slot participates).
    for (int i = 0; i < n; ++i) {
        const int b = G.row_ptr[i];
        const int e = G.row_ptr[i + 1];
        std::vector<std::pair<int, double>> row;
        row.reserve(static_cast<size_t>(e - b));
        for (int k = b; k < e; ++k) row.emplace_back(G.col[k], G.val[k]);
        std::sort(row.begin(), row.end(),
                  [](const auto& l, const auto& r) { return l.first < r.first; });
        // Merge duplicates (parallel faces between the same cell pair cannot
        // occur, but keep assembly robust).
        int w = b;
        for (size_t k = 0; k < row.size(); ++k) {
            if (w > b && G.col[w - 1] == row[k].first) {
                G.val[w - 1] += row[k].second;
            } else {
                G.col[w] = row[k].first;
                G.val[w] = row[k].second;
                ++w;
            }
        }
        if (w != e) throw std::logic_error("unexpected duplicate matrix entries");
    }
    return sys;
}

/// Source power vector: each block's power is split across the cells its
/// footprint overlaps, proportionally to overlap area, and uniformly across
/// the owning layer's z-slabs.
inline std::vector<double> power_vector(const Mesh& mesh) {
    std::vector<double> p(mesh.total_cells, 0.0);
    for (size_t li = 0; li < mesh.stack.layers.size(); ++li) {
        const Layer& layer = mesh.stack.layers[li];
        const auto [first_slab, nslabs] = mesh.layer_slab_range(static_cast<int>(li));
        for (const Block& b : layer.floorplan.blocks) {
            if (b.power <= 0.0) continue;
            // Footprint overlap weights on the lateral grid.
            const int ix0 = std::max(0, static_cast<int>(std::floor(b.x / mesh.dx)) - 1);
            const int ix1 = std::min(mesh.grid.nx,
                                     static_cast<int>(std::ceil(b.x_max() / mesh.dx)) + 1);
            const int iy0 = std::max(0, static_cast<int>(std::floor(b.y / mesh.dy)) - 1);
            const int iy1 = std::min(mesh.grid.ny,
                                     static_cast<int>(std::ceil(b.y_max() / mesh.dy)) + 1);
            std::vector<std::pair<size_t, double>> weights;
            double total = 0.0;
            for (int iy = iy0; iy < iy1; ++iy) {
                const double oy = std::max(0.0, std::min(b.y_max(), (iy + 1) * mesh.dy) -
                                                    std::max(b.y, iy * mesh.dy));
                if (oy <= 0.0) continue;
                for (int ix = ix0; ix < ix1; ++ix) {
                    const double ox = std::max(0.0, std::min(b.x_max(), (ix + 1) * mesh.dx) -
                                                        std::max(b.x, ix * mesh.dx));
                    if (ox <= 0.0) continue;
                    weights.emplace_back(static_cast<size_t>(iy) * mesh.grid.nx + ix,
                                         ox * oy);
                    total += ox * oy;
                }
            }
            if (weights.empty() || total <= 0.0)
                throw std::invalid_argument("block '" + b.name +
                                            "' covers no cells on this grid");
            const double per_slab = b.power / (total * nslabs);
            for (const auto& [lateral, w] : weights) {
                for (int sz = 0; sz < nslabs; ++sz) {
                    const Slab& s = mesh.slab(first_slab + sz);
                    p[s.cell_offset + lateral] += w * per_slab;
                }
            }
        }
    }
    return p;
}

/// power_vector with per-layer overrides; every entry must name a block in
/// the corresponding layer's floorplan.
inline std::vector<double> power_vector(const Mesh& mesh,
                                        const std::vector<PowerMap>& per_layer) {
    Mesh tmp = mesh;
    if (per_layer.size() != tmp.stack.layers.size())
        throw std::invalid_argument("power override must list one map per layer");
    for (size_t li = 0; li < per_layer.size(); ++li)
        apply_power(tmp.stack.layers[li].floorplan, per_layer[li]);
    return power_vector(tmp);
}

inline double total_source_power(const std::vector<double>& p) {
    double s = 0.0;
    for (double v : p) s += v;
    return s;
}

} // namespace thermstack
