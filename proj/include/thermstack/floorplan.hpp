#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "thermstack/types.hpp"

namespace thermstack {

enum class ViolationKind {
    NonPositiveDimension,
    OutOfDie,
    DuplicateName,
    Overlap,
};

struct Violation {
    ViolationKind kind;
    std::string block_a;
    std::string block_b;      ///< second block for overlap/duplicate pairs
    double overlap_area = 0.0; ///< m², for Overlap
    std::string message;
};

struct ValidationResult {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

inline double overlap_area(const Block& a, const Block& b) {
    const double w = std::min(a.x_max(), b.x_max()) - std::max(a.x, b.x);
    const double h = std::min(a.y_max(), b.y_max()) - std::max(a.y, b.y);
    if (w <= 0.0 || h <= 0.0) return 0.0;
    return w * h;
}

/// Reports every violation in the floorplan: nonpositive dimensions,
/// out-of-die blocks, duplicate names and pairwise overlaps. Violations are
/// data, not failures; the result is independent of block order.
inline ValidationResult validate_floorplan(const Floorplan& fp) {
    ValidationResult result;
    auto add = [&result](Violation v) { result.violations.push_back(std::move(v)); };

    if (fp.die_width <= 0.0 || fp.die_height <= 0.0) {
        add({ViolationKind::NonPositiveDimension, "<die>", "", 0.0,
             "die dimensions must be positive"});
    }

    // Pair-order-stable indices: sort by name so permuting the input block
    // list yields the same violation set.
    std::vector<size_t> order(fp.blocks.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&fp](size_t i, size_t j) {
        if (fp.blocks[i].name != fp.blocks[j].name)
            return fp.blocks[i].name < fp.blocks[j].name;
        return i < j;
    });

    std::set<std::string> seen;
    for (size_t idx : order) {
        const Block& b = fp.blocks[idx];
        if (b.width <= 0.0 || b.height <= 0.0) {
            add({ViolationKind::NonPositiveDimension, b.name, "", 0.0,
                 "block '" + b.name + "' has nonpositive dimensions"});
        }
        if (b.power < 0.0) {
            add({ViolationKind::NonPositiveDimension, b.name, "", 0.0,
                 "block '" + b.name + "' has negative power"});
        }
        if (b.x < 0.0 || b.y < 0.0 || b.x_max() > fp.die_width ||
            b.y_max() > fp.die_height) {
            add({ViolationKind::OutOfDie, b.name, "", 0.0,
                 "block '" + b.name + "' extends outside the die"});
        }
        if (!seen.insert(b.name).second) {
            add({ViolationKind::DuplicateName, b.name, b.name, 0.0,
                 "duplicate block name '" + b.name + "'"});
        }
    }

    for (size_t a = 0; a < order.size(); ++a) {
        for (size_t b = a + 1; b < order.size(); ++b) {
            const Block& ba = fp.blocks[order[a]];
            const Block& bb = fp.blocks[order[b]];
            const double ov = overlap_area(ba, bb);
            if (ov > kOverlapTolerance) {
                add({ViolationKind::Overlap, ba.name, bb.name, ov,
                     "blocks '" + ba.name + "' and '" + bb.name + "' overlap"});
            }
        }
    }
    return result;
}

inline bool is_background_name(const std::string& name) {
    return name.rfind("_bg", 0) == 0;
}

/// Tiles the uncovered die area with zero-power background blocks named
/// "_bg<k>". The returned floorplan covers the die exactly (block areas sum
/// to the die area within 1e-12 relative).
inline Floorplan fill_background(const Floorplan& fp) {
    Floorplan out = fp;

    // Coordinate compression on block edges.
    std::vector<double> xs{0.0, fp.die_width};
    std::vector<double> ys{0.0, fp.die_height};
    for (const Block& b : fp.blocks) {
        if (b.x > 0.0 && b.x < fp.die_width) xs.push_back(b.x);
        if (b.x_max() > 0.0 && b.x_max() < fp.die_width) xs.push_back(b.x_max());
        if (b.y > 0.0 && b.y < fp.die_height) ys.push_back(b.y);
        if (b.y_max() > 0.0 && b.y_max() < fp.die_height) ys.push_back(b.y_max());
    }
    auto compress = [](std::vector<double>& v, double extent) {
        std::sort(v.begin(), v.end());
        const double eps = extent * 1e-12;
        std::vector<double> u;
        for (double c : v) {
            if (u.empty() || c - u.back() > eps) u.push_back(c);
        }
        v = std::move(u);
    };
    compress(xs, fp.die_width);
    compress(ys, fp.die_height);

    const size_t ncx = xs.size() - 1;
    const size_t ncy = ys.size() - 1;
    std::vector<char> covered(ncx * ncy, 0);
    for (const Block& b : fp.blocks) {
        for (size_t j = 0; j < ncy; ++j) {
            const double cy = 0.5 * (ys[j] + ys[j + 1]);
            if (cy <= b.y || cy >= b.y_max()) continue;
            for (size_t i = 0; i < ncx; ++i) {
                const double cx = 0.5 * (xs[i] + xs[i + 1]);
                if (cx > b.x && cx < b.x_max()) covered[j * ncx + i] = 1;
            }
        }
    }

    // Greedy rectangles: grow runs along x, then extend down matching rows.
    int bg_index = 0;
    for (size_t j = 0; j < ncy; ++j) {
        for (size_t i = 0; i < ncx; ++i) {
            if (covered[j * ncx + i]) continue;
            size_t i1 = i;
            while (i1 + 1 < ncx && !covered[j * ncx + i1 + 1]) ++i1;
            size_t j1 = j;
            while (j1 + 1 < ncy) {
                bool row_free = true;
                for (size_t k = i; k <= i1; ++k) {
                    if (covered[(j1 + 1) * ncx + k]) { row_free = false; break; }
                }
                // Only merge a row whose free run starts/ends at the same
                // columns, so marking cells covered stays consistent.
                if (row_free && i > 0 && !covered[(j1 + 1) * ncx + i - 1]) row_free = false;
                if (row_free && i1 + 1 < ncx && !covered[(j1 + 1) * ncx + i1 + 1]) row_free = false;
                if (!row_free) break;
                ++j1;
            }
            for (size_t jj = j; jj <= j1; ++jj)
                for (size_t k = i; k <= i1; ++k) covered[jj * ncx + k] = 1;
            Block bg;
            bg.name = "_bg" + std::to_string(bg_index++);
            bg.x = xs[i];
            bg.y = ys[j];
            bg.width = xs[i1 + 1] - xs[i];
            bg.height = ys[j1 + 1] - ys[j];
            bg.power = 0.0;
            out.blocks.push_back(bg);
            i = i1;
        }
    }
    return out;
}

inline double total_block_area(const Floorplan& fp) {
    double a = 0.0;
    for (const Block& b : fp.blocks) a += b.area();
    return a;
}

} // namespace thermstack
