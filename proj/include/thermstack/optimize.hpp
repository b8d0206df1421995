#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "thermstack/formats.hpp"
#include "thermstack/pipeline.hpp"

namespace thermstack {

struct MovableBlock {
    std::string name;
    double width = 0.0, height = 0.0;
    double power = 0.0;
};

struct PlacedBlock {
    int layer = 0;
    double x = 0.0, y = 0.0;
};

/// Positions of the movable blocks, aligned with PlacementProblem::blocks.
struct Placement {
    std::vector<PlacedBlock> blocks;
};

struct AnnealSchedule {
    double t0_K = 20.0;
    double cooling = 0.9;
    int epochs = 50;
    int moves_per_epoch = 40;
};

/// Lattice-restricted placement search over one or more silicon layers.
/// The stack template supplies die, layers and package; its powered blocks
/// in the placeable layers become the movable blocks (and the initial
/// placement for annealing).
struct PlacementProblem {
    Stack stack_template;             ///< movable blocks stripped at build time
    std::vector<MovableBlock> blocks;
    Placement initial;
    std::vector<int> placeable_layers;
    double step = 0.004;              ///< candidate lattice pitch, m
    GridSpec objective_grid{32, 32};
    GridSpec rescore_grid{64, 64};
    double rel_tol = 1e-8;
};

struct TraceEntry {
    int iteration = 0;
    std::uint64_t placement_hash = 0;
    double objective_K = 0.0;
    bool accepted = false;
    double best_K = 0.0;
};

struct SearchTrace {
    std::uint64_t seed = 0;
    AnnealSchedule schedule;
    std::vector<TraceEntry> entries;
};

namespace detail {

inline double snap(double v, double step) { return std::round(v / step) * step; }

} // namespace detail

/// Splits powered blocks of the placeable layers out of a stack into a
/// placement problem. Initial positions are snapped to the lattice.
inline PlacementProblem make_problem(const Stack& stack,
                                     std::vector<int> placeable_layers = {},
                                     double step = 0.004) {
    PlacementProblem prob;
    prob.stack_template = stack;
    prob.step = step;
    if (placeable_layers.empty()) {
        for (int li = 0; li < static_cast<int>(stack.layers.size()); ++li)
            for (const Block& b : stack.layers[static_cast<size_t>(li)].floorplan.blocks)
                if (b.power > 0.0) {
                    placeable_layers.push_back(li);
                    break;
                }
    }
    prob.placeable_layers = placeable_layers;
    if (prob.placeable_layers.empty())
        throw std::invalid_argument("no placeable layers (no powered blocks)");
    for (int li : prob.placeable_layers) {
        if (li < 0 || li >= static_cast<int>(stack.layers.size()))
            throw std::invalid_argument("placeable layer index out of range");
        Floorplan& fp = prob.stack_template.layers[static_cast<size_t>(li)].floorplan;
        std::vector<Block> keep;
        for (const Block& b : fp.blocks) {
            if (b.power > 0.0) {
                prob.blocks.push_back({b.name, b.width, b.height, b.power});
                prob.initial.blocks.push_back(
                    {li, detail::snap(b.x, step), detail::snap(b.y, step)});
            } else {
                keep.push_back(b);
            }
        }
        fp.blocks = keep;
    }
    if (prob.blocks.empty())
        throw std::invalid_argument("problem has no movable blocks");
    return prob;
}

/// Stack with the movable blocks placed; throws on invalid placements.
inline Stack apply_placement(const PlacementProblem& prob, const Placement& placement,
                             bool validate = true) {
    if (placement.blocks.size() != prob.blocks.size())
        throw std::invalid_argument("placement size mismatch");
    Stack stack = prob.stack_template;
    for (size_t i = 0; i < prob.blocks.size(); ++i) {
        const MovableBlock& mb = prob.blocks[i];
        const PlacedBlock& pb = placement.blocks[i];
        if (std::find(prob.placeable_layers.begin(), prob.placeable_layers.end(),
                      pb.layer) == prob.placeable_layers.end())
            throw std::invalid_argument("block '" + mb.name +
                                        "' placed on a non-placeable layer");
        stack.layers[static_cast<size_t>(pb.layer)].floorplan.blocks.push_back(
            Block{mb.name, pb.x, pb.y, mb.width, mb.height, mb.power});
    }
    if (validate) {
        for (int li : prob.placeable_layers) {
            const auto check =
                validate_floorplan(stack.layers[static_cast<size_t>(li)].floorplan);
            if (!check.ok())
                throw std::invalid_argument("invalid placement: " +
                                            check.violations.front().message);
        }
    }
    return stack;
}

inline bool placement_valid(const PlacementProblem& prob, const Placement& placement) {
    if (placement.blocks.size() != prob.blocks.size()) return false;
    for (size_t i = 0; i < placement.blocks.size(); ++i) {
        const PlacedBlock& pb = placement.blocks[i];
        const MovableBlock& mb = prob.blocks[i];
        if (std::find(prob.placeable_layers.begin(), prob.placeable_layers.end(),
                      pb.layer) == prob.placeable_layers.end())
            return false;
        const Floorplan& fp =
            prob.stack_template.layers[static_cast<size_t>(pb.layer)].floorplan;
        if (pb.x < 0.0 || pb.y < 0.0 || pb.x + mb.width > fp.die_width + 1e-12 ||
            pb.y + mb.height > fp.die_height + 1e-12)
            return false;
        const Block a{mb.name, pb.x, pb.y, mb.width, mb.height, mb.power};
        for (const Block& st : fp.blocks)
            if (st.power > 0.0 && overlap_area(a, st) > kOverlapTolerance) return false;
        for (size_t j = i + 1; j < placement.blocks.size(); ++j) {
            if (placement.blocks[j].layer != pb.layer) continue;
            const MovableBlock& mj = prob.blocks[j];
            const Block b{mj.name, placement.blocks[j].x, placement.blocks[j].y,
                          mj.width, mj.height, mj.power};
            if (overlap_area(a, b) > kOverlapTolerance) return false;
        }
    }
    return true;
}

inline std::uint64_t placement_hash(const PlacementProblem& prob,
                                    const Placement& placement) {
    std::uint64_t h = 1469598103934665603ull; // FNV-1a
    auto mix = [&h](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ull;
    };
    for (const PlacedBlock& pb : placement.blocks) {
        mix(static_cast<std::uint64_t>(pb.layer) + 1);
        mix(static_cast<std::uint64_t>(std::llround(pb.x / prob.step)) + 7);
        mix(static_cast<std::uint64_t>(std::llround(pb.y / prob.step)) + 13);
    }
    return h;
}

/// Full-pipeline objective: global peak on the objective grid.
inline double peak_objective(const PlacementProblem& prob, const Placement& placement) {
    if (prob.blocks.empty()) return prob.stack_template.package.ambient;
    const Stack stack = apply_placement(prob, placement);
    SolveOptions opts;
    opts.rel_tol = prob.rel_tol;
    return run_stack(stack, prob.objective_grid, opts).report.peak.value_K;
}

/// Superposition evaluator: the conductance matrix is independent of block
/// positions (blocks only inject power), so the field of a placement is
/// ambient plus the sum of precomputed per-site unit responses. Scores match
/// peak_objective to solver tolerance at a fraction of the cost.
class PlacementEvaluator {
  public:
    PlacementEvaluator(const PlacementProblem& prob, GridSpec grid)
        : prob_(prob), grid_(grid) {
        Stack filled = prob.stack_template;
        for (Layer& layer : filled.layers)
            layer.floorplan = fill_background(layer.floorplan);
        mesh_ = discretize(filled, grid_);
        system_ = assemble(mesh_);
        die_cells_ = mesh_.die_cells;

        // Static part: template blocks that still carry power.
        static_excess_.assign(mesh_.total_cells, 0.0);
        const auto p_static = power_vector(mesh_);
        if (total_source_power(p_static) > 0.0)
            static_excess_ = excess_response(p_static);
    }

    double ambient() const { return system_.ambient; }

    /// Peak temperature over die cells for a placement.
    double peak(const Placement& placement) {
        std::vector<double> acc = static_excess_;
        for (size_t i = 0; i < placement.blocks.size(); ++i) {
            const auto& field = site_response(i, placement.blocks[i]);
            for (size_t c = 0; c < die_cells_; ++c) acc[c] += field[c];
        }
        double peak = -1e300;
        for (size_t c = 0; c < die_cells_; ++c) peak = std::max(peak, acc[c]);
        return system_.ambient + peak;
    }

  private:
    std::vector<double> excess_response(const std::vector<double>& p_src) {
        SparseSystem sys = system_;
        for (size_t i = 0; i < p_src.size(); ++i) sys.P[i] += p_src[i];
        const TemperatureField field = solve_steady(sys, prob_.rel_tol);
        std::vector<double> excess(field.values.size());
        for (size_t i = 0; i < excess.size(); ++i)
            excess[i] = field.values[i] - system_.ambient;
        return excess;
    }

    const std::vector<double>& site_response(size_t block_index, const PlacedBlock& pb) {
        const MovableBlock& mb = prob_.blocks[block_index];
        const auto key = std::make_tuple(pb.layer, std::llround(pb.x / prob_.step),
                                         std::llround(pb.y / prob_.step), mb.width,
                                         mb.height, mb.power);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;

        // Inject only this block's power through the shared mesh.
        Mesh tmp = mesh_;
        for (Layer& layer : tmp.stack.layers)
            for (Block& other : layer.floorplan.blocks) other.power = 0.0;
        tmp.stack.layers[static_cast<size_t>(pb.layer)].floorplan.blocks.push_back(
            Block{mb.name, pb.x, pb.y, mb.width, mb.height, mb.power});
        const auto p = power_vector(tmp);
        return cache_.emplace(key, excess_response(p)).first->second;
    }

    PlacementProblem prob_;
    GridSpec grid_;
    Mesh mesh_;
    SparseSystem system_;
    size_t die_cells_ = 0;
    std::vector<double> static_excess_;
    std::map<std::tuple<int, long long, long long, double, double, double>,
             std::vector<double>>
        cache_;
};

namespace detail {

struct LatticeSite {
    int layer;
    int ix, iy;
};

inline std::vector<LatticeSite> lattice_sites(const PlacementProblem& prob,
                                              const MovableBlock& mb) {
    std::vector<LatticeSite> sites;
    for (int li : prob.placeable_layers) {
        const Floorplan& fp =
            prob.stack_template.layers[static_cast<size_t>(li)].floorplan;
        const int nx = static_cast<int>(
            std::floor((fp.die_width - mb.width) / prob.step + 1e-9)) + 1;
        const int ny = static_cast<int>(
            std::floor((fp.die_height - mb.height) / prob.step + 1e-9)) + 1;
        for (int iy = 0; iy < ny; ++iy)
            for (int ix = 0; ix < nx; ++ix) sites.push_back({li, ix, iy});
    }
    return sites;
}

/// Canonical key of a placement under the die symmetry group (8-fold for a
/// square die, 4-fold otherwise). Layers never swap.
inline std::vector<std::array<long long, 3>> canonical_key(
    const PlacementProblem& prob, const Placement& placement) {
    const Floorplan& fp0 =
        prob.stack_template.layers[static_cast<size_t>(prob.placeable_layers.front())]
            .floorplan;
    const double w = fp0.die_width, h = fp0.die_height;
    const bool square = std::abs(w - h) < 1e-12;
    std::vector<std::vector<std::array<long long, 3>>> images;
    const int transforms = square ? 8 : 4;
    for (int t = 0; t < transforms; ++t) {
        std::vector<std::array<long long, 3>> key;
        for (size_t i = 0; i < placement.blocks.size(); ++i) {
            const MovableBlock& mb = prob.blocks[i];
            const PlacedBlock& pb = placement.blocks[i];
            double x = pb.x, y = pb.y, bw = mb.width, bh = mb.height;
            if (t & 1) x = w - x - bw;                      // mirror x
            if (t & 2) y = h - y - bh;                      // mirror y
            if (square && (t & 4)) {                        // transpose
                std::swap(x, y);
                std::swap(bw, bh);
            }
            key.push_back({pb.layer, std::llround(y / prob.step),
                           std::llround(x / prob.step)});
        }
        std::sort(key.begin(), key.end());
        images.push_back(std::move(key));
    }
    return *std::min_element(images.begin(), images.end());
}

inline std::vector<std::array<long long, 3>> sorted_key(const PlacementProblem& prob,
                                                        const Placement& placement) {
    std::vector<std::array<long long, 3>> key;
    for (const PlacedBlock& pb : placement.blocks)
        key.push_back({pb.layer, std::llround(pb.y / prob.step),
                       std::llround(pb.x / prob.step)});
    std::sort(key.begin(), key.end());
    return key;
}

} // namespace detail

struct ExhaustiveResult {
    Placement best;
    double best_objective_K = 0.0;  ///< objective-grid score
    double rescored_peak_K = 0.0;   ///< rescore-grid full-pipeline score
    std::vector<std::pair<Placement, double>> evaluated;
};

constexpr std::size_t kExhaustiveGuard = 100000;

/// Evaluates every valid lattice placement modulo the die symmetry group.
/// Identical blocks are interchangeable, so candidates enumerate unordered
/// site combinations per identical-block group. The top five candidates are
/// re-scored with the full pipeline on the rescore grid; ties break to the
/// lexicographically least (layer, y, x) key.
inline ExhaustiveResult optimize_exhaustive(const PlacementProblem& prob) {
    using detail::LatticeSite;
    // Group identical blocks (same shape and power).
    std::map<std::tuple<double, double, double>, std::vector<size_t>> groups;
    for (size_t i = 0; i < prob.blocks.size(); ++i)
        groups[{prob.blocks[i].width, prob.blocks[i].height, prob.blocks[i].power}]
            .push_back(i);

    std::vector<std::vector<size_t>> group_members;
    std::vector<std::vector<LatticeSite>> group_sites;
    for (auto& [sig, members] : groups) {
        group_members.push_back(members);
        group_sites.push_back(
            detail::lattice_sites(prob, prob.blocks[members.front()]));
    }

    // Enumerate unordered site combinations per group, cross product across
    // groups, depth-first.
    std::vector<Placement> candidates;
    std::set<std::vector<std::array<long long, 3>>> seen;
    Placement current;
    current.blocks.assign(prob.blocks.size(), {});

    std::function<void(size_t)> recurse_group = [&](size_t gi) {
        if (gi == group_members.size()) {
            if (!placement_valid(prob, current)) return;
            if (seen.insert(detail::canonical_key(prob, current)).second) {
                candidates.push_back(current);
                if (candidates.size() > kExhaustiveGuard)
                    throw std::invalid_argument(
                        "exhaustive search exceeds the candidate guard");
            }
            return;
        }
        const auto& members = group_members[gi];
        const auto& sites = group_sites[gi];
        std::vector<int> pick(members.size());
        std::function<void(size_t, int)> choose = [&](size_t mi, int from) {
            if (mi == members.size()) {
                recurse_group(gi + 1);
                return;
            }
            for (int s = from; s < static_cast<int>(sites.size()); ++s) {
                const LatticeSite& site = sites[static_cast<size_t>(s)];
                current.blocks[members[mi]] = {site.layer, site.ix * prob.step,
                                               site.iy * prob.step};
                choose(mi + 1, s + 1);
            }
        };
        choose(0, 0);
    };
    recurse_group(0);

    if (candidates.empty())
        throw std::invalid_argument("no valid lattice placement exists");

    PlacementEvaluator eval(prob, prob.objective_grid);
    ExhaustiveResult result;
    result.evaluated.reserve(candidates.size());
    for (const Placement& cand : candidates)
        result.evaluated.emplace_back(cand, eval.peak(cand));

    // Rank by objective; rescore the leaders with the full pipeline.
    std::vector<size_t> order(result.evaluated.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (result.evaluated[a].second != result.evaluated[b].second)
            return result.evaluated[a].second < result.evaluated[b].second;
        return detail::sorted_key(prob, result.evaluated[a].first) <
               detail::sorted_key(prob, result.evaluated[b].first);
    });
    const size_t top = std::min<size_t>(5, order.size());
    size_t best_index = order[0];
    double best_rescore = 1e300;
    for (size_t k = 0; k < top; ++k) {
        PlacementProblem rescore_prob = prob;
        rescore_prob.objective_grid = prob.rescore_grid;
        const double score =
            peak_objective(rescore_prob, result.evaluated[order[k]].first);
        if (score < best_rescore - 1e-12 ||
            (std::abs(score - best_rescore) <= 1e-12 &&
             detail::sorted_key(prob, result.evaluated[order[k]].first) <
                 detail::sorted_key(prob, result.evaluated[best_index].first))) {
            best_rescore = score;
            best_index = order[k];
        }
    }
    result.best = result.evaluated[best_index].first;
    result.best_objective_K = result.evaluated[best_index].second;
    result.rescored_peak_K = best_rescore;
    return result;
}

struct AnnealResult {
    Placement best;
    double best_objective_K = 0.0;
    SearchTrace trace;
};

/// Simulated annealing over the same lattice: translate, swap or relayer one
/// block per move with Metropolis acceptance. Deterministic for a fixed seed.
/// Pass a shared evaluator to reuse site responses across seeds.
inline AnnealResult optimize_anneal(const PlacementProblem& prob, std::uint64_t seed,
                                    const AnnealSchedule& schedule = {},
                                    PlacementEvaluator* shared_eval = nullptr) {
    if (!placement_valid(prob, prob.initial))
        throw std::invalid_argument("no valid initial placement");

    std::mt19937_64 rng(seed);
    std::optional<PlacementEvaluator> own_eval;
    if (!shared_eval) own_eval.emplace(prob, prob.objective_grid);
    PlacementEvaluator& eval = shared_eval ? *shared_eval : *own_eval;

    AnnealResult result;
    result.trace.seed = seed;
    result.trace.schedule = schedule;

    Placement current = prob.initial;
    double current_obj = eval.peak(current);
    result.best = current;
    result.best_objective_K = current_obj;

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double temp = schedule.t0_K;
    int iteration = 0;
    for (int epoch = 0; epoch < schedule.epochs; ++epoch) {
        for (int move = 0; move < schedule.moves_per_epoch; ++move) {
            ++iteration;
            Placement proposal = current;
            const int kind = static_cast<int>(rng() % 3);
            const size_t bi = static_cast<size_t>(rng() % proposal.blocks.size());
            if (kind == 0) {
                // Translate by one lattice step.
                const int dir = static_cast<int>(rng() % 4);
                const double dx = (dir == 0) ? prob.step : (dir == 1) ? -prob.step : 0.0;
                const double dy = (dir == 2) ? prob.step : (dir == 3) ? -prob.step : 0.0;
                proposal.blocks[bi].x += dx;
                proposal.blocks[bi].y += dy;
            } else if (kind == 1 && proposal.blocks.size() > 1) {
                size_t bj = static_cast<size_t>(rng() % proposal.blocks.size());
                if (bj == bi) bj = (bj + 1) % proposal.blocks.size();
                std::swap(proposal.blocks[bi], proposal.blocks[bj]);
            } else {
                // Move to another placeable layer at the same position.
                if (prob.placeable_layers.size() > 1) {
                    const auto& layers = prob.placeable_layers;
                    const size_t li = static_cast<size_t>(rng() % layers.size());
                    proposal.blocks[bi].layer = layers[li];
                }
            }
            if (!placement_valid(prob, proposal)) continue;

            const double obj = eval.peak(proposal);
            const double delta = obj - current_obj;
            const bool accept = delta <= 0.0 || unit(rng) < std::exp(-delta / temp);
            if (accept) {
                current = proposal;
                current_obj = obj;
                if (obj < result.best_objective_K) {
                    result.best = proposal;
                    result.best_objective_K = obj;
                }
            }
            result.trace.entries.push_back({iteration,
                                            placement_hash(prob, proposal), obj,
                                            accept, result.best_objective_K});
        }
        temp *= schedule.cooling;
    }
    return result;
}

inline std::string write_trace_csv(const SearchTrace& trace) {
    std::string out = "iteration,placement_hash,objective_K,accepted,best_K\n";
    char buf[128];
    for (const TraceEntry& e : trace.entries) {
        std::snprintf(buf, sizeof(buf), "%d,%016llx,%.17g,%d,%.17g\n", e.iteration,
                      static_cast<unsigned long long>(e.placement_hash),
                      e.objective_K, e.accepted ? 1 : 0, e.best_K);
        out += buf;
    }
    return out;
}

enum class OptimizeMethod { Exhaustive, Anneal };

struct ProblemConfig {
    PlacementProblem problem;
    OptimizeMethod method = OptimizeMethod::Anneal;
    std::uint64_t seed = 1;
    AnnealSchedule schedule;
};

/// Problem file: a stack config plus an [optimize] section with step_m,
/// method, seed, schedule parameters, the objective grid and the placeable
/// layer list.
inline ProblemConfig parse_problem(const std::string& text,
                                   const std::string& config_path = "") {
    std::string stack_text, opt_text;
    bool in_optimize = false;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto stripped = detail::strip_comment(line);
        const auto b = stripped.find_first_not_of(" \t\r");
        std::string head =
            b == std::string::npos ? std::string() : stripped.substr(b);
        if (!head.empty() && head.front() == '[')
            in_optimize = head.rfind("[optimize]", 0) == 0;
        (in_optimize ? opt_text : stack_text) += line + "\n";
    }

    const StackConfig stack_cfg = parse_stack_config(stack_text, config_path);

    ProblemConfig cfg;
    double step = 0.004;
    std::vector<int> layers;
    GridSpec objective{32, 32};
    for (const auto& sec : detail::parse_ini(opt_text)) {
        for (size_t i = 0; i < sec.keys.size(); ++i) {
            const auto& [k, v] = sec.keys[i];
            const int ln = sec.key_lines[i];
            if (k == "step_m") step = detail::parse_number(v, ln);
            else if (k == "method") {
                if (v == "exhaustive") cfg.method = OptimizeMethod::Exhaustive;
                else if (v == "anneal") cfg.method = OptimizeMethod::Anneal;
                else throw ParseError("method must be 'exhaustive' or 'anneal'", ln);
            } else if (k == "seed") cfg.seed = static_cast<std::uint64_t>(detail::parse_number(v, ln));
            else if (k == "t0_K") cfg.schedule.t0_K = detail::parse_number(v, ln);
            else if (k == "cooling") cfg.schedule.cooling = detail::parse_number(v, ln);
            else if (k == "epochs") cfg.schedule.epochs = static_cast<int>(detail::parse_number(v, ln));
            else if (k == "moves_per_epoch") cfg.schedule.moves_per_epoch = static_cast<int>(detail::parse_number(v, ln));
            else if (k == "objective_nx") objective.nx = static_cast<int>(detail::parse_number(v, ln));
            else if (k == "objective_ny") objective.ny = static_cast<int>(detail::parse_number(v, ln));
            else if (k == "layers") {
                std::istringstream ls(v);
                std::string tok;
                while (std::getline(ls, tok, ','))
                    layers.push_back(static_cast<int>(detail::parse_number(tok, ln)));
            } else {
                throw ParseError("unknown key '" + k + "' in [optimize]", ln);
            }
        }
    }
    if (step <= 0.0) throw ParseError("[optimize] step_m must be positive");
    cfg.problem = make_problem(stack_cfg.stack, layers, step);
    cfg.problem.objective_grid = objective;
    cfg.problem.rescore_grid = stack_cfg.grid;
    return cfg;
}

/// Minimum pairwise center distance of a placement (3D distances collapse to
/// lateral ones; layers are thin).
inline double min_pairwise_distance(const PlacementProblem& prob,
                                    const Placement& placement) {
    double best = 1e300;
    for (size_t i = 0; i < placement.blocks.size(); ++i) {
        for (size_t j = i + 1; j < placement.blocks.size(); ++j) {
            const double cxi = placement.blocks[i].x + 0.5 * prob.blocks[i].width;
            const double cyi = placement.blocks[i].y + 0.5 * prob.blocks[i].height;
            const double cxj = placement.blocks[j].x + 0.5 * prob.blocks[j].width;
            const double cyj = placement.blocks[j].y + 0.5 * prob.blocks[j].height;
            best = std::min(best, std::hypot(cxi - cxj, cyi - cyj));
        }
    }
    return best;
}

} // namespace thermstack
