#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "test_helpers.hpp"
#include "thermstack/analysis.hpp"
#include "thermstack/pipeline.hpp"
#include "thermstack/report_io.hpp"

using namespace thermstack;
using thermstack::testing::build_system;

namespace {

Stack two_layer_stack() {
    Floorplan l0{0.016, 0.016, {Block{"cpu0", 0.0, 0.0, 0.004, 0.004, 50.9}}};
    Floorplan l2{0.016, 0.016, {Block{"cpu1", 0.012, 0.012, 0.004, 0.004, 50.9}}};
    Stack stack;
    stack.layers.push_back(silicon_layer("die0", l0));
    stack.layers.push_back(tim_layer("bond", 0.016, 0.016));
    stack.layers.push_back(silicon_layer("die2", l2));
    stack.package.spreader_width = 0.024;
    stack.package.sink_width = 0.032;
    return stack;
}

} // namespace

TEST_CASE("uniform field gives min=max=avg per block") {
    const auto [mesh, sys] = build_system(two_layer_stack(), {8, 8});
    TemperatureField field;
    field.values.assign(mesh.total_cells, 321.5);
    const auto stats = block_stats(field, mesh);
    REQUIRE_FALSE(stats.empty());
    for (const auto& bs : stats) {
        CHECK(bs.min_K == 321.5);
        CHECK(bs.max_K == 321.5);
        CHECK(bs.avg_K == Catch::Approx(321.5).epsilon(1e-12));
    }
}

TEST_CASE("background rows appear only when requested") {
    const auto [mesh, sys] = build_system(two_layer_stack(), {8, 8});
    TemperatureField field;
    field.values.assign(mesh.total_cells, 320.0);
    const auto without = block_stats(field, mesh, false);
    const auto with = block_stats(field, mesh, true);
    CHECK(with.size() > without.size());
    for (const auto& bs : without) CHECK_FALSE(is_background_name(bs.name));
    bool saw_bg = false;
    for (const auto& bs : with) saw_bg |= is_background_name(bs.name);
    CHECK(saw_bg);
}

TEST_CASE("global extremes of a zero-power field are ambient") {
    Stack stack = two_layer_stack();
    const auto result = run_stack(stack, {8, 8}, {.power_scale = 0.0});
    CHECK(result.report.peak.value_K == Catch::Approx(318.15).margin(1e-9));
    CHECK(result.report.lowest.value_K == Catch::Approx(318.15).margin(1e-9));
}

TEST_CASE("extreme ties resolve to the lowest flat index") {
    const auto [mesh, sys] = build_system(two_layer_stack(), {4, 4});
    TemperatureField field;
    field.values.assign(mesh.total_cells, 300.0);
    const auto [peak, lowest] = global_extremes(field, mesh);
    const Slab& first = mesh.slab(0);
    CHECK(peak.layer == 0);
    CHECK(peak.x == Catch::Approx(first.center_x(0)));
    CHECK(peak.y == Catch::Approx(first.center_y(0)));
    CHECK(lowest.x == peak.x);
    CHECK(lowest.y == peak.y);
}

TEST_CASE("peak of a single hot corner block lies inside its footprint") {
    Floorplan fp{0.016, 0.016, {Block{"cpu0", 0.012, 0.0, 0.004, 0.004, 50.9}}};
    Stack stack;
    stack.layers.push_back(silicon_layer("die0", fp));
    stack.package.spreader_width = 0.024;
    stack.package.sink_width = 0.032;
    const auto [mesh, sys] = build_system(stack, {8, 8});
    const TemperatureField field = solve_dense(sys);
    const auto [peak, lowest] = global_extremes(field, mesh);
    CHECK(peak.x >= 0.012);
    CHECK(peak.x <= 0.016);
    CHECK(peak.y >= 0.0);
    CHECK(peak.y <= 0.004);
    CHECK(lowest.value_K >= 318.15 - 1e-9);
}

TEST_CASE("layer gap arithmetic and missing-processor errors") {
    ThermalReport rep;
    LayerStats l0;
    l0.name = "die0";
    l0.proc_peak_K = 392.72;
    LayerStats l1;
    l1.name = "bond"; // no processors: proc_peak stays NaN
    LayerStats l2;
    l2.name = "die2";
    l2.proc_peak_K = 372.56;
    rep.layers = {l0, l1, l2};
    CHECK(layer_gap(rep, 0, 2) == Catch::Approx(20.16).margin(1e-12));
    CHECK(layer_gap(rep, 0, 2) > 0.0);
    CHECK_THROWS_AS(layer_gap(rep, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(layer_gap(rep, 0, 5), std::out_of_range);

    ThermalReport rep2 = rep;
    rep2.layers[0].proc_peak_K = 377.22;
    rep2.layers[2].proc_peak_K = 356.98;
    CHECK(layer_gap(rep2, 0, 2) == Catch::Approx(20.24).margin(1e-12));
}

TEST_CASE("slice returns the lateral slab and validates indices") {
    const auto [mesh, sys] = build_system(two_layer_stack(), {6, 6});
    TemperatureField field;
    field.values.resize(mesh.total_cells);
    for (size_t i = 0; i < field.values.size(); ++i)
        field.values[i] = 300.0 + static_cast<double>(i);

    // The bond layer has nz=1, so its slice equals the layer's full data.
    const auto s = slice(field, mesh, 1, 0);
    const auto [first_slab, nslabs] = mesh.layer_slab_range(1);
    REQUIRE(nslabs == 1);
    const Slab& slab = mesh.slab(first_slab);
    REQUIRE(s.size() == slab.cell_count());
    for (size_t c = 0; c < s.size(); ++c)
        CHECK(s[c] == field.values[slab.cell_offset + c]);

    CHECK_THROWS_AS(slice(field, mesh, 1, 1), std::out_of_range);
    CHECK_THROWS_AS(slice(field, mesh, 7, 0), std::out_of_range);
}

TEST_CASE("report invariants hold on a solved stack") {
    const auto result = run_stack(two_layer_stack(), {8, 8});
    const ThermalReport& rep = result.report;

    double max_layer = -1e300;
    for (const auto& ls : rep.layers) max_layer = std::max(max_layer, ls.max_K);
    CHECK(rep.peak.value_K == Catch::Approx(max_layer).epsilon(1e-12));

    for (const auto& bs : rep.blocks) {
        CHECK(bs.avg_K >= bs.min_K - 1e-12);
        CHECK(bs.avg_K <= bs.max_K + 1e-12);
    }
    CHECK(rep.lowest.value_K >= rep.ambient_K - 1e-9);
    CHECK(rep.total_power_W == Catch::Approx(101.8));

    // Peak belongs to a powered block's cells.
    bool peak_in_powered = false;
    for (const auto& bs : rep.blocks) {
        if (bs.layer != rep.peak.layer) continue;
        for (const Block& b : result.mesh.stack.layers[bs.layer].floorplan.blocks) {
            if (b.name != bs.name || b.power <= 0.0) continue;
            if (rep.peak.x >= b.x && rep.peak.x <= b.x_max() && rep.peak.y >= b.y &&
                rep.peak.y <= b.y_max())
                peak_in_powered = true;
        }
    }
    CHECK(peak_in_powered);
}

TEST_CASE("report serialization is deterministic and ordered") {
    const auto result = run_stack(two_layer_stack(), {6, 6});
    const std::string j1 = write_report_json(result.report);
    const std::string j2 = write_report_json(result.report);
    CHECK(j1 == j2);
    CHECK(j1.find("\"schema\": \"thermstack-report-v1\"") != std::string::npos);
    // Key order is fixed: schema comes before grid, grid before global.
    CHECK(j1.find("\"schema\"") < j1.find("\"grid\""));
    CHECK(j1.find("\"grid\"") < j1.find("\"global\""));

    const std::string c1 = write_report_csv(result.report);
    const std::string c2 = write_report_csv(result.report);
    CHECK(c1 == c2);
    CHECK(c1.rfind("scope,name,min_K,max_K,avg_K\n", 0) == 0);
    CHECK(c1.find("block,cpu0") != std::string::npos);
    CHECK(c1.find("layer,die0") != std::string::npos);
    CHECK(c1.find("global,peak") != std::string::npos);
}

TEST_CASE("header-only CSV for an empty report") {
    ThermalReport rep;
    rep.peak.value_K = 0.0;
    rep.lowest.value_K = 0.0;
    const std::string csv = write_report_csv(rep);
    CHECK(csv.find("scope,name,min_K,max_K,avg_K\n") == 0);
    CHECK(csv.find("block,") == std::string::npos);
}

TEST_CASE("saved report field round-trips for rendering") {
    const auto result = run_stack(two_layer_stack(), {6, 6});
    const std::string json = write_report_json(result.report);
    const SavedField saved = parse_report_field(json);
    REQUIRE(saved.layer_maps.size() == result.report.layer_maps.size());
    CHECK(saved.grid.nx == 6);
    for (size_t li = 0; li < saved.layer_maps.size(); ++li) {
        REQUIRE(saved.layer_maps[li].size() == result.report.layer_maps[li].size());
        for (size_t c = 0; c < saved.layer_maps[li].size(); ++c)
            CHECK(saved.layer_maps[li][c] == result.report.layer_maps[li][c]);
    }
}
