#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>

#include "thermstack/formats.hpp"

using namespace thermstack;

TEST_CASE("parse_floorplan reads a block line") {
    const Floorplan fp = parse_floorplan("cpu0 0.004 0.004 0.012 0.0\n");
    REQUIRE(fp.blocks.size() == 1);
    const Block& b = fp.blocks.front();
    CHECK(b.name == "cpu0");
    CHECK(b.width == 0.004);
    CHECK(b.height == 0.004);
    CHECK(b.x == 0.012);
    CHECK(b.y == 0.0);
    CHECK(b.power == 0.0);
}

TEST_CASE("parse_floorplan ignores comments and blank lines") {
    const Floorplan fp = parse_floorplan("# comment\n\n  \n");
    CHECK(fp.blocks.empty());
}

TEST_CASE("parse_floorplan reports arity errors with line numbers") {
    try {
        parse_floorplan("cpu0 0.004 0.004");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 1);
        CHECK(std::string(e.what()).find("5 fields") != std::string::npos);
    }
    try {
        parse_floorplan("# ok\ncpu0 0.004 0.004 0 0\nbad 1 2 3\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("parse_floorplan rejects duplicates and nonpositive dimensions") {
    CHECK_THROWS_AS(parse_floorplan("a 0.004 0.004 0 0\na 0.004 0.004 0.008 0\n"),
                    ParseError);
    CHECK_THROWS_AS(parse_floorplan("a 0 0.004 0 0\n"), ParseError);
    CHECK_THROWS_AS(parse_floorplan("a 0.004 -1 0 0\n"), ParseError);
    CHECK_THROWS_AS(parse_floorplan("a x 0.004 0 0\n"), ParseError);
}

TEST_CASE("parse_power basics") {
    const PowerMap pm = parse_power("cpu0 50.9\n");
    REQUIRE(pm.entries.size() == 1);
    CHECK(pm.entries.at("cpu0") == 50.9);

    CHECK(parse_power("").entries.empty());
    CHECK_THROWS_AS(parse_power("cpu0 -1\n"), ParseError);
    CHECK_THROWS_AS(parse_power("cpu0 1 2\n"), ParseError);
    CHECK_THROWS_AS(parse_power("cpu0 watts\n"), ParseError);
    CHECK_THROWS_AS(parse_power("cpu0 1\ncpu0 2\n"), ParseError);
}

TEST_CASE("floorplan and power files round-trip exactly") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> dim(1e-6, 2e-2);
    std::uniform_real_distribution<double> watts(0.0, 200.0);
    for (int trial = 0; trial < 25; ++trial) {
        Floorplan fp;
        fp.die_width = fp.die_height = 1.0;
        PowerMap pm;
        for (int b = 0; b < 6; ++b) {
            Block blk;
            blk.name = "blk" + std::to_string(b);
            blk.width = dim(rng);
            blk.height = dim(rng);
            blk.x = dim(rng);
            blk.y = dim(rng);
            fp.blocks.push_back(blk);
            pm.entries[blk.name] = watts(rng);
        }
        const Floorplan fp2 = parse_floorplan(write_floorplan(fp));
        REQUIRE(fp2.blocks.size() == fp.blocks.size());
        for (size_t i = 0; i < fp.blocks.size(); ++i) {
            CHECK(fp2.blocks[i].name == fp.blocks[i].name);
            CHECK(fp2.blocks[i].width == fp.blocks[i].width);
            CHECK(fp2.blocks[i].height == fp.blocks[i].height);
            CHECK(fp2.blocks[i].x == fp.blocks[i].x);
            CHECK(fp2.blocks[i].y == fp.blocks[i].y);
        }
        const PowerMap pm2 = parse_power(write_power(pm));
        CHECK(pm2.entries == pm.entries);
    }
}

namespace {

/// Writes a minimal three-layer config with floorplan/power files next to it.
std::filesystem::path write_sample_config(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "l0.flp") << "cpu0 0.004 0.004 0.0 0.0\n"
                                     "cpu1 0.004 0.004 0.012 0.0\n";
    std::ofstream(dir / "l0.ptrace") << "cpu0 50.9\ncpu1 50.9\n";
    std::ofstream(dir / "l2.flp") << "cpu2 0.004 0.004 0.0 0.0\n"
                                     "cpu3 0.004 0.004 0.012 0.0\n";
    std::ofstream(dir / "l2.ptrace") << "cpu2 50.9\ncpu3 50.9\n";
    const auto cfg = dir / "stack.cfg";
    std::ofstream(cfg) << "[die]\n"
                          "width = 0.016\n"
                          "height = 0.016\n"
                          "nx = 32\n"
                          "ny = 32\n"
                          "[package]\n"
                          "ambient_K = 318.15\n"
                          "convection_resistance_K_per_W = 0.1\n"
                          "attach_side = top\n"
                          "[layer]\n"
                          "name = die0\n"
                          "material_k = 100\n"
                          "material_cv = 1.75e6\n"
                          "thickness_m = 1.5e-4\n"
                          "nz = 4\n"
                          "floorplan = l0.flp\n"
                          "power = l0.ptrace\n"
                          "[layer]\n"
                          "name = bond\n"
                          "material_k = 4\n"
                          "material_cv = 2e6\n"
                          "thickness_m = 2e-5\n"
                          "[layer]\n"
                          "name = die2\n"
                          "material_k = 100\n"
                          "material_cv = 1.75e6\n"
                          "thickness_m = 1.5e-4\n"
                          "nz = 4\n"
                          "floorplan = l2.flp\n"
                          "power = l2.ptrace\n";
    return cfg;
}

} // namespace

TEST_CASE("stack config parses a three-layer stack with file references") {
    const auto dir = std::filesystem::temp_directory_path() / "thermstack_fmt_test";
    const auto cfg_path = write_sample_config(dir);
    const StackConfig cfg = load_stack_config(cfg_path.string());

    REQUIRE(cfg.stack.layers.size() == 3);
    CHECK(cfg.grid.nx == 32);
    CHECK(cfg.grid.ny == 32);
    CHECK(cfg.stack.layers[0].name == "die0");
    CHECK(cfg.stack.layers[1].nz == 1); // low-conductivity film defaults to 1
    CHECK(cfg.stack.layers[2].floorplan.blocks.size() == 2);
    CHECK(cfg.stack.layers[0].floorplan.die_width == 0.016);
    CHECK(cfg.stack.layers[0].floorplan.blocks[0].power == 50.9);
    CHECK(cfg.stack.package.attach_side == AttachSide::Top);
}

TEST_CASE("stack config minimal single layer") {
    const StackConfig cfg = parse_stack_config("[die]\nwidth=0.016\nheight=0.016\n"
                                               "[layer]\nmaterial_k=100\n");
    REQUIRE(cfg.stack.layers.size() == 1);
    CHECK(cfg.stack.layers[0].nz == 4);
    CHECK(cfg.stack.layers[0].floorplan.die_width == 0.016);
}

TEST_CASE("stack config errors") {
    CHECK_THROWS_AS(parse_stack_config("[layer]\nmaterial_k=100\n"), ParseError);
    CHECK_THROWS_AS(parse_stack_config("[die]\nwidth=0.016\nheight=0.016\n"
                                       "[layer]\nbogus_key=1\n"),
                    ParseError);
    CHECK_THROWS_AS(parse_stack_config("[die]\nwidth=0.016\nheight=0.016\n"),
                    ParseError);
    CHECK_THROWS_AS(parse_stack_config("[die]\nwidth=0.016\nheight=0.016\n"
                                       "[mystery]\nx=1\n"),
                    ParseError);
    // Block outside the configured die is a validation error at load time.
    const auto dir = std::filesystem::temp_directory_path() / "thermstack_fmt_bad";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "bad.flp") << "cpu0 0.004 0.004 0.02 0.0\n";
    std::ofstream(dir / "bad.cfg") << "[die]\nwidth=0.016\nheight=0.016\n"
                                      "[layer]\nfloorplan=bad.flp\n";
    CHECK_THROWS_AS(load_stack_config((dir / "bad.cfg").string()), ParseError);
    CHECK_THROWS_AS(load_stack_config((dir / "missing.cfg").string()), ParseError);
}

TEST_CASE("power entries must match floorplan blocks") {
    Floorplan fp;
    fp.die_width = fp.die_height = 0.016;
    fp.blocks.push_back(Block{"cpu0", 0, 0, 0.004, 0.004, 0.0});
    PowerMap pm;
    pm.entries["cpu9"] = 1.0;
    CHECK_THROWS_AS(apply_power(fp, pm), ParseError);
}
