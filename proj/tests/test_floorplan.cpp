#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "thermstack/floorplan.hpp"

using namespace thermstack;

namespace {

Floorplan paper_die() {
    Floorplan fp;
    fp.die_width = 0.016;
    fp.die_height = 0.016;
    return fp;
}

Block proc(const std::string& name, double x, double y) {
    return Block{name, x, y, 0.004, 0.004, 50.9};
}

} // namespace

TEST_CASE("single corner processor validates cleanly") {
    Floorplan fp = paper_die();
    fp.blocks.push_back(proc("cpu0", 0.012, 0.0));
    REQUIRE(validate_floorplan(fp).ok());
}

TEST_CASE("identical blocks at the same position report a full overlap") {
    Floorplan fp = paper_die();
    fp.blocks.push_back(proc("cpu0", 0.004, 0.004));
    fp.blocks.push_back(proc("cpu1", 0.004, 0.004));
    const auto result = validate_floorplan(fp);
    REQUIRE_FALSE(result.ok());
    REQUIRE(result.violations.size() == 1);
    const auto& v = result.violations.front();
    CHECK(v.kind == ViolationKind::Overlap);
    CHECK(v.block_a == "cpu0");
    CHECK(v.block_b == "cpu1");
    CHECK(v.overlap_area == Catch::Approx(0.004 * 0.004));
}

TEST_CASE("block extending past the die edge is out of die") {
    Floorplan fp = paper_die();
    fp.blocks.push_back(proc("cpu0", 0.015, 0.0));
    const auto result = validate_floorplan(fp);
    REQUIRE(result.violations.size() == 1);
    CHECK(result.violations.front().kind == ViolationKind::OutOfDie);
    CHECK(result.violations.front().block_a == "cpu0");
}

TEST_CASE("duplicate names and nonpositive dimensions are reported") {
    Floorplan fp = paper_die();
    fp.blocks.push_back(proc("a", 0.0, 0.0));
    fp.blocks.push_back(Block{"a", 0.008, 0.008, 0.0, 0.004, 0.0});
    const auto result = validate_floorplan(fp);
    bool saw_dup = false, saw_dim = false;
    for (const auto& v : result.violations) {
        saw_dup |= v.kind == ViolationKind::DuplicateName;
        saw_dim |= v.kind == ViolationKind::NonPositiveDimension;
    }
    CHECK(saw_dup);
    CHECK(saw_dim);
}

TEST_CASE("blocks sharing only an edge do not overlap") {
    Floorplan fp = paper_die();
    fp.blocks.push_back(proc("a", 0.0, 0.0));
    fp.blocks.push_back(proc("b", 0.004, 0.0));
    REQUIRE(validate_floorplan(fp).ok());
}

TEST_CASE("validation is independent of block order") {
    Floorplan fp = paper_die();
    fp.blocks.push_back(proc("a", 0.0, 0.0));
    fp.blocks.push_back(proc("b", 0.002, 0.0));   // overlaps a
    fp.blocks.push_back(proc("c", 0.02, 0.0));    // out of die
    fp.blocks.push_back(proc("b", 0.008, 0.008)); // duplicate name

    auto fingerprint = [](const ValidationResult& r) {
        std::vector<std::string> keys;
        for (const auto& v : r.violations)
            keys.push_back(std::to_string(static_cast<int>(v.kind)) + ":" +
                           v.block_a + ":" + v.block_b);
        std::sort(keys.begin(), keys.end());
        return keys;
    };

    const auto base = fingerprint(validate_floorplan(fp));
    std::mt19937 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        Floorplan shuffled = fp;
        std::shuffle(shuffled.blocks.begin(), shuffled.blocks.end(), rng);
        CHECK(fingerprint(validate_floorplan(shuffled)) == base);
    }
}

TEST_CASE("background fill covers an empty die with one block") {
    const Floorplan filled = fill_background(paper_die());
    REQUIRE(filled.blocks.size() == 1);
    CHECK(filled.blocks.front().name == "_bg0");
    CHECK(filled.blocks.front().area() == Catch::Approx(0.016 * 0.016));
    CHECK(filled.blocks.front().power == 0.0);
}

TEST_CASE("background fill around one corner processor") {
    Floorplan fp = paper_die();
    fp.blocks.push_back(proc("cpu0", 0.012, 0.0));
    const Floorplan filled = fill_background(fp);

    double bg_area = 0.0;
    for (const Block& b : filled.blocks)
        if (is_background_name(b.name)) bg_area += b.area();
    CHECK(bg_area == Catch::Approx(0.000256 - 0.000016).epsilon(1e-12));
    CHECK(total_block_area(filled) == Catch::Approx(0.000256).epsilon(1e-12));
    REQUIRE(validate_floorplan(filled).ok());
}

TEST_CASE("fully covered die is unchanged") {
    Floorplan fp = paper_die();
    fp.blocks.push_back(Block{"all", 0.0, 0.0, 0.016, 0.016, 1.0});
    const Floorplan filled = fill_background(fp);
    CHECK(filled.blocks.size() == 1);
    CHECK(filled.blocks.front().name == "all");
}

TEST_CASE("background fill conserves die area for random floorplans") {
    std::mt19937 rng(42);
    std::uniform_int_distribution<int> coord(0, 7);
    for (int trial = 0; trial < 50; ++trial) {
        Floorplan fp = paper_die();
        // Non-overlapping blocks snapped to a 2 mm lattice.
        std::vector<char> used(64, 0);
        std::uniform_int_distribution<int> nblocks(0, 10);
        const int want = nblocks(rng);
        for (int b = 0; b < want; ++b) {
            const int gx = coord(rng), gy = coord(rng);
            if (used[gy * 8 + gx]) continue;
            used[gy * 8 + gx] = 1;
            fp.blocks.push_back(Block{"b" + std::to_string(b), gx * 0.002,
                                      gy * 0.002, 0.002, 0.002, 1.0});
        }
        const Floorplan filled = fill_background(fp);
        REQUIRE(validate_floorplan(filled).ok());
        const double area = total_block_area(filled);
        CHECK(std::abs(area - 0.000256) <= 1e-12 * 0.000256);
    }
}

TEST_CASE("background fill handles unaligned interior blocks") {
    Floorplan fp = paper_die();
    fp.blocks.push_back(Block{"odd", 0.0031, 0.0057, 0.0043, 0.0029, 2.0});
    fp.blocks.push_back(Block{"odd2", 0.0101, 0.0007, 0.0021, 0.0093, 1.0});
    const Floorplan filled = fill_background(fp);
    REQUIRE(validate_floorplan(filled).ok());
    CHECK(std::abs(total_block_area(filled) - 0.000256) <= 1e-12 * 0.000256);
}
