#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "thermstack/colormap.hpp"

using namespace thermstack;

TEST_CASE("colormap endpoints and declared stops") {
    CHECK(colormap_lookup(0.0) == RGB{0, 0, 139});
    CHECK(colormap_lookup(0.2) == RGB{0, 128, 255});
    CHECK(colormap_lookup(0.4) == RGB{0, 200, 0});
    CHECK(colormap_lookup(0.6) == RGB{255, 255, 0});
    CHECK(colormap_lookup(0.8) == RGB{255, 140, 0});
    CHECK(colormap_lookup(1.0) == RGB{255, 0, 0});
}

TEST_CASE("colormap midpoint between green and yellow") {
    CHECK(colormap_lookup(0.5) == RGB{127, 227, 0});
}

TEST_CASE("colormap clamps out-of-range input and rejects NaN") {
    CHECK(colormap_lookup(-3.0) == colormap_lookup(0.0));
    CHECK(colormap_lookup(7.5) == colormap_lookup(1.0));
    CHECK_THROWS_AS(colormap_lookup(std::numeric_limits<double>::quiet_NaN()),
                    std::invalid_argument);
}

TEST_CASE("stop index is nondecreasing in t_norm") {
    int prev = 0;
    for (int i = 0; i <= 1000; ++i) {
        const int idx = colormap_stop_index(i / 1000.0);
        CHECK(idx >= prev);
        prev = idx;
    }
}

TEST_CASE("uniform field renders as all dark blue") {
    const std::vector<double> field(12, 300.0);
    const std::string ppm = render_ppm(field, 4, 3, 300.0, 310.0);
    const std::string header = "P6\n4 3\n255\n";
    REQUIRE(ppm.substr(0, header.size()) == header);
    REQUIRE(ppm.size() == header.size() + 3u * 12u);
    for (size_t i = header.size(); i < ppm.size(); i += 3) {
        CHECK(static_cast<unsigned char>(ppm[i]) == 0);
        CHECK(static_cast<unsigned char>(ppm[i + 1]) == 0);
        CHECK(static_cast<unsigned char>(ppm[i + 2]) == 139);
    }
}

TEST_CASE("two-pixel field maps min to dark blue and max to red") {
    const std::string ppm = render_ppm({300.0, 400.0}, 2, 1, 300.0, 400.0);
    const size_t h = std::string("P6\n2 1\n255\n").size();
    CHECK(static_cast<unsigned char>(ppm[h + 2]) == 139); // first pixel blue
    CHECK(static_cast<unsigned char>(ppm[h + 3]) == 255); // second pixel red
    CHECK(static_cast<unsigned char>(ppm[h + 5]) == 0);
}

TEST_CASE("row zero of the image is the top of the die") {
    // iy=0 (bottom of die) is cold, iy=1 (top) is hot: image starts hot.
    const std::string ppm = render_ppm({300.0, 400.0}, 1, 2, 300.0, 400.0);
    const size_t h = std::string("P6\n1 2\n255\n").size();
    CHECK(static_cast<unsigned char>(ppm[h + 0]) == 255); // red first
    CHECK(static_cast<unsigned char>(ppm[h + 5]) == 139); // blue last
}

TEST_CASE("render rejects bad ranges and empty fields") {
    CHECK_THROWS_AS(render_ppm({}, 0, 0, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(render_ppm({1.0, 2.0}, 2, 1, 5.0, 5.0), std::invalid_argument);
    CHECK_THROWS_AS(render_ppm({1.0, 2.0}, 3, 1, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("identical inputs give identical bytes") {
    std::vector<double> field;
    for (int i = 0; i < 64; ++i) field.push_back(300.0 + (i % 9));
    const auto a = render_ppm(field, 8, 8, 300.0, 308.0);
    const auto b = render_ppm(field, 8, 8, 300.0, 308.0);
    CHECK(a == b);
}
