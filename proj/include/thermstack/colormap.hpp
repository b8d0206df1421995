#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace thermstack {

struct RGB {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    bool operator==(const RGB&) const = default;
};

namespace detail {
struct ColorStop {
    double t;
    int r, g, b;
};
/// Cold-to-hot ramp: dark blue, light blue, green, yellow, orange, red.
inline constexpr ColorStop kColorStops[] = {
    {0.0, 0, 0, 139}, {0.2, 0, 128, 255},  {0.4, 0, 200, 0},
    {0.6, 255, 255, 0}, {0.8, 255, 140, 0}, {1.0, 255, 0, 0},
};
} // namespace detail

/// Piecewise-linear lookup through the fixed ramp stops. Input outside
/// [0, 1] is clamped; NaN is an error.
inline RGB colormap_lookup(double t_norm) {
    if (std::isnan(t_norm)) throw std::invalid_argument("colormap input is NaN");
    if (t_norm <= 0.0) t_norm = 0.0;
    if (t_norm >= 1.0) t_norm = 1.0;
    const auto& stops = detail::kColorStops;
    constexpr int n = static_cast<int>(std::size(detail::kColorStops));
    int hi = 1;
    while (hi < n - 1 && t_norm > stops[hi].t) ++hi;
    const auto& a = stops[hi - 1];
    const auto& b = stops[hi];
    const double s = (t_norm - a.t) / (b.t - a.t);
    return {static_cast<std::uint8_t>(a.r + (b.r - a.r) * s),
            static_cast<std::uint8_t>(a.g + (b.g - a.g) * s),
            static_cast<std::uint8_t>(a.b + (b.b - a.b) * s)};
}

/// Index of the last ramp stop at or below t_norm; nondecreasing in t_norm.
inline int colormap_stop_index(double t_norm) {
    if (std::isnan(t_norm)) throw std::invalid_argument("colormap input is NaN");
    if (t_norm <= 0.0) return 0;
    if (t_norm >= 1.0) return static_cast<int>(std::size(detail::kColorStops)) - 1;
    int i = 0;
    while (detail::kColorStops[i + 1].t <= t_norm) ++i;
    return i;
}

/// Renders a lateral temperature field as a binary PPM (P6). The field is
/// stored row-major with iy = 0 at the die's bottom edge; image row 0 is the
/// top of the die. Normalization is (T - t_min) / (t_max - t_min), clamped.
inline std::string render_ppm(const std::vector<double>& field, int nx, int ny,
                              double t_min, double t_max) {
    if (nx <= 0 || ny <= 0 || field.empty())
        throw std::invalid_argument("render_ppm: empty field");
    if (static_cast<size_t>(nx) * static_cast<size_t>(ny) != field.size())
        throw std::invalid_argument("render_ppm: field size does not match nx*ny");
    if (!(t_max > t_min))
        throw std::invalid_argument("render_ppm: t_max must exceed t_min");

    std::string out = "P6\n" + std::to_string(nx) + " " + std::to_string(ny) +
                      "\n255\n";
    out.reserve(out.size() + 3u * field.size());
    const double scale = 1.0 / (t_max - t_min);
    for (int iy = ny - 1; iy >= 0; --iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const RGB c = colormap_lookup((field[static_cast<size_t>(iy) * nx + ix] -
                                           t_min) * scale);
            out.push_back(static_cast<char>(c.r));
            out.push_back(static_cast<char>(c.g));
            out.push_back(static_cast<char>(c.b));
        }
    }
    return out;
}

} // namespace thermstack
