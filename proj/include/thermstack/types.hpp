#pragma once

#include <string>
#include <vector>

namespace thermstack {

/// All quantities are SI: meters, watts, kelvin, W/(m·K), J/(m³·K).

struct Material {
    std::string name;
    double thermal_conductivity = 0.0;    ///< W/(m·K), > 0
    double volumetric_heat_capacity = 0.0; ///< J/(m³·K), > 0 (reserved for transient use)
};

/// Axis-aligned rectangular block on a die. (x, y) is the lower-left corner.
struct Block {
    std::string name;
    double x = 0.0;
    double y = 0.0;
    double width = 0.0;
    double height = 0.0;
    double power = 0.0; ///< W, >= 0

    double area() const { return width * height; }
    double x_max() const { return x + width; }
    double y_max() const { return y + height; }
};

struct Floorplan {
    double die_width = 0.0;
    double die_height = 0.0;
    std::vector<Block> blocks;
};

struct Layer {
    std::string name;
    Material material;
    double thickness = 0.0;
    Floorplan floorplan;
    int nz = 1; ///< vertical cell count for this layer
};

enum class AttachSide { Top, Bottom };

/// Heat-removal path attached to one face of the stack: an interface film,
/// a spreader plate and a sink base plate (both wider than the die, meshed
/// laterally), and a single convection resistance to ambient shared by the
/// sink face in proportion to cell area.
struct PackageModel {
    double ambient = 318.15;              ///< K
    double convection_resistance = 0.1;   ///< K/W, total sink-to-ambient
    double spreader_thickness = 1.0e-3;   ///< m
    double spreader_conductivity = 400.0; ///< W/(m·K)
    double sink_base_thickness = 6.9e-3;  ///< m
    double sink_conductivity = 400.0;     ///< W/(m·K)
    AttachSide attach_side = AttachSide::Top;

    /// Lateral extents of the package plates. Values below the die size are
    /// snapped up to it; overhang is snapped to whole package cells.
    double spreader_width = 3.0e-2; ///< m
    double sink_width = 5.2e-2;     ///< m

    /// Interface film between the attach-side die face and the spreader
    /// (zero thickness disables it).
    double interface_thickness = 1.0e-5;  ///< m
    double interface_conductivity = 4.0;  ///< W/(m·K)
};

struct Stack {
    std::vector<Layer> layers; ///< index 0 = bottom
    PackageModel package;
};

/// Uniform lateral discretization of the die.
struct GridSpec {
    int nx = 64;
    int ny = 64;
};

inline Material silicon() { return {"silicon", 100.0, 1.75e6}; }
inline Material epoxy_tim() { return {"tim", 4.0, 2.0e6}; }

constexpr double kDefaultSiliconThickness = 1.5e-4; ///< m
constexpr double kDefaultTimThickness = 2.0e-5;     ///< m
constexpr int kDefaultSiliconNz = 4;
constexpr int kDefaultTimNz = 1;

/// Overlap smaller than this (m²) does not count as a violation, so blocks
/// that only share an edge are legal.
constexpr double kOverlapTolerance = 1e-15;

inline Layer silicon_layer(std::string name, Floorplan fp,
                           double thickness = kDefaultSiliconThickness,
                           int nz = kDefaultSiliconNz) {
    return Layer{std::move(name), silicon(), thickness, std::move(fp), nz};
}

inline Layer tim_layer(std::string name, double die_width, double die_height,
                       double thickness = kDefaultTimThickness,
                       int nz = kDefaultTimNz) {
    return Layer{std::move(name), epoxy_tim(), thickness,
                 Floorplan{die_width, die_height, {}}, nz};
}

} // namespace thermstack
