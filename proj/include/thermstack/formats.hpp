#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "thermstack/floorplan.hpp"
#include "thermstack/types.hpp"

namespace thermstack {

class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what
                                      : what),
          line_(line) {}
    int line() const { return line_; }

  private:
    int line_;
};

struct PowerMap {
    std::map<std::string, double> entries; ///< block name -> W
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream iss(s);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

inline std::string strip_comment(const std::string& line) {
    const auto pos = line.find('#');
    return pos == std::string::npos ? line : line.substr(0, pos);
}

inline double parse_number(const std::string& tok, int line) {
    double v = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
        throw ParseError("malformed number '" + tok + "'", line);
    return v;
}

/// Shortest decimal representation that round-trips the exact double.
inline std::string format_number(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace detail

/// Floorplan file: one block per line,
///   <name> <width_m> <height_m> <left_x_m> <bottom_y_m>
/// '#' starts a comment; blank lines are ignored. Die dimensions are not
/// part of the file; they come from the stack config.
inline Floorplan parse_floorplan(const std::string& text) {
    Floorplan fp;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    std::set<std::string> names;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto fields = detail::split_ws(detail::strip_comment(raw));
        if (fields.empty()) continue;
        if (fields.size() != 5)
            throw ParseError("expected 5 fields (name w h x y), got " +
                                 std::to_string(fields.size()),
                             lineno);
        Block b;
        b.name = fields[0];
        b.width = detail::parse_number(fields[1], lineno);
        b.height = detail::parse_number(fields[2], lineno);
        b.x = detail::parse_number(fields[3], lineno);
        b.y = detail::parse_number(fields[4], lineno);
        b.power = 0.0;
        if (b.width <= 0.0 || b.height <= 0.0)
            throw ParseError("block '" + b.name + "' has nonpositive dimensions",
                             lineno);
        if (!names.insert(b.name).second)
            throw ParseError("duplicate block name '" + b.name + "'", lineno);
        fp.blocks.push_back(b);
    }
    return fp;
}

inline std::string write_floorplan(const Floorplan& fp) {
    std::string out;
    for (const Block& b : fp.blocks) {
        out += b.name + " " + detail::format_number(b.width) + " " +
               detail::format_number(b.height) + " " + detail::format_number(b.x) +
               " " + detail::format_number(b.y) + "\n";
    }
    return out;
}

/// Power file: lines of "<name> <watts>".
inline PowerMap parse_power(const std::string& text) {
    PowerMap pm;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto fields = detail::split_ws(detail::strip_comment(raw));
        if (fields.empty()) continue;
        if (fields.size() != 2)
            throw ParseError("expected 2 fields (name watts), got " +
                                 std::to_string(fields.size()),
                             lineno);
        const double w = detail::parse_number(fields[1], lineno);
        if (w < 0.0)
            throw ParseError("negative power for block '" + fields[0] + "'", lineno);
        if (pm.entries.count(fields[0]))
            throw ParseError("duplicate power entry for '" + fields[0] + "'", lineno);
        pm.entries[fields[0]] = w;
    }
    return pm;
}

inline std::string write_power(const PowerMap& pm) {
    std::string out;
    for (const auto& [name, w] : pm.entries)
        out += name + " " + detail::format_number(w) + "\n";
    return out;
}

/// Applies a power map to a floorplan's blocks. Every entry must name an
/// existing block; unnamed blocks keep power 0.
inline void apply_power(Floorplan& fp, const PowerMap& pm) {
    std::map<std::string, double> remaining = pm.entries;
    for (Block& b : fp.blocks) {
        auto it = remaining.find(b.name);
        if (it != remaining.end()) {
            b.power = it->second;
            remaining.erase(it);
        }
    }
    if (!remaining.empty())
        throw ParseError("power entry '" + remaining.begin()->first +
                         "' does not match any floorplan block");
}

struct StackConfig {
    Stack stack;
    GridSpec grid;
};

namespace detail {

struct IniSection {
    std::string name;
    int line = 0;
    std::vector<std::pair<std::string, std::string>> keys;
    std::vector<int> key_lines;
};

inline std::vector<IniSection> parse_ini(const std::string& text) {
    std::vector<IniSection> sections;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = strip_comment(raw);
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError("malformed section header '" + line + "'", lineno);
            sections.push_back({line.substr(1, line.size() - 2), lineno, {}, {}});
        } else {
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ParseError("expected key=value, got '" + line + "'", lineno);
            if (sections.empty())
                throw ParseError("key outside of any section", lineno);
            auto trim = [](std::string s) {
                const auto sb = s.find_first_not_of(" \t");
                const auto se = s.find_last_not_of(" \t");
                return sb == std::string::npos ? std::string()
                                               : s.substr(sb, se - sb + 1);
            };
            sections.back().keys.emplace_back(trim(line.substr(0, eq)),
                                              trim(line.substr(eq + 1)));
            sections.back().key_lines.push_back(lineno);
        }
    }
    return sections;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string resolve_relative(const std::string& base_file,
                                    const std::string& ref) {
    if (!ref.empty() && ref.front() == '/') return ref;
    const auto slash = base_file.find_last_of('/');
    if (slash == std::string::npos) return ref;
    return base_file.substr(0, slash + 1) + ref;
}

} // namespace detail

/// Stack config: INI-style text with a [die] section, an optional [package]
/// section and one [layer] section per layer, listed bottom to top.
/// Referenced floorplan/power files are resolved relative to `config_path`
/// (pass an empty path to forbid file references).
inline StackConfig parse_stack_config(const std::string& text,
                                      const std::string& config_path = "") {
    StackConfig cfg;
    bool have_die = false;
    double die_w = 0.0, die_h = 0.0;

    const auto sections = detail::parse_ini(text);
    for (const auto& sec : sections) {
        if (sec.name == "die") {
            have_die = true;
            for (size_t i = 0; i < sec.keys.size(); ++i) {
                const auto& [k, v] = sec.keys[i];
                const int ln = sec.key_lines[i];
                if (k == "width") die_w = detail::parse_number(v, ln);
                else if (k == "height") die_h = detail::parse_number(v, ln);
                else if (k == "nx") cfg.grid.nx = static_cast<int>(detail::parse_number(v, ln));
                else if (k == "ny") cfg.grid.ny = static_cast<int>(detail::parse_number(v, ln));
                else throw ParseError("unknown key '" + k + "' in [die]", ln);
            }
        } else if (sec.name == "package") {
            PackageModel& p = cfg.stack.package;
            for (size_t i = 0; i < sec.keys.size(); ++i) {
                const auto& [k, v] = sec.keys[i];
                const int ln = sec.key_lines[i];
                if (k == "ambient_K") p.ambient = detail::parse_number(v, ln);
                else if (k == "convection_resistance_K_per_W") p.convection_resistance = detail::parse_number(v, ln);
                else if (k == "spreader_thickness_m") p.spreader_thickness = detail::parse_number(v, ln);
                else if (k == "spreader_k") p.spreader_conductivity = detail::parse_number(v, ln);
                else if (k == "sink_thickness_m") p.sink_base_thickness = detail::parse_number(v, ln);
                else if (k == "sink_k") p.sink_conductivity = detail::parse_number(v, ln);
                else if (k == "spreader_width_m") p.spreader_width = detail::parse_number(v, ln);
                else if (k == "sink_width_m") p.sink_width = detail::parse_number(v, ln);
                else if (k == "interface_thickness_m") p.interface_thickness = detail::parse_number(v, ln);
                else if (k == "interface_k") p.interface_conductivity = detail::parse_number(v, ln);
                else if (k == "attach_side") {
                    if (v == "top") p.attach_side = AttachSide::Top;
                    else if (v == "bottom") p.attach_side = AttachSide::Bottom;
                    else throw ParseError("attach_side must be 'top' or 'bottom'", ln);
                } else {
                    throw ParseError("unknown key '" + k + "' in [package]", ln);
                }
            }
        } else if (sec.name == "layer") {
            Layer layer;
            layer.material = silicon();
            layer.thickness = kDefaultSiliconThickness;
            layer.nz = 0; // 0 = pick default from conductivity below
            std::optional<std::string> fp_path, pw_path;
            for (size_t i = 0; i < sec.keys.size(); ++i) {
                const auto& [k, v] = sec.keys[i];
                const int ln = sec.key_lines[i];
                if (k == "name") layer.name = v;
                else if (k == "material_k") layer.material.thermal_conductivity = detail::parse_number(v, ln);
                else if (k == "material_cv") layer.material.volumetric_heat_capacity = detail::parse_number(v, ln);
                else if (k == "thickness_m") layer.thickness = detail::parse_number(v, ln);
                else if (k == "nz") layer.nz = static_cast<int>(detail::parse_number(v, ln));
                else if (k == "floorplan") fp_path = v;
                else if (k == "power") pw_path = v;
                else throw ParseError("unknown key '" + k + "' in [layer]", ln);
            }
            if (layer.name.empty())
                layer.name = "layer" + std::to_string(cfg.stack.layers.size());
            layer.material.name = layer.name + "_material";
            if (layer.nz <= 0) {
                // Low-conductivity bonding films are thin and near-1D.
                layer.nz = layer.material.thermal_conductivity < 10.0 ? kDefaultTimNz
                                                                      : kDefaultSiliconNz;
            }
            if (fp_path) {
                if (config_path.empty())
                    throw ParseError("floorplan file reference requires a config path");
                const auto path = detail::resolve_relative(config_path, *fp_path);
                layer.floorplan = parse_floorplan(detail::read_file(path));
            }
            if (pw_path) {
                if (config_path.empty())
                    throw ParseError("power file reference requires a config path");
                const auto path = detail::resolve_relative(config_path, *pw_path);
                apply_power(layer.floorplan, parse_power(detail::read_file(path)));
            }
            cfg.stack.layers.push_back(std::move(layer));
        } else {
            throw ParseError("unknown section [" + sec.name + "]", sec.line);
        }
    }

    if (!have_die) throw ParseError("missing [die] section");
    if (die_w <= 0.0 || die_h <= 0.0)
        throw ParseError("[die] width and height must be positive");
    if (cfg.stack.layers.empty()) throw ParseError("config defines no [layer]");
    if (cfg.grid.nx < 2 || cfg.grid.ny < 2)
        throw ParseError("[die] nx and ny must be at least 2");

    for (Layer& layer : cfg.stack.layers) {
        layer.floorplan.die_width = die_w;
        layer.floorplan.die_height = die_h;
        const auto check = validate_floorplan(layer.floorplan);
        if (!check.ok())
            throw ParseError("layer '" + layer.name + "': " +
                             check.violations.front().message);
    }
    return cfg;
}

inline StackConfig load_stack_config(const std::string& path) {
    return parse_stack_config(detail::read_file(path), path);
}

} // namespace thermstack
