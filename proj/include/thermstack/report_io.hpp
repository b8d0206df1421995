#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "thermstack/analysis.hpp"
#include "thermstack/formats.hpp"

namespace thermstack {

using ordered_json = nlohmann::ordered_json;

/// Deterministic JSON serialization with fixed key order. The embedded
/// per-layer field maps make rendering replayable without re-solving.
inline std::string write_report_json(const ThermalReport& rep) {
    ordered_json j;
    j["schema"] = "thermstack-report-v1";
    j["scenario"] = rep.scenario_id.empty() ? ordered_json(nullptr)
                                            : ordered_json(rep.scenario_id);
    j["grid"] = {{"nx", rep.grid.nx}, {"ny", rep.grid.ny}};
    j["die"] = {{"width_m", rep.die_width}, {"height_m", rep.die_height}};
    j["ambient_K"] = rep.ambient_K;
    j["total_power_W"] = rep.total_power_W;
    j["solver"] = {{"iterations", rep.solver_iterations},
                   {"residual", rep.solver_residual}};
    j["global"] = {
        {"peak_K", rep.peak.value_K},
        {"peak_layer", rep.peak.layer},
        {"peak_x_m", rep.peak.x},
        {"peak_y_m", rep.peak.y},
        {"lowest_K", rep.lowest.value_K},
        {"lowest_layer", rep.lowest.layer},
        {"lowest_x_m", rep.lowest.x},
        {"lowest_y_m", rep.lowest.y},
    };
    j["layers"] = ordered_json::array();
    for (const LayerStats& ls : rep.layers) {
        ordered_json lj = {{"name", ls.name},       {"index", ls.layer},
                           {"min_K", ls.min_K},     {"max_K", ls.max_K},
                           {"avg_K", ls.avg_K}};
        if (!std::isnan(ls.proc_peak_K)) lj["proc_peak_K"] = ls.proc_peak_K;
        j["layers"].push_back(lj);
    }
    j["blocks"] = ordered_json::array();
    for (const BlockStats& bs : rep.blocks) {
        j["blocks"].push_back({{"name", bs.name},
                               {"layer", bs.layer},
                               {"min_K", bs.min_K},
                               {"max_K", bs.max_K},
                               {"avg_K", bs.avg_K}});
    }
    if (!rep.references.empty()) {
        j["references"] = ordered_json::array();
        for (const ReferenceValue& rv : rep.references) {
            j["references"].push_back({{"observable", rv.observable},
                                       {"published_K", rv.published_K},
                                       {"computed_K", rv.computed_K},
                                       {"delta_K", rv.computed_K - rv.published_K},
                                       {"source", rv.source}});
        }
    }
    if (!rep.notes.empty()) j["notes"] = rep.notes;
    if (!rep.layer_maps.empty()) {
        j["field"] = ordered_json::array();
        for (size_t li = 0; li < rep.layer_maps.size(); ++li) {
            j["field"].push_back({{"layer", static_cast<int>(li)},
                                  {"nx", rep.grid.nx},
                                  {"ny", rep.grid.ny},
                                  {"values_K", rep.layer_maps[li]}});
        }
    }
    return j.dump(2) + "\n";
}

/// CSV report: scope,name,min_K,max_K,avg_K with block, layer and global
/// rows, in report order.
inline std::string write_report_csv(const ThermalReport& rep) {
    std::string out = "scope,name,min_K,max_K,avg_K\n";
    auto num = [](double v) { return detail::format_number(v); };
    for (const BlockStats& bs : rep.blocks)
        out += "block," + bs.name + "," + num(bs.min_K) + "," + num(bs.max_K) + "," +
               num(bs.avg_K) + "\n";
    for (const LayerStats& ls : rep.layers)
        out += "layer," + ls.name + "," + num(ls.min_K) + "," + num(ls.max_K) + "," +
               num(ls.avg_K) + "\n";
    out += "global,peak," + num(rep.peak.value_K) + "," + num(rep.peak.value_K) +
           "," + num(rep.peak.value_K) + "\n";
    out += "global,lowest," + num(rep.lowest.value_K) + "," +
           num(rep.lowest.value_K) + "," + num(rep.lowest.value_K) + "\n";
    return out;
}

enum class ReportFormat { Json, Csv };

inline std::string write_report(const ThermalReport& rep, ReportFormat format) {
    return format == ReportFormat::Json ? write_report_json(rep)
                                        : write_report_csv(rep);
}

/// Reads back the subset of a report needed to re-render maps.
struct SavedField {
    GridSpec grid;
    double ambient_K = 0.0;
    std::vector<std::vector<double>> layer_maps;
};

inline SavedField parse_report_field(const std::string& json_text) {
    const auto j = ordered_json::parse(json_text);
    SavedField f;
    f.grid.nx = j.at("grid").at("nx").get<int>();
    f.grid.ny = j.at("grid").at("ny").get<int>();
    f.ambient_K = j.at("ambient_K").get<double>();
    if (!j.contains("field"))
        throw ParseError("report has no embedded field data");
    for (const auto& lj : j.at("field"))
        f.layer_maps.push_back(lj.at("values_K").get<std::vector<double>>());
    return f;
}

} // namespace thermstack
