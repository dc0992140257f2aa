#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "isoscan/analysis.hpp"
#include "isoscan/csv.hpp"
#include "isoscan/render.hpp"
#include "isoscan/scenario_io.hpp"
#include "isoscan/voxel_io.hpp"

namespace isoscan {

enum class Stage : std::uint8_t { Simulate = 0, Isolines = 1, Analyze = 2, Render = 3 };

inline const char* to_string(Stage s) {
    switch (s) {
    case Stage::Simulate: return "simulate";
    case Stage::Isolines: return "isolines";
    case Stage::Analyze: return "analyze";
    default: return "render";
    }
}

inline Stage parse_stage(const std::string& name) {
    if (name == "simulate") return Stage::Simulate;
    if (name == "isolines") return Stage::Isolines;
    if (name == "analyze") return Stage::Analyze;
    if (name == "render") return Stage::Render;
    throw validation_error("unknown pipeline stage '" + name + "'");
}

/// Plan for processing one scenario into an output directory.
struct PipelineRun {
    std::string scenario_path;
    std::string output_dir;
    std::uint64_t seed = 0;
    std::vector<Stage> stages;

    bool has(Stage s) const {
        for (Stage st : stages)
            if (st == s) return true;
        return false;
    }

    /// Stages must be unique, listed in dependency order, and each stage's
    /// prerequisite must be part of the plan.
    void validate() const {
        if (stages.empty()) throw validation_error("pipeline: no stages requested");
        for (std::size_t i = 0; i + 1 < stages.size(); ++i)
            if (std::uint8_t(stages[i]) >= std::uint8_t(stages[i + 1]))
                throw validation_error(std::string("pipeline: stage '") +
                                       to_string(stages[i + 1]) + "' cannot follow '" +
                                       to_string(stages[i]) + "'");
        if (has(Stage::Isolines) && !has(Stage::Simulate))
            throw validation_error("pipeline: isolines requires simulate");
        if (has(Stage::Analyze) && !has(Stage::Isolines))
            throw validation_error("pipeline: analyze requires isolines");
        if (has(Stage::Render) && !has(Stage::Simulate))
            throw validation_error("pipeline: render requires simulate");
    }
};

namespace detail {

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("cannot write '" + path + "'");
    out.write(content.data(), std::streamsize(content.size()));
}

} // namespace detail

/// Executes the per-scenario stages of one plan. Artifacts are named after
/// the scenario file stem. Returns the built image for reuse.
inline PolarimetricImage run_pipeline(const PipelineRun& run) {
    run.validate();
    const Scenario scenario = load_scenario(run.scenario_path);
    std::filesystem::create_directories(run.output_dir);
    const std::string stem =
        (std::filesystem::path(run.output_dir) /
         std::filesystem::path(run.scenario_path).stem())
            .string();

    const PolarimetricImage image = build_image(scenario, run.seed);
    save_voxels(image, stem + ".isc");

    for (RxPol pol : {RxPol::V, RxPol::H}) {
        const std::string tag = pol == RxPol::V ? "vv" : "vh";
        std::optional<IsolineSet> set;
        if (run.has(Stage::Isolines)) {
            set = extract_isolines(image, pol, {}, -10.0);
            std::ofstream iso(stem + "." + tag + ".isolines.csv");
            write_isolines_csv(iso, *set, image.grid.range_axis);
            std::ofstream reg(stem + "." + tag + ".regions.csv");
            write_regions_csv(reg, cluster_regions(*set, image), image.grid);
        }
        if (run.has(Stage::Render)) {
            Raster raster = render_field(image, pol, std::nullopt);
            if (set) overlay_isolines(raster, image, *set, std::nullopt);
            save_ppm(raster, stem + "." + tag + ".maxproj.ppm");
        }
    }
    return image;
}

/// Runs the plans of an ON/OFF scenario pair, then the analyze stage across
/// them when requested. Both plans must agree on the stage list.
inline AnalysisReport run_pipeline_pair(const PipelineRun& on_run, const PipelineRun& off_run) {
    on_run.validate();
    off_run.validate();
    if (on_run.stages != off_run.stages)
        throw validation_error("pipeline: on/off runs request different stages");

    const PolarimetricImage on_image = run_pipeline(on_run);
    const PolarimetricImage off_image = run_pipeline(off_run);

    AnalysisReport report;
    if (on_run.has(Stage::Analyze)) {
        const Scenario on_sc = load_scenario(on_run.scenario_path);
        const Scenario off_sc = load_scenario(off_run.scenario_path);
        report = analyze_sensors(on_image, off_image, sensor_sites(on_sc), sensor_sites(off_sc));
        std::ostringstream csv;
        write_report_csv(csv, report.readings);
        detail::write_file(
            (std::filesystem::path(on_run.output_dir) / "report.csv").string(), csv.str());
        detail::write_file((std::filesystem::path(on_run.output_dir) / "report.txt").string(),
                           format_report_table(report.readings));
    }
    return report;
}

} // namespace isoscan
