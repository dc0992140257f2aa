// Command-line front end for the simulate / isolines / report / render
// pipeline. Exit codes: 0 success, 2 validation, 3 decode, 4 analysis
// mismatch.

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "isoscan/analysis.hpp"
#include "isoscan/csv.hpp"
#include "isoscan/pipeline.hpp"
#include "isoscan/render.hpp"
#include "isoscan/scenario_io.hpp"
#include "isoscan/voxel_io.hpp"

namespace {

isoscan::RxPol parse_pol(const std::string& s) {
    if (s == "vv" || s == "VV") return isoscan::RxPol::V;
    if (s == "vh" || s == "VH") return isoscan::RxPol::H;
    throw isoscan::validation_error("polarization must be vv or vh, got '" + s + "'");
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw isoscan::validation_error("cannot write '" + path + "'");
    out << content;
}

int cmd_simulate(const std::string& scenario_path, std::uint64_t seed, const std::string& out_path) {
    const isoscan::Scenario scenario = isoscan::load_scenario(scenario_path);
    const isoscan::PolarimetricImage image = isoscan::build_image(scenario, seed);
    isoscan::save_voxels(image, out_path);

    const isoscan::Window all{scenario.grid.theta_start_deg, scenario.grid.theta_stop_deg,
                              scenario.grid.phi_start_deg, scenario.grid.phi_stop_deg,
                              scenario.grid.range_axis.origin_m,
                              scenario.grid.range_axis.span_m()};
    const auto vv = isoscan::image_max_in_window(image, isoscan::RxPol::V, all);
    const auto vh = isoscan::image_max_in_window(image, isoscan::RxPol::H, all);
    std::printf("grid %u x %u x %u (theta x phi x range bins)\n", scenario.grid.theta_count(),
                scenario.grid.phi_count(), scenario.grid.range_axis.bin_count);
    std::printf("vv max %.2f dB at (%.2f deg, %.2f deg, %.3f m)\n", vv.value_db,
                scenario.grid.theta_at(vv.theta_i), scenario.grid.phi_at(vv.phi_j),
                scenario.grid.range_axis.bin_center_m(vv.bin));
    std::printf("vh max %.2f dB at (%.2f deg, %.2f deg, %.3f m)\n", vh.value_db,
                scenario.grid.theta_at(vh.theta_i), scenario.grid.phi_at(vh.phi_j),
                scenario.grid.range_axis.bin_center_m(vh.bin));
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
}

int cmd_isolines(const std::string& in_path, const std::string& pol_str, double threshold_db,
                 std::vector<double> levels, std::string out_isolines, std::string out_regions) {
    const isoscan::PolarimetricImage image = isoscan::load_voxels(in_path);
    const isoscan::RxPol pol = parse_pol(pol_str);
    const isoscan::IsolineSet set =
        isoscan::extract_isolines(image, pol, std::move(levels), threshold_db);
    const auto regions = isoscan::cluster_regions(set, image);

    if (out_isolines.empty()) out_isolines = in_path + ".isolines.csv";
    if (out_regions.empty()) out_regions = in_path + ".regions.csv";
    std::ofstream iso_out(out_isolines);
    if (!iso_out) throw isoscan::validation_error("cannot write '" + out_isolines + "'");
    isoscan::write_isolines_csv(iso_out, set, image.grid.range_axis);
    std::ofstream reg_out(out_regions);
    if (!reg_out) throw isoscan::validation_error("cannot write '" + out_regions + "'");
    isoscan::write_regions_csv(reg_out, regions, image.grid);

    std::map<double, std::size_t> per_level;
    for (double l : set.levels_db) per_level[l] = 0;
    for (const auto& iso : set.isolines) ++per_level[iso.level_db];
    for (const auto& [level, count] : per_level)
        std::printf("level %+.1f dB: %zu isolines\n", level, count);
    std::printf("%zu isolines in %zu regions; wrote %s, %s\n", set.isolines.size(), regions.size(),
                out_isolines.c_str(), out_regions.c_str());
    return 0;
}

int cmd_report(const std::string& on_path, const std::string& off_path,
               const std::string& scenario_path, const std::string& out_csv) {
    const isoscan::PolarimetricImage on_image = isoscan::load_voxels(on_path);
    const isoscan::PolarimetricImage off_image = isoscan::load_voxels(off_path);
    const isoscan::Scenario scenario = isoscan::load_scenario(scenario_path);
    const auto report =
        isoscan::analyze_sensors(on_image, off_image, isoscan::sensor_sites(scenario));

    std::printf("%s", isoscan::format_report_table(report.readings).c_str());
    if (!out_csv.empty()) {
        std::ostringstream csv;
        isoscan::write_report_csv(csv, report.readings);
        write_text_file(out_csv, csv.str());
        std::printf("wrote %s\n", out_csv.c_str());
    }
    if (!report.unmatched.empty()) {
        for (const auto& id : report.unmatched)
            std::fprintf(stderr, "warning: sensor '%s' matched no region in any state\n",
                         id.c_str());
        return 4;
    }
    return 0;
}

int cmd_run(const std::string& on_scenario, const std::string& off_scenario,
            const std::string& out_dir, std::uint64_t seed,
            const std::vector<std::string>& stage_names) {
    std::vector<isoscan::Stage> stages;
    for (const auto& name : stage_names) stages.push_back(isoscan::parse_stage(name));
    if (stages.empty())
        stages = {isoscan::Stage::Simulate, isoscan::Stage::Isolines, isoscan::Stage::Analyze,
                  isoscan::Stage::Render};

    const isoscan::PipelineRun on_run{on_scenario, out_dir, seed, stages};
    const isoscan::PipelineRun off_run{off_scenario, out_dir, seed, stages};
    const isoscan::AnalysisReport report = isoscan::run_pipeline_pair(on_run, off_run);
    if (on_run.has(isoscan::Stage::Analyze))
        std::printf("%s", isoscan::format_report_table(report.readings).c_str());
    std::printf("artifacts in %s\n", out_dir.c_str());
    if (!report.unmatched.empty()) {
        for (const auto& id : report.unmatched)
            std::fprintf(stderr, "warning: sensor '%s' matched no region in any state\n",
                         id.c_str());
        return 4;
    }
    return 0;
}

int cmd_render(const std::string& in_path, std::optional<std::uint32_t> slice_bin, bool maxproj,
               const std::string& pol_str, const std::string& overlay_csv,
               const std::string& out_path) {
    const isoscan::PolarimetricImage image = isoscan::load_voxels(in_path);
    if (slice_bin && maxproj)
        throw isoscan::validation_error("--slice and --maxproj are mutually exclusive");
    if (!slice_bin && !maxproj)
        throw isoscan::validation_error("choose either --slice R_BIN or --maxproj");
    isoscan::Raster raster = isoscan::render_field(image, parse_pol(pol_str), slice_bin);
    if (!overlay_csv.empty()) {
        std::ifstream in(overlay_csv);
        if (!in) throw isoscan::validation_error("cannot open overlay CSV '" + overlay_csv + "'");
        const isoscan::IsolineSet set = isoscan::read_isolines_csv(in, image.grid.range_axis);
        isoscan::overlay_isolines(raster, image, set, slice_bin);
    }
    isoscan::save_ppm(raster, out_path);
    std::printf("wrote %s (%u x %u)\n", out_path.c_str(), raster.width, raster.height);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"FM-CW scan simulator and polarimetric image processing toolkit"};
    app.require_subcommand(1);

    std::string scenario_path, in_path, on_path, off_path, out_path, overlay_csv, out_csv;
    std::string pol_str = "vv", out_isolines, out_regions;
    std::uint64_t seed = 0;
    double threshold_db = -10.0;
    std::vector<double> levels;
    std::uint32_t slice_bin_arg = 0;
    bool maxproj = false;

    auto* sim = app.add_subcommand("simulate", "simulate a scan and write an ISC1 voxel file");
    sim->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    sim->add_option("--seed", seed, "noise seed (default 0)");
    sim->add_option("--out", out_path, "output voxel file")->required();

    auto* iso = app.add_subcommand("isolines", "extract isolines and regions from a voxel file");
    iso->add_option("--in", in_path, "input ISC1 voxel file")->required();
    iso->add_option("--pol", pol_str, "polarization: vv or vh")->required();
    iso->add_option("--threshold", threshold_db, "minimal echo level in dB (default -10)");
    iso->add_option("--levels", levels, "explicit isoline levels in dB (ascending)");
    iso->add_option("--out-isolines", out_isolines, "isoline CSV path (default <in>.isolines.csv)");
    iso->add_option("--out-regions", out_regions, "region CSV path (default <in>.regions.csv)");

    auto* rep = app.add_subcommand("report", "per-sensor echo levels and dynamic range");
    rep->add_option("--on", on_path, "voxel file of the all-ON campaign")->required();
    rep->add_option("--off", off_path, "voxel file of the all-OFF campaign")->required();
    rep->add_option("--scenario", scenario_path, "scenario JSON with sensor placements")->required();
    rep->add_option("--out", out_csv, "also write the report as CSV");

    std::string on_scenario, off_scenario, out_dir;
    std::vector<std::string> stage_names;
    auto* run = app.add_subcommand("run", "full pipeline for an ON/OFF scenario pair");
    run->add_option("--on-scenario", on_scenario, "scenario JSON of the ON campaign")->required();
    run->add_option("--off-scenario", off_scenario, "scenario JSON of the OFF campaign")->required();
    run->add_option("--out-dir", out_dir, "directory for all artifacts")->required();
    run->add_option("--seed", seed, "noise seed (default 0)");
    run->add_option("--stages", stage_names,
                    "subset of simulate isolines analyze render (default: all)");

    auto* ren = app.add_subcommand("render", "render a slice or max-projection to a PPM raster");
    ren->add_option("--in", in_path, "input ISC1 voxel file")->required();
    auto* slice_opt = ren->add_option("--slice", slice_bin_arg, "range-bin index to render");
    ren->add_flag("--maxproj", maxproj, "max-projection over range instead of a slice");
    ren->add_option("--pol", pol_str, "polarization: vv or vh (default vv)");
    ren->add_option("--overlay", overlay_csv, "isoline CSV to draw on top");
    ren->add_option("--out", out_path, "output PPM file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) return cmd_simulate(scenario_path, seed, out_path);
        if (iso->parsed())
            return cmd_isolines(in_path, pol_str, threshold_db, levels, out_isolines, out_regions);
        if (rep->parsed()) return cmd_report(on_path, off_path, scenario_path, out_csv);
        if (run->parsed()) return cmd_run(on_scenario, off_scenario, out_dir, seed, stage_names);
        if (ren->parsed()) {
            std::optional<std::uint32_t> slice_bin;
            if (slice_opt->count()) slice_bin = slice_bin_arg;
            return cmd_render(in_path, slice_bin, maxproj, pol_str, overlay_csv, out_path);
        }
    } catch (const isoscan::decode_error& e) {
        std::fprintf(stderr, "decode error: %s\n", e.what());
        return 3;
    } catch (const isoscan::analysis_error& e) {
        std::fprintf(stderr, "analysis error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
