#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "isoscan/csv.hpp"
#include "isoscan/pipeline.hpp"
#include "isoscan/render.hpp"
#include "isoscan/scenario_io.hpp"
#include "isoscan/voxel_io.hpp"
#include "test_helpers.hpp"

using namespace isoscan;
using namespace isoscan::testing;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("isoscan_test_" + std::to_string(getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(ISOSCAN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

PolarimetricImage sample_image(std::uint64_t seed = 5) {
    Scenario sc = small_scenario();
    sc.config.noise_speckle_db = -40.0;
    sc.scatterers.push_back(make_sensor("s1", {0.05, 2.5, 0.02}, 0.4, 6.0, 5.0, 0.05));
    sc.scatterers.push_back(make_clutter("c1", {-0.3, 3.4, 0.1}, 2.5, 0.1));
    sc.sensor_states["s1"] = SensorState::On;
    return build_image(sc, seed);
}

std::string sample_scenario_json() {
    return R"({
  "name": "smoke",
  "config": {
    "carrier_frequency_hz": 23.8e9, "bandwidth_hz": 2e9,
    "tx_gain_dbi": 28, "tx_hpbw_deg": 6,
    "rx_gain_v_dbi": 20, "rx_gain_h_dbi": 20, "rx_hpbw_deg": 20,
    "noise_floor_db": -25, "fft_size": 128, "range_max_m": 4.5
  },
  "grid": {
    "theta_start_deg": -4, "theta_stop_deg": 4, "theta_step_deg": 1,
    "phi_start_deg": -3, "phi_stop_deg": 3, "phi_step_deg": 0.3
  },
  "scatterers": [
    { "id": "s1", "kind": "sensor", "position_m": [0.05, 2.5, 0.02],
      "on": { "s_vv": 0.4, "s_vh": 6.0 }, "off": { "s_vv": 5.0, "s_vh": 0.05 } },
    { "id": "c1", "kind": "clutter", "position_m": [-0.3, 3.4, 0.1],
      "matrix": { "s_vv": 2.5, "s_vh": 0.1 } }
  ],
  "sensor_states": { "s1": "ON" }
})";
}

} // namespace

TEST_CASE("ISC1 voxel files round-trip bit exactly") {
    const PolarimetricImage img = sample_image();
    const std::string bytes = encode_voxels(img);
    const PolarimetricImage back = decode_voxels(bytes);
    CHECK(back.grid == img.grid);
    CHECK(back.vv == img.vv);
    CHECK(back.vh == img.vh);
    CHECK(encode_voxels(back) == bytes);
}

TEST_CASE("voxel decode failures carry byte offsets") {
    const PolarimetricImage img = sample_image();
    std::string bytes = encode_voxels(img);

    SECTION("bad magic") {
        std::string bad = bytes;
        bad[0] = 'X';
        try {
            decode_voxels(bad);
            FAIL("expected decode_error");
        } catch (const decode_error& e) {
            CHECK(e.offset == 0);
        }
    }
    SECTION("truncated payload") {
        const std::string bad = bytes.substr(0, bytes.size() / 2);
        CHECK_THROWS_AS(decode_voxels(bad), decode_error);
    }
    SECTION("inconsistent counts") {
        std::string bad = bytes;
        bad[8] = char(bad[8] + 1); // theta_count no longer matches the bounds
        try {
            decode_voxels(bad);
            FAIL("expected decode_error");
        } catch (const decode_error& e) {
            CHECK(e.offset == 8);
        }
    }
    SECTION("trailing garbage") {
        CHECK_THROWS_AS(decode_voxels(bytes + "zz"), decode_error);
    }
}

TEST_CASE("scenario files parse, validate, and round-trip") {
    const fs::path path = temp_dir() / "smoke.json";
    std::ofstream(path) << sample_scenario_json();

    const Scenario sc = load_scenario(path.string());
    CHECK(sc.name == "smoke");
    CHECK(sc.config.fft_size == 128);
    CHECK(sc.scatterers.size() == 2);
    CHECK(sc.sensor_states.at("s1") == SensorState::On);
    CHECK(std::isinf(sc.config.noise_speckle_db)); // optional key defaults to off

    const fs::path copy = temp_dir() / "smoke_copy.json";
    save_scenario(sc, copy.string());
    const Scenario sc2 = load_scenario(copy.string());
    CHECK(scenario_to_json(sc2) == scenario_to_json(sc));
}

TEST_CASE("scenario schema violations name the field path") {
    auto parse_with = [&](const std::string& mutate_from, const std::string& mutate_to) {
        std::string text = sample_scenario_json();
        const auto at = text.find(mutate_from);
        REQUIRE(at != std::string::npos);
        text.replace(at, mutate_from.size(), mutate_to);
        return nlohmann::json::parse(text);
    };

    SECTION("unknown key is rejected with its path") {
        try {
            parse_scenario(parse_with("\"fft_size\": 128", "\"fft_size\": 128, \"fft_sizz\": 7"),
                           "doc");
            FAIL("expected validation_error");
        } catch (const validation_error& e) {
            const std::string msg = e.what();
            CHECK(msg.find("doc.config.fft_sizz") != std::string::npos);
            CHECK(msg.find("unknown key") != std::string::npos);
        }
    }
    SECTION("missing required key names its path") {
        try {
            parse_scenario(parse_with("\"tx_gain_dbi\"", "\"tx_gainz_dbi\""), "doc");
            FAIL("expected validation_error");
        } catch (const validation_error& e) {
            CHECK(std::string(e.what()).find("doc.config.tx_gain_dbi") != std::string::npos);
        }
    }
    SECTION("bad sensor state string") {
        CHECK_THROWS_AS(parse_scenario(parse_with("\"ON\"", "\"on\""), "doc"), validation_error);
    }
    SECTION("clutter listed in sensor_states") {
        CHECK_THROWS_AS(parse_scenario(parse_with("{ \"s1\": \"ON\" }",
                                                  "{ \"s1\": \"ON\", \"c1\": \"OFF\" }"),
                                       "doc"),
                        validation_error);
    }
    SECTION("malformed position") {
        CHECK_THROWS_AS(parse_scenario(parse_with("[0.05, 2.5, 0.02]", "[0.05, 2.5]"), "doc"),
                        validation_error);
    }
    SECTION("invalid JSON text") {
        const fs::path bad = temp_dir() / "bad.json";
        std::ofstream(bad) << "{ not json";
        CHECK_THROWS_AS(load_scenario(bad.string()), validation_error);
    }
}

TEST_CASE("isoline CSV is self-inverse") {
    const PolarimetricImage img = sample_image();
    const IsolineSet set = extract_isolines(img, RxPol::H, {}, -10.0);
    REQUIRE_FALSE(set.isolines.empty());

    std::stringstream buf;
    write_isolines_csv(buf, set, img.grid.range_axis);
    const IsolineSet back = read_isolines_csv(buf, img.grid.range_axis);

    CHECK(back.polarization == set.polarization);
    REQUIRE(back.isolines.size() == set.isolines.size());
    for (std::size_t i = 0; i < set.isolines.size(); ++i) {
        CHECK(back.isolines[i].level_db == set.isolines[i].level_db);
        CHECK(back.isolines[i].range_bin == set.isolines[i].range_bin);
        CHECK(back.isolines[i].closed == set.isolines[i].closed);
        REQUIRE(back.isolines[i].vertices.size() == set.isolines[i].vertices.size());
        for (std::size_t v = 0; v < set.isolines[i].vertices.size(); ++v) {
            CHECK(back.isolines[i].vertices[v][0] ==
                  Approx(set.isolines[i].vertices[v][0]).margin(1e-9));
            CHECK(back.isolines[i].vertices[v][1] ==
                  Approx(set.isolines[i].vertices[v][1]).margin(1e-9));
        }
    }
}

TEST_CASE("region CSV is self-inverse") {
    const PolarimetricImage img = sample_image();
    const IsolineSet set = extract_isolines(img, RxPol::H, {}, -10.0);
    const auto regions = cluster_regions(set, img);
    REQUIRE_FALSE(regions.empty());

    std::stringstream buf;
    write_regions_csv(buf, regions, img.grid);
    const auto back = read_regions_csv(buf, img.grid);
    REQUIRE(back.size() == regions.size());
    for (std::size_t i = 0; i < regions.size(); ++i) {
        CHECK(back[i].id == regions[i].id);
        CHECK(back[i].peak.theta_i == regions[i].peak.theta_i);
        CHECK(back[i].peak.phi_j == regions[i].peak.phi_j);
        CHECK(back[i].peak.bin == regions[i].peak.bin);
        CHECK(back[i].bbox.theta_min_deg == Approx(regions[i].bbox.theta_min_deg).margin(1e-9));
        CHECK(back[i].bbox.range_max_m == Approx(regions[i].bbox.range_max_m).margin(1e-9));
    }
}

TEST_CASE("report CSV is self-inverse at its printed precision") {
    std::vector<SensorReading> readings(2);
    readings[0] = {"sensor1", 2.5, -1.9, 3.7, 5.6, 2.6, -4.9, 7.5};
    readings[1] = {"sensor2", 3.6, -4.9, -3.0, 1.9, -0.9, -17.3, 16.4};

    std::stringstream buf;
    write_report_csv(buf, readings);
    const auto back = read_report_csv(buf);
    std::stringstream buf2;
    write_report_csv(buf2, back);

    std::stringstream buf3;
    write_report_csv(buf3, readings);
    CHECK(buf2.str() == buf3.str());
    REQUIRE(back.size() == 2);
    CHECK(back[1].delta_vh == Approx(16.4));
}

TEST_CASE("slice CSV is self-inverse") {
    const PolarimetricImage img = sample_image();
    std::stringstream buf;
    write_slice_csv(buf, img, RxPol::V, 33);
    const Slice2D slice = read_slice_csv(buf);
    CHECK(slice.rows == img.grid.theta_count());
    CHECK(slice.cols == img.grid.phi_count());
    for (std::uint32_t t = 0; t < slice.rows; ++t)
        for (std::uint32_t p = 0; p < slice.cols; ++p)
            CHECK(slice.at(t, p) == Approx(double(img.vv[img.index(t, p, 33)])).margin(1e-6));
    CHECK_THROWS_AS(write_slice_csv(buf, img, RxPol::V, 9999), std::out_of_range);
}

TEST_CASE("rendering") {
    const PolarimetricImage img = sample_image();

    SECTION("constant field renders uniformly") {
        PolarimetricImage flat = img;
        std::fill(flat.vv.begin(), flat.vv.end(), -7.0f);
        const Raster r = render_field(flat, RxPol::V, std::nullopt);
        REQUIRE_FALSE(r.rgb.empty());
        for (std::uint8_t b : r.rgb) CHECK(b == r.rgb[0]);
    }

    SECTION("max projection shows both peaks at their pixels") {
        PolarimetricImage two = img;
        std::fill(two.vv.begin(), two.vv.end(), -25.0f);
        two.vv[two.index(2, 5, 10)] = 5.0f;
        two.vv[two.index(6, 15, 40)] = 5.0f;
        const Raster r = render_field(two, RxPol::V, std::nullopt);
        const std::uint32_t tn = two.grid.theta_count();
        auto px = [&](std::uint32_t ti, std::uint32_t pj) {
            return r.rgb[3 * (std::size_t(tn - 1 - ti) * r.width + pj)];
        };
        CHECK(px(2, 5) == 255);
        CHECK(px(6, 15) == 255);
        CHECK(px(0, 0) == 0);
    }

    SECTION("slice index out of bounds is a range error") {
        CHECK_THROWS_AS(render_field(img, RxPol::V, 9999), std::out_of_range);
    }

    SECTION("overlayed closed isoline draws a closed 8-connected loop") {
        const IsolineSet set = extract_isolines(img, RxPol::H, {}, -10.0);
        bool has_closed = false;
        for (const auto& iso : set.isolines) has_closed |= iso.closed;
        REQUIRE(has_closed);
        Raster r = render_field(img, RxPol::H, std::nullopt);
        overlay_isolines(r, img, set, std::nullopt);
        std::size_t red = 0;
        auto is_red = [&](int x, int y) {
            if (x < 0 || y < 0 || x >= int(r.width) || y >= int(r.height)) return false;
            const std::size_t i = 3 * (std::size_t(y) * r.width + x);
            return r.rgb[i] == 255 && r.rgb[i + 1] == 0 && r.rgb[i + 2] == 0;
        };
        for (std::uint32_t y = 0; y < r.height; ++y)
            for (std::uint32_t x = 0; x < r.width; ++x)
                if (is_red(int(x), int(y))) {
                    ++red;
                    int neighbors = 0;
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dx = -1; dx <= 1; ++dx)
                            if ((dx || dy) && is_red(int(x) + dx, int(y) + dy)) ++neighbors;
                    CHECK(neighbors >= 1); // part of a connected polyline, not speckle
                }
        CHECK(red >= 4);
    }

    SECTION("PPM bytes are deterministic and well-formed") {
        const Raster r = render_field(img, RxPol::V, 33);
        const std::string ppm = encode_ppm(r);
        CHECK(ppm.substr(0, 3) == "P6\n");
        CHECK(ppm.size() == ppm.find("255\n") + 4 + std::size_t(3) * r.width * r.height);
        CHECK(encode_ppm(r) == ppm);
    }
}

TEST_CASE("pipeline plans enforce stage dependency order") {
    using Stage = isoscan::Stage;
    auto plan = [](std::vector<Stage> stages) {
        return PipelineRun{"s.json", "out", 0, std::move(stages)};
    };
    CHECK_NOTHROW(plan({Stage::Simulate}).validate());
    CHECK_NOTHROW(plan({Stage::Simulate, Stage::Isolines, Stage::Analyze}).validate());
    CHECK_NOTHROW(plan({Stage::Simulate, Stage::Isolines, Stage::Analyze, Stage::Render}).validate());
    CHECK_NOTHROW(plan({Stage::Simulate, Stage::Render}).validate());

    CHECK_THROWS_AS(plan({}).validate(), validation_error);
    CHECK_THROWS_AS(plan({Stage::Isolines, Stage::Simulate}).validate(), validation_error);
    CHECK_THROWS_AS(plan({Stage::Simulate, Stage::Simulate}).validate(), validation_error);
    CHECK_THROWS_AS(plan({Stage::Isolines}).validate(), validation_error);
    CHECK_THROWS_AS(plan({Stage::Simulate, Stage::Analyze}).validate(), validation_error);
    CHECK_THROWS_AS(plan({Stage::Render}).validate(), validation_error);

    CHECK(parse_stage("analyze") == Stage::Analyze);
    CHECK_THROWS_AS(parse_stage("polish"), validation_error);
}

TEST_CASE("composed pipeline run writes the full artifact set") {
    const fs::path dir = temp_dir() / "pipeline_run";
    const fs::path on_json = temp_dir() / "pipe_on.json";
    std::ofstream(on_json) << sample_scenario_json();
    std::string off_text = sample_scenario_json();
    const auto at = off_text.find("\"s1\": \"ON\"");
    REQUIRE(at != std::string::npos);
    off_text.replace(at, 10, "\"s1\": \"OFF\"");
    const fs::path off_json = temp_dir() / "pipe_off.json";
    std::ofstream(off_json) << off_text;

    const int code = run_cli("run --on-scenario " + on_json.string() + " --off-scenario " +
                             off_json.string() + " --out-dir " + dir.string() + " --seed 11");
    CHECK(code == 0);
    for (const char* name :
         {"pipe_on.isc", "pipe_off.isc", "pipe_on.vh.isolines.csv", "pipe_on.vv.regions.csv",
          "pipe_off.vh.isolines.csv", "pipe_on.vh.maxproj.ppm", "pipe_off.vv.maxproj.ppm",
          "report.csv", "report.txt"})
        CHECK(fs::exists(dir / name));

    const auto readings = [&] {
        std::ifstream in(dir / "report.csv");
        return read_report_csv(in);
    }();
    REQUIRE(readings.size() == 1);
    CHECK(readings[0].sensor_id == "s1");
    CHECK(readings[0].delta_vh > readings[0].delta_vv);

    SECTION("a stage subset skips downstream artifacts") {
        const fs::path sub = temp_dir() / "pipeline_subset";
        CHECK(run_cli("run --on-scenario " + on_json.string() + " --off-scenario " +
                      off_json.string() + " --out-dir " + sub.string() +
                      " --stages simulate render") == 0);
        CHECK(fs::exists(sub / "pipe_on.isc"));
        CHECK(fs::exists(sub / "pipe_on.vv.maxproj.ppm"));
        CHECK_FALSE(fs::exists(sub / "pipe_on.vh.isolines.csv"));
        CHECK_FALSE(fs::exists(sub / "report.csv"));

        CHECK(run_cli("run --on-scenario " + on_json.string() + " --off-scenario " +
                      off_json.string() + " --out-dir " + sub.string() +
                      " --stages isolines") == 2); // missing prerequisite
    }
}

TEST_CASE("bundled calibration scenes hold their structural properties") {
    const Scenario sc1 = load_scenario(std::string(ISOSCAN_SCENARIO_DIR) + "/scenario1.json");
    const Scenario sc2 = load_scenario(std::string(ISOSCAN_SCENARIO_DIR) + "/scenario2.json");

    for (const Scatterer* s : sc1.sensors()) {
        CHECK(s->state_on.s_vh > s->state_on.s_vv);   // depolarizing when ON
        CHECK(s->state_off.s_vv > s->state_off.s_vh); // structural when OFF
        CHECK(sc1.sensor_states.at(s->id) == SensorState::Off);
        CHECK(sc2.sensor_states.at(s->id) == SensorState::On);
    }

    const Window all{sc1.grid.theta_start_deg, sc1.grid.theta_stop_deg, sc1.grid.phi_start_deg,
                     sc1.grid.phi_stop_deg, 0.0, sc1.grid.range_axis.span_m()};

    const PolarimetricImage off_img = build_image(sc1, 0);
    CHECK(image_max_in_window(off_img, RxPol::H, all).value_db <
          image_max_in_window(off_img, RxPol::V, all).value_db); // co-pol dominates all-OFF

    const PolarimetricImage on_img = build_image(sc2, 0);
    CHECK(image_max_in_window(on_img, RxPol::H, all).value_db >= 0.2);

    auto window_of = [&](const char* id) {
        for (const auto& site : sensor_sites(sc2))
            if (site.id == id) return detail::expected_window(sc2.grid, site.expected, 3.0);
        FAIL("unknown sensor");
        return Window{};
    };
    CHECK(image_max_in_window(on_img, RxPol::H, window_of("sensor3")).value_db ==
          Approx(1.1).margin(0.2));
    CHECK(image_max_in_window(off_img, RxPol::H, window_of("sensor2")).value_db ==
          Approx(-17.3).margin(0.2));

    // the four ON sensors are the only cross-pol regions above -10 dB
    const IsolineSet vh = extract_isolines(on_img, RxPol::H, {}, -10.0);
    const auto regions = cluster_regions(vh, on_img);
    REQUIRE(regions.size() == 4);
    const double want_ranges[4] = {2.5, 3.6, 4.5, 5.8};
    for (int i = 0; i < 4; ++i) {
        const double got = sc2.grid.range_axis.bin_center_m(regions[i].peak.bin);
        CHECK(std::abs(got - want_ranges[i]) <= sc2.grid.range_axis.bin_width_m + 1e-9);
    }
}

TEST_CASE("CLI exit codes") {
    const fs::path dir = temp_dir();
    const fs::path scenario = dir / "cli_scenario.json";
    std::ofstream(scenario) << sample_scenario_json();
    const fs::path voxels = dir / "cli.isc";

    SECTION("simulate runs and is deterministic") {
        CHECK(run_cli("simulate --scenario " + scenario.string() + " --seed 3 --out " +
                      voxels.string()) == 0);
        const std::string first = slurp(voxels);
        CHECK(run_cli("simulate --scenario " + scenario.string() + " --seed 3 --out " +
                      voxels.string()) == 0);
        CHECK(slurp(voxels) == first);

        CHECK(run_cli("isolines --in " + voxels.string() + " --pol vh --threshold -10") == 0);
        CHECK(fs::exists(dir / "cli.isc.isolines.csv"));
        CHECK(fs::exists(dir / "cli.isc.regions.csv"));

        // a threshold above the global maximum still succeeds, with no isolines
        CHECK(run_cli("isolines --in " + voxels.string() + " --pol vh --threshold 80") == 0);
        {
            std::ifstream iso_csv(dir / "cli.isc.isolines.csv");
            const IsolineSet empty_set =
                read_isolines_csv(iso_csv, load_voxels(voxels.string()).grid.range_axis);
            CHECK(empty_set.isolines.empty());
        }

        const fs::path ppm = dir / "cli.ppm";
        CHECK(run_cli("render --in " + voxels.string() + " --maxproj --pol vh --overlay " +
                      (dir / "cli.isc.isolines.csv").string() + " --out " + ppm.string()) == 0);
        CHECK(fs::exists(ppm));
        CHECK(run_cli("render --in " + voxels.string() + " --slice 999999 --out " +
                      ppm.string()) == 2);
    }

    SECTION("validation failures exit 2") {
        CHECK(run_cli("simulate --scenario /nonexistent.json --out " + voxels.string()) == 2);
        const fs::path bad = dir / "bad_scenario.json";
        std::ofstream(bad) << "{ \"config\": {} }";
        CHECK(run_cli("simulate --scenario " + bad.string() + " --out " + voxels.string()) == 2);
        CHECK(run_cli("isolines") == 2); // missing required flags
    }

    SECTION("decode failures exit 3") {
        const fs::path corrupt = dir / "corrupt.isc";
        std::ofstream(corrupt, std::ios::binary) << "XXXXnot voxels";
        CHECK(run_cli("isolines --in " + corrupt.string() + " --pol vv --threshold -10") == 3);
    }

    SECTION("unmatched sensors exit 4") {
        // sensor far below the isoline threshold in every state and channel
        std::string text = sample_scenario_json();
        auto replace_all = [&](const std::string& from, const std::string& to) {
            for (auto at = text.find(from); at != std::string::npos; at = text.find(from))
                text.replace(at, from.size(), to);
        };
        replace_all("\"s_vv\": 0.4, \"s_vh\": 6.0", "\"s_vv\": 1e-4, \"s_vh\": 2e-4");
        replace_all("\"s_vv\": 5.0, \"s_vh\": 0.05", "\"s_vv\": 2e-4, \"s_vh\": 1e-4");
        replace_all("\"s_vv\": 2.5, \"s_vh\": 0.1", "\"s_vv\": 1e-4, \"s_vh\": 1e-4");
        const fs::path quiet = dir / "quiet_scenario.json";
        std::ofstream(quiet) << text;

        const fs::path on = dir / "quiet_on.isc", off = dir / "quiet_off.isc";
        REQUIRE(run_cli("simulate --scenario " + quiet.string() + " --out " + on.string()) == 0);
        REQUIRE(run_cli("simulate --scenario " + quiet.string() + " --out " + off.string()) == 0);
        CHECK(run_cli("report --on " + on.string() + " --off " + off.string() + " --scenario " +
                      quiet.string()) == 4);
    }
}
