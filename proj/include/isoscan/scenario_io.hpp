#pragma once

#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "isoscan/scenario.hpp"

namespace isoscan {

namespace detail {

/// Typed, path-reporting accessor over one JSON object. Unknown keys are
/// rejected so schema typos fail loudly.
class JsonObject {
public:
    JsonObject(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw validation_error(path_ + ": expected an object");
    }

    double number(const char* key) {
        const auto& v = require(key);
        if (!v.is_number()) throw validation_error(at(key) + ": expected a number");
        return v.get<double>();
    }
    double number_or(const char* key, double fallback) {
        if (!j_.contains(key)) return fallback;
        return number(key);
    }
    std::uint32_t uint32(const char* key) {
        const auto& v = require(key);
        if (!v.is_number_unsigned()) throw validation_error(at(key) + ": expected a non-negative integer");
        return v.get<std::uint32_t>();
    }
    std::string string(const char* key) {
        const auto& v = require(key);
        if (!v.is_string()) throw validation_error(at(key) + ": expected a string");
        return v.get<std::string>();
    }
    std::string string_or(const char* key, const std::string& fallback) {
        if (!j_.contains(key)) return fallback;
        return string(key);
    }
    Vec3 vec3(const char* key) {
        const auto& v = require(key);
        if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() ||
            !v[2].is_number())
            throw validation_error(at(key) + ": expected an array of 3 numbers");
        return Vec3{v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
    }
    const nlohmann::json* object_or_null(const char* key) {
        if (!j_.contains(key)) return nullptr;
        seen_.insert(key);
        return &j_[key];
    }
    const nlohmann::json& child(const char* key) { return require(key); }

    std::string at(const char* key) const { return path_ + "." + key; }
    const std::string& path() const { return path_; }

    /// Call after reading everything; flags any key not consumed.
    void reject_unknown() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                throw validation_error(path_ + "." + it.key() + ": unknown key");
    }

private:
    const nlohmann::json& require(const char* key) {
        if (!j_.contains(key)) throw validation_error(at(key) + ": missing required key");
        seen_.insert(key);
        return j_[key];
    }
    const nlohmann::json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline ScatteringMatrix parse_matrix(const nlohmann::json& j, const std::string& path) {
    JsonObject o(j, path);
    ScatteringMatrix m{o.number("s_vv"), o.number("s_vh")};
    o.reject_unknown();
    return m;
}

} // namespace detail

/// Parses a scenario document. Schema violations throw validation_error with
/// the offending field path.
inline Scenario parse_scenario(const nlohmann::json& root, const std::string& doc_name = "scenario") {
    detail::JsonObject top(root, doc_name);
    Scenario sc;
    sc.name = top.string_or("name", "");

    detail::JsonObject cfg(top.child("config"), top.at("config"));
    RadarConfig& c = sc.config;
    c.carrier_frequency_hz = cfg.number("carrier_frequency_hz");
    c.bandwidth_hz = cfg.number("bandwidth_hz");
    c.chirp_duration_s = cfg.number_or("chirp_duration_s", c.chirp_duration_s);
    c.tx_gain_dbi = cfg.number("tx_gain_dbi");
    c.tx_hpbw_deg = cfg.number("tx_hpbw_deg");
    c.rx_gain_v_dbi = cfg.number("rx_gain_v_dbi");
    c.rx_gain_h_dbi = cfg.number("rx_gain_h_dbi");
    c.rx_hpbw_deg = cfg.number("rx_hpbw_deg");
    c.tx_power_dbm = cfg.number_or("tx_power_dbm", c.tx_power_dbm);
    c.noise_floor_db = cfg.number("noise_floor_db");
    c.noise_speckle_db = cfg.number_or("noise_speckle_db", kNegInf);
    c.fft_size = cfg.uint32("fft_size");
    c.range_max_m = cfg.number("range_max_m");
    c.cal_rcs_dbsm = cfg.number_or("cal_rcs_dbsm", c.cal_rcs_dbsm);
    c.cal_range_m = cfg.number_or("cal_range_m", c.cal_range_m);
    cfg.reject_unknown();
    c.validate();

    detail::JsonObject grid(top.child("grid"), top.at("grid"));
    sc.grid.theta_start_deg = grid.number("theta_start_deg");
    sc.grid.theta_stop_deg = grid.number("theta_stop_deg");
    sc.grid.theta_step_deg = grid.number("theta_step_deg");
    sc.grid.phi_start_deg = grid.number("phi_start_deg");
    sc.grid.phi_stop_deg = grid.number("phi_stop_deg");
    sc.grid.phi_step_deg = grid.number("phi_step_deg");
    grid.reject_unknown();
    sc.grid.range_axis = RangeAxis::from_config(c);

    const auto& scatterers = top.child("scatterers");
    if (!scatterers.is_array())
        throw validation_error(top.at("scatterers") + ": expected an array");
    for (std::size_t i = 0; i < scatterers.size(); ++i) {
        const std::string path = top.at("scatterers") + "[" + std::to_string(i) + "]";
        detail::JsonObject so(scatterers[i], path);
        Scatterer s;
        s.id = so.string("id");
        const std::string kind = so.string("kind");
        s.position_m = so.vec3("position_m");
        if (kind == "sensor") {
            s.kind = ScattererKind::Sensor;
            s.state_on = detail::parse_matrix(so.child("on"), so.at("on"));
            s.state_off = detail::parse_matrix(so.child("off"), so.at("off"));
        } else if (kind == "clutter") {
            s.kind = ScattererKind::Clutter;
            s.state_off = detail::parse_matrix(so.child("matrix"), so.at("matrix"));
            s.state_on = s.state_off;
        } else {
            throw validation_error(so.at("kind") + ": must be 'sensor' or 'clutter'");
        }
        so.reject_unknown();
        sc.scatterers.push_back(std::move(s));
    }

    detail::JsonObject states(top.child("sensor_states"), top.at("sensor_states"));
    for (auto it = top.child("sensor_states").begin(); it != top.child("sensor_states").end(); ++it) {
        if (!it.value().is_string() || (it.value() != "ON" && it.value() != "OFF"))
            throw validation_error(top.at("sensor_states") + "." + it.key() +
                                   ": expected \"ON\" or \"OFF\"");
        sc.sensor_states[it.key()] = it.value() == "ON" ? SensorState::On : SensorState::Off;
    }

    top.reject_unknown();
    sc.validate();
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open scenario file '" + path + "'");
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw validation_error("scenario file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_scenario(root, path);
}

inline nlohmann::ordered_json scenario_to_json(const Scenario& sc) {
    nlohmann::ordered_json root;
    if (!sc.name.empty()) root["name"] = sc.name;
    const RadarConfig& c = sc.config;
    nlohmann::ordered_json cfg;
    cfg["carrier_frequency_hz"] = c.carrier_frequency_hz;
    cfg["bandwidth_hz"] = c.bandwidth_hz;
    cfg["chirp_duration_s"] = c.chirp_duration_s;
    cfg["tx_gain_dbi"] = c.tx_gain_dbi;
    cfg["tx_hpbw_deg"] = c.tx_hpbw_deg;
    cfg["rx_gain_v_dbi"] = c.rx_gain_v_dbi;
    cfg["rx_gain_h_dbi"] = c.rx_gain_h_dbi;
    cfg["rx_hpbw_deg"] = c.rx_hpbw_deg;
    cfg["tx_power_dbm"] = c.tx_power_dbm;
    cfg["noise_floor_db"] = c.noise_floor_db;
    if (!std::isinf(c.noise_speckle_db)) cfg["noise_speckle_db"] = c.noise_speckle_db;
    cfg["fft_size"] = c.fft_size;
    cfg["range_max_m"] = c.range_max_m;
    cfg["cal_rcs_dbsm"] = c.cal_rcs_dbsm;
    cfg["cal_range_m"] = c.cal_range_m;
    root["config"] = cfg;

    nlohmann::ordered_json grid;
    grid["theta_start_deg"] = sc.grid.theta_start_deg;
    grid["theta_stop_deg"] = sc.grid.theta_stop_deg;
    grid["theta_step_deg"] = sc.grid.theta_step_deg;
    grid["phi_start_deg"] = sc.grid.phi_start_deg;
    grid["phi_stop_deg"] = sc.grid.phi_stop_deg;
    grid["phi_step_deg"] = sc.grid.phi_step_deg;
    root["grid"] = grid;

    root["scatterers"] = nlohmann::ordered_json::array();
    for (const auto& s : sc.scatterers) {
        nlohmann::ordered_json js;
        js["id"] = s.id;
        js["kind"] = s.kind == ScattererKind::Sensor ? "sensor" : "clutter";
        js["position_m"] = {s.position_m.x, s.position_m.y, s.position_m.z};
        if (s.kind == ScattererKind::Sensor) {
            js["on"] = {{"s_vv", s.state_on.s_vv}, {"s_vh", s.state_on.s_vh}};
            js["off"] = {{"s_vv", s.state_off.s_vv}, {"s_vh", s.state_off.s_vh}};
        } else {
            js["matrix"] = {{"s_vv", s.state_off.s_vv}, {"s_vh", s.state_off.s_vh}};
        }
        root["scatterers"].push_back(js);
    }
    root["sensor_states"] = nlohmann::ordered_json::object();
    for (const auto& [id, st] : sc.sensor_states)
        root["sensor_states"][id] = st == SensorState::On ? "ON" : "OFF";
    return root;
}

inline void save_scenario(const Scenario& sc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw validation_error("cannot write scenario file '" + path + "'");
    out << scenario_to_json(sc).dump(2) << "\n";
}

} // namespace isoscan
