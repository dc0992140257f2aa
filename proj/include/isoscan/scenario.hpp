#pragma once

#include <map>
#include <string>
#include <vector>

#include "isoscan/scan_grid.hpp"
#include "isoscan/scene.hpp"

namespace isoscan {

/// One interrogation campaign: the reader config, the scan raster, the scene,
/// and the state each sensor is in for this run.
struct Scenario {
    std::string name;
    RadarConfig config;
    ScanGrid grid;
    std::vector<Scatterer> scatterers;
    std::map<std::string, SensorState> sensor_states;

    SensorState state_of(const Scatterer& s) const {
        if (s.kind == ScattererKind::Clutter) return SensorState::Off;
        return sensor_states.at(s.id);
    }

    std::vector<const Scatterer*> sensors() const {
        std::vector<const Scatterer*> out;
        for (const auto& s : scatterers)
            if (s.kind == ScattererKind::Sensor) out.push_back(&s);
        return out;
    }

    void validate() const {
        config.validate();
        grid.validate();
        std::map<std::string, int> seen;
        for (const auto& s : scatterers) {
            s.validate();
            if (++seen[s.id] > 1) throw validation_error("duplicate scatterer id '" + s.id + "'");
            if (s.position_m.norm() > config.range_max_m)
                throw validation_error("scatterer '" + s.id + "' beyond config.range_max_m");
            if (s.kind == ScattererKind::Sensor) {
                if (!sensor_states.count(s.id))
                    throw validation_error("sensor '" + s.id + "' missing from sensor_states");
            } else if (sensor_states.count(s.id)) {
                throw validation_error("clutter '" + s.id + "' must not appear in sensor_states");
            }
        }
        for (const auto& [id, _] : sensor_states)
            if (!seen.count(id))
                throw validation_error("sensor_states names unknown scatterer '" + id + "'");
    }
};

} // namespace isoscan
