// Copyright 2026 The smartbuilding Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sb/common.hpp"
#include "sb/message.hpp"

/// Discrete-time simulated building: equipment, sensors, actuators and the
/// fabric that carries their change-of-value readings.
namespace sb::sim {

enum class SystemKind { Chiller, Boiler, ShadingSystem, PowerSupply, BackupGenerator, Auxiliary, Weather, Zone };

NLOHMANN_JSON_SERIALIZE_ENUM(SystemKind, {{SystemKind::Chiller, "Chiller"},
                                          {SystemKind::Boiler, "Boiler"},
                                          {SystemKind::ShadingSystem, "ShadingSystem"},
                                          {SystemKind::PowerSupply, "PowerSupply"},
                                          {SystemKind::BackupGenerator, "BackupGenerator"},
                                          {SystemKind::Auxiliary, "Auxiliary"},
                                          {SystemKind::Weather, "Weather"},
                                          {SystemKind::Zone, "Zone"}})

/// Piecewise-constant daily profile; hours not covered by any block use
/// `base`.
struct DailyProfile {
    double base = 0.0;
    std::vector<ScheduleEntry> blocks;

    [[nodiscard]] double at(double hour_of_day) const noexcept;
};

void to_json(json& j, const DailyProfile& p);
void from_json(const json& j, DailyProfile& p);

struct ZoneSpec {
    std::string id;
    double capacitance = 1e7;   // J/K
    double conductance = 400;   // W/K
    DailyProfile gains;         // W
    double solar_aperture = 0;  // m^2 of effective glazing
    std::string facade;         // shading group id, empty for none
    double initial_temp = 23.0;
    double setpoint = 23.0;
    Range comfort_band{21.0, 25.0};
};

void to_json(json& j, const ZoneSpec& z);
void from_json(const json& j, ZoneSpec& z);

/// One building-equipment system. Coefficients are kind specific, see
/// the reference building for the full set.
struct SystemSpec {
    std::string id;
    SystemKind kind = SystemKind::Auxiliary;
    double capacity = 0.0;  // kW
    std::map<std::string, double> coefficients;
    /// Auxiliary systems only: emitted quantity name and unit.
    std::string quantity = "power";
    std::string unit = "kW";

    [[nodiscard]] double coef(const std::string& name, double fallback = 0.0) const;
};

void to_json(json& j, const SystemSpec& s);
void from_json(const json& j, SystemSpec& s);

struct OutdoorModel {
    double mean = 26.0;
    double amplitude = 5.0;
    double period_hours = 24.0;
    double peak_hour = 15.0;
    double solar_peak = 800.0;  // W/m^2 at solar noon
};

void to_json(json& j, const OutdoorModel& o);
void from_json(const json& j, OutdoorModel& o);

/// Per-point overrides layered on the derived defaults.
struct PointOverride {
    std::optional<double> cov_threshold;
    std::optional<double> noise_sigma;
    std::optional<Range> range;
};

void to_json(json& j, const PointOverride& p);
void from_json(const json& j, PointOverride& p);

struct SimConfig {
    int tick_seconds = 60;
    TimestampMs epoch_ms = 1767225600000;  // midnight UTC
    std::vector<ZoneSpec> zones;
    std::vector<SystemSpec> systems;
    OutdoorModel outdoor;
    double default_cov_threshold = 0.1;
    std::map<std::string, PointOverride> points;
    std::uint64_t seed = 1;
    bool sensor_noise = false;

    /// Returns every invariant violation; empty when valid.
    [[nodiscard]] std::vector<std::string> validation_errors() const;
    void validate() const;
};

void to_json(json& j, const SimConfig& c);
void from_json(const json& j, SimConfig& c);

/// Static description of one emitted point: what a manufacturer catalogue
/// or nameplate would carry.
struct PointInfo {
    std::string point_id;
    std::string device_id;
    std::string system_id;
    SystemKind system_kind = SystemKind::Auxiliary;
    std::string unit;
    Range range;
    double cov_threshold = 0.1;
    double noise_sigma = 0.0;
    bool mains_powered = true;
};

void to_json(json& j, const PointInfo& p);

/// The points the configured building emits, in emission order.
std::vector<PointInfo> point_catalog(const SimConfig& config);

enum class EventKind { FaultInjection, DriftInjection, Repair };

NLOHMANN_JSON_SERIALIZE_ENUM(EventKind, {{EventKind::FaultInjection, "FaultInjection"},
                                         {EventKind::DriftInjection, "DriftInjection"},
                                         {EventKind::Repair, "Repair"}})

/// Parameters:
///  FaultInjection on a point: {"mode":"bias","offset":x} or {"mode":"stuck","value":x}
///  FaultInjection on a system: {"mode":"outage"}
///  DriftInjection: {"coefficient":name,"factor":f} or {"coefficient":name,"delta":d}
///  Repair: optional {"kind":"FaultInjection"|"DriftInjection"}
struct ScenarioEvent {
    Tick tick = 0;
    EventKind kind = EventKind::FaultInjection;
    std::string target;
    json parameters = json::object();
};

void to_json(json& j, const ScenarioEvent& e);
void from_json(const json& j, ScenarioEvent& e);

struct ScenarioScript {
    std::vector<ScenarioEvent> events;

    [[nodiscard]] std::vector<std::string> validation_errors(const SimConfig& config) const;
};

void to_json(json& j, const ScenarioScript& s);
void from_json(const json& j, ScenarioScript& s);

struct ZoneState {
    double temp = 23.0;
    double setpoint = 23.0;
    double hvac_load_kw = 0.0;  // + cooling, - heating
};

struct ActiveInjection {
    ScenarioEvent event;
    double previous = 0.0;  // coefficient value before a drift
};

/// Ground-truth plant state after the last step.
struct PlantState {
    double outdoor_temp = 0.0;
    double solar = 0.0;
    double chiller_setpoint = 7.0;
    double chiller_supply_temp = 7.0;
    double chiller_load_kw = 0.0;
    double chiller_power_kw = 0.0;
    double pump_power_kw = 0.0;
    double chiller_cop = 0.0;
    double boiler_setpoint = 70.0;
    double boiler_load_kw = 0.0;
    double boiler_power_kw = 0.0;
    double base_power_kw = 0.0;
    double aux_power_kw = 0.0;
    double shading_power_kw = 0.0;
    double building_power_kw = 0.0;   // mains meter
    double generator_power_kw = 0.0;
    bool mains_ok = true;
    bool generator_running = false;
    double generator_fuel_pct = 100.0;
};

struct EnergyAccount {
    double meter_kwh = 0.0;      // integrated meter readings (mains + generator)
    double component_kwh = 0.0;  // integrated sum of component powers
    double hvac_kwh = 0.0;       // chiller, pump and boiler
    double chiller_plant_kwh = 0.0;
};

struct StepResult {
    std::vector<SensorMessage> messages;
    std::vector<std::string> rejected;  // one entry per rejected command
    std::vector<std::string> warnings;
};

class SimWorld {
public:
    explicit SimWorld(SimConfig config, ScenarioScript scenario = {});

    /// Advances one tick: scheduled scenario events, then commands, then
    /// physics, then change-of-value emission.
    StepResult step(const std::vector<ActuatorCommand>& commands);

    /// Applies one scenario entry immediately. Returns warnings (e.g. a
    /// repair with nothing to repair).
    std::vector<std::string> inject(const ScenarioEvent& event);

    [[nodiscard]] Tick tick() const noexcept { return tick_; }
    [[nodiscard]] TimestampMs now_ms() const noexcept;
    [[nodiscard]] double hour_of_day(Tick t) const noexcept;
    [[nodiscard]] const SimConfig& config() const noexcept { return config_; }
    [[nodiscard]] const std::vector<ZoneState>& zones() const noexcept { return zones_; }
    [[nodiscard]] const PlantState& plant() const noexcept { return plant_; }
    [[nodiscard]] const EnergyAccount& energy() const noexcept { return energy_; }
    [[nodiscard]] const std::vector<PointInfo>& catalog() const noexcept { return catalog_; }
    [[nodiscard]] const std::vector<ActiveInjection>& active_injections() const noexcept
    {
        return active_;
    }
    [[nodiscard]] std::vector<ScheduleEntry> chiller_schedule() const { return chiller_schedule_; }
    /// Ground truth value of a point (no bias, noise or quantization).
    [[nodiscard]] std::optional<double> true_value(const std::string& point_id) const;

    /// Drops scenario events not yet applied; evaluation clones must not
    /// see the future.
    void forget_scenario() noexcept { next_event_ = scenario_.events.size(); }
    /// Disables sensor emission; used by evaluation clones.
    void set_emit(bool emit) noexcept { emit_ = emit; }
    void set_sensor_noise(bool enabled) noexcept { config_.sensor_noise = enabled; }
    void set_noise_sigma(const std::string& point_id, double sigma);
    /// Throws NotFoundError for an unknown zone.
    void set_comfort_band(const std::string& zone_id, Range band);

private:
    void apply_command(const ActuatorCommand& cmd);
    void physics();
    void emit(std::vector<SensorMessage>& out);
    double reading(const PointInfo& p) const;
    double& coefficient_ref(const std::string& target, const std::string& name);
    const SystemSpec* find_system(SystemKind kind) const;
    SystemSpec* find_system(SystemKind kind);

    SimConfig config_;
    ScenarioScript scenario_;
    std::size_t next_event_ = 0;
    Tick tick_ = 0;
    std::vector<ZoneState> zones_;
    PlantState plant_;
    EnergyAccount energy_;
    std::vector<PointInfo> catalog_;
    std::vector<ActiveInjection> active_;
    std::vector<ScheduleEntry> chiller_schedule_;
    std::map<std::string, double> shading_positions_;
    std::map<std::string, double> shading_previous_;
    double gains_factor_ = 1.0;
    double outdoor_shift_ = 0.0;

    struct EmitState {
        bool emitted = false;
        double last_value = 0.0;
        Quality last_quality = Quality::Good;
        std::int64_t seq_no = 0;
    };
    std::vector<EmitState> emit_state_;
    std::mt19937_64 rng_;
    bool emit_ = true;
};

/// Functional form: copies the world, advances it and returns both.
std::pair<SimWorld, std::vector<SensorMessage>> step(SimWorld world,
                                                     const std::vector<ActuatorCommand>& commands);

/// Reads a schedule value for an hour of day; falls back when no entry covers it.
double schedule_value(const std::vector<ScheduleEntry>& schedule, double hour, double fallback);

}  // namespace sb::sim
