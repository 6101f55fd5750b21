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

#include "sb/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace sb::sim {

namespace {

constexpr double kShadingSolarCut = 0.7;  // fraction of solar blocked at 100 %

bool has_system(const SimConfig& c, const std::string& id)
{
    return std::any_of(c.systems.begin(), c.systems.end(), [&](const auto& s) { return s.id == id; });
}

bool has_zone(const SimConfig& c, const std::string& id)
{
    return std::any_of(c.zones.begin(), c.zones.end(), [&](const auto& z) { return z.id == id; });
}

std::set<std::string> facades(const SimConfig& c)
{
    std::set<std::string> out;
    for (const auto& z : c.zones)
        if (!z.facade.empty())
            out.insert(z.facade);
    return out;
}

}  // namespace

double DailyProfile::at(double hour_of_day) const noexcept
{
    for (const auto& b : blocks)
        if (hour_of_day >= b.start_hour && hour_of_day < b.end_hour)
            return b.value;
    return base;
}

void to_json(json& j, const DailyProfile& p) { j = json{{"base", p.base}, {"blocks", p.blocks}}; }

void from_json(const json& j, DailyProfile& p)
{
    if (j.is_number()) {
        p.base = j.get<double>();
        p.blocks.clear();
        return;
    }
    p.base = j.value("base", 0.0);
    p.blocks = j.value("blocks", std::vector<ScheduleEntry>{});
}

void to_json(json& j, const ZoneSpec& z)
{
    j = json{{"id", z.id},
             {"capacitance", z.capacitance},
             {"conductance", z.conductance},
             {"gains", z.gains},
             {"solar_aperture", z.solar_aperture},
             {"facade", z.facade},
             {"initial_temp", z.initial_temp},
             {"setpoint", z.setpoint},
             {"comfort_band", z.comfort_band}};
}

void from_json(const json& j, ZoneSpec& z)
{
    ZoneSpec d;
    z.id = j.at("id").get<std::string>();
    z.capacitance = j.value("capacitance", d.capacitance);
    z.conductance = j.value("conductance", d.conductance);
    z.gains = j.value("gains", DailyProfile{});
    z.solar_aperture = j.value("solar_aperture", 0.0);
    z.facade = j.value("facade", std::string{});
    z.initial_temp = j.value("initial_temp", d.initial_temp);
    z.setpoint = j.value("setpoint", d.setpoint);
    z.comfort_band = j.value("comfort_band", d.comfort_band);
}

double SystemSpec::coef(const std::string& name, double fallback) const
{
    const auto it = coefficients.find(name);
    return it == coefficients.end() ? fallback : it->second;
}

void to_json(json& j, const SystemSpec& s)
{
    j = json{{"id", s.id}, {"kind", s.kind}, {"capacity", s.capacity}, {"coefficients", s.coefficients}};
    if (s.kind == SystemKind::Auxiliary) {
        j["quantity"] = s.quantity;
        j["unit"] = s.unit;
    }
}

void from_json(const json& j, SystemSpec& s)
{
    s.id = j.at("id").get<std::string>();
    s.kind = j.at("kind").get<SystemKind>();
    s.capacity = j.value("capacity", 0.0);
    s.coefficients = j.value("coefficients", std::map<std::string, double>{});
    s.quantity = j.value("quantity", std::string{"power"});
    s.unit = j.value("unit", std::string{"kW"});
}

void to_json(json& j, const OutdoorModel& o)
{
    j = json{{"mean", o.mean},
             {"amplitude", o.amplitude},
             {"period_hours", o.period_hours},
             {"peak_hour", o.peak_hour},
             {"solar_peak", o.solar_peak}};
}

void from_json(const json& j, OutdoorModel& o)
{
    OutdoorModel d;
    o.mean = j.value("mean", d.mean);
    o.amplitude = j.value("amplitude", d.amplitude);
    o.period_hours = j.value("period_hours", d.period_hours);
    o.peak_hour = j.value("peak_hour", d.peak_hour);
    o.solar_peak = j.value("solar_peak", d.solar_peak);
}

void to_json(json& j, const PointOverride& p)
{
    j = json::object();
    if (p.cov_threshold)
        j["cov_threshold"] = *p.cov_threshold;
    if (p.noise_sigma)
        j["noise_sigma"] = *p.noise_sigma;
    if (p.range)
        j["range"] = *p.range;
}

void from_json(const json& j, PointOverride& p)
{
    if (j.contains("cov_threshold"))
        p.cov_threshold = j.at("cov_threshold").get<double>();
    if (j.contains("noise_sigma"))
        p.noise_sigma = j.at("noise_sigma").get<double>();
    if (j.contains("range"))
        p.range = j.at("range").get<Range>();
}

void to_json(json& j, const SimConfig& c)
{
    j = json{{"tick_seconds", c.tick_seconds},
             {"epoch_ms", c.epoch_ms},
             {"zones", c.zones},
             {"systems", c.systems},
             {"outdoor", c.outdoor},
             {"default_cov_threshold", c.default_cov_threshold},
             {"points", c.points},
             {"seed", c.seed},
             {"sensor_noise", c.sensor_noise}};
}

void from_json(const json& j, SimConfig& c)
{
    SimConfig d;
    c.tick_seconds = j.value("tick_seconds", d.tick_seconds);
    c.epoch_ms = j.value("epoch_ms", d.epoch_ms);
    c.zones = j.value("zones", std::vector<ZoneSpec>{});
    c.systems = j.value("systems", std::vector<SystemSpec>{});
    c.outdoor = j.value("outdoor", OutdoorModel{});
    c.default_cov_threshold = j.value("default_cov_threshold", d.default_cov_threshold);
    c.points = j.value("points", std::map<std::string, PointOverride>{});
    c.seed = j.value("seed", d.seed);
    c.sensor_noise = j.value("sensor_noise", false);
}

std::vector<std::string> SimConfig::validation_errors() const
{
    std::vector<std::string> errors;
    if (tick_seconds <= 0)
        errors.push_back("tick_seconds must be > 0");
    if (!(default_cov_threshold > 0))
        errors.push_back("default_cov_threshold must be > 0");
    std::set<std::string> ids;
    for (const auto& z : zones) {
        if (z.id.empty())
            errors.push_back("zone with empty id");
        if (!ids.insert(z.id).second)
            errors.push_back("duplicate id " + z.id);
        if (!(z.capacitance > 0))
            errors.push_back("zone " + z.id + ": capacitance must be > 0");
        if (!(z.conductance > 0))
            errors.push_back("zone " + z.id + ": conductance must be > 0");
        if (!(z.comfort_band.min < z.comfort_band.max))
            errors.push_back("zone " + z.id + ": comfort band must be non-empty");
    }
    int power_supplies = 0;
    for (const auto& s : systems) {
        if (s.id.empty())
            errors.push_back("system with empty id");
        if (!ids.insert(s.id).second)
            errors.push_back("duplicate id " + s.id);
        if (s.capacity < 0)
            errors.push_back("system " + s.id + ": capacity must be >= 0");
        if (s.kind == SystemKind::PowerSupply)
            ++power_supplies;
        if (s.kind == SystemKind::Weather || s.kind == SystemKind::Zone)
            errors.push_back("system " + s.id + ": Weather and Zone kinds are implicit");
    }
    if (power_supplies > 1)
        errors.push_back("at most one PowerSupply system is supported");
    if (!(outdoor.period_hours > 0))
        errors.push_back("outdoor.period_hours must be > 0");
    const auto catalog = point_catalog(*this);
    std::set<std::string> known;
    for (const auto& p : catalog)
        known.insert(p.point_id);
    for (const auto& [id, o] : points) {
        if (!known.count(id))
            errors.push_back("override for unknown point " + id);
        if (o.cov_threshold && !(*o.cov_threshold > 0))
            errors.push_back("point " + id + ": cov_threshold must be > 0");
        if (o.noise_sigma && *o.noise_sigma < 0)
            errors.push_back("point " + id + ": noise_sigma must be >= 0");
        if (o.range && !(o.range->min < o.range->max))
            errors.push_back("point " + id + ": range min must be < max");
    }
    return errors;
}

void SimConfig::validate() const
{
    const auto errors = validation_errors();
    if (errors.empty())
        return;
    std::string msg = "invalid SimConfig:";
    for (const auto& e : errors)
        msg += "\n  - " + e;
    throw ValidationError(msg);
}

void to_json(json& j, const PointInfo& p)
{
    j = json{{"point_id", p.point_id},         {"device_id", p.device_id},
             {"system_id", p.system_id},       {"system_kind", p.system_kind},
             {"unit", p.unit},                 {"range", p.range},
             {"cov_threshold", p.cov_threshold}, {"noise_sigma", p.noise_sigma},
             {"mains_powered", p.mains_powered}};
}

std::vector<PointInfo> point_catalog(const SimConfig& config)
{
    std::vector<PointInfo> out;
    auto add = [&](const std::string& system_id, SystemKind kind, const std::string& quantity,
                   const std::string& unit, Range range, bool mains = true) {
        PointInfo p;
        p.point_id = system_id + "." + quantity;
        p.device_id = "dev:" + p.point_id;
        p.system_id = system_id;
        p.system_kind = kind;
        p.unit = unit;
        p.range = range;
        p.cov_threshold = config.default_cov_threshold;
        p.mains_powered = mains;
        if (const auto it = config.points.find(p.point_id); it != config.points.end()) {
            if (it->second.cov_threshold)
                p.cov_threshold = *it->second.cov_threshold;
            if (it->second.noise_sigma)
                p.noise_sigma = *it->second.noise_sigma;
            if (it->second.range)
                p.range = *it->second.range;
        }
        out.push_back(std::move(p));
    };

    for (const auto& z : config.zones) {
        add(z.id, SystemKind::Zone, "temp", "degC", {10, 35});
        add(z.id, SystemKind::Zone, "setpoint", "degC", {16, 30});
        add(z.id, SystemKind::Zone, "hvac_load", "kWt", {-100, 100});
    }
    for (const auto& s : config.systems) {
        switch (s.kind) {
        case SystemKind::Chiller:
            add(s.id, s.kind, "supply_temp", "degC", {4, 15});
            add(s.id, s.kind, "power", "kW", {0, 300});
            add(s.id, s.kind, "pump_power", "kW", {0, 80});
            add(s.id, s.kind, "load", "kWt", {0, 900});
            add(s.id, s.kind, "cop", "COP", {1.5, 9});
            break;
        case SystemKind::Boiler:
            add(s.id, s.kind, "supply_temp", "degC", {40, 90});
            add(s.id, s.kind, "power", "kW", {0, 500});
            add(s.id, s.kind, "load", "kWt", {0, 480});
            break;
        case SystemKind::ShadingSystem:
            for (const auto& f : facades(config))
                add(s.id + "." + f, s.kind, "position", "%", {0, 100});
            break;
        case SystemKind::PowerSupply:
            add(s.id, s.kind, "voltage", "V", {207, 253}, false);
            add(s.id, s.kind, "frequency", "Hz", {49.5, 50.5}, false);
            add(s.id, s.kind, "power", "kW", {0, 1500}, false);
            break;
        case SystemKind::BackupGenerator:
            add(s.id, s.kind, "status", "state", {0, 1}, false);
            add(s.id, s.kind, "power", "kW", {0, 1500}, false);
            add(s.id, s.kind, "fuel", "%", {0, 100}, false);
            break;
        case SystemKind::Auxiliary:
            add(s.id, s.kind, s.quantity, s.unit, {0, std::max(1.0, s.coef("range_max", 100.0))});
            break;
        case SystemKind::Weather:
        case SystemKind::Zone:
            break;
        }
    }
    add("outdoor", SystemKind::Weather, "temp", "degC", {-40, 50}, false);
    add("outdoor", SystemKind::Weather, "solar", "W/m2", {0, 1400}, false);
    return out;
}

void to_json(json& j, const ScenarioEvent& e)
{
    j = json{{"tick", e.tick}, {"kind", e.kind}, {"target", e.target}, {"parameters", e.parameters}};
}

void from_json(const json& j, ScenarioEvent& e)
{
    e.tick = j.at("tick").get<Tick>();
    e.kind = j.at("kind").get<EventKind>();
    e.target = j.at("target").get<std::string>();
    e.parameters = j.value("parameters", json::object());
}

void to_json(json& j, const ScenarioScript& s) { j = json{{"events", s.events}}; }

void from_json(const json& j, ScenarioScript& s)
{
    s.events = j.value("events", std::vector<ScenarioEvent>{});
}

std::vector<std::string> ScenarioScript::validation_errors(const SimConfig& config) const
{
    std::vector<std::string> errors;
    std::set<std::string> points;
    for (const auto& p : point_catalog(config))
        points.insert(p.point_id);
    Tick prev = std::numeric_limits<Tick>::min();
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        const std::string where = "scenario event " + std::to_string(i) + ": ";
        if (e.tick < 0)
            errors.push_back(where + "tick must be >= 0");
        if (e.tick < prev)
            errors.push_back(where + "ticks must be nondecreasing");
        prev = e.tick;
        const bool target_ok = points.count(e.target) || has_system(config, e.target) ||
                               has_zone(config, e.target) || e.target == "outdoor" ||
                               e.target == "building";
        if (!target_ok)
            errors.push_back(where + "unknown target " + e.target);
        if (e.kind == EventKind::FaultInjection) {
            const auto mode = e.parameters.value("mode", std::string{});
            if (mode != "bias" && mode != "stuck" && mode != "outage")
                errors.push_back(where + "fault mode must be bias, stuck or outage");
            if ((mode == "bias" || mode == "stuck") && !points.count(e.target))
                errors.push_back(where + mode + " requires a point target");
            if (mode == "outage" && !has_system(config, e.target))
                errors.push_back(where + "outage requires a system target");
        }
        if (e.kind == EventKind::DriftInjection) {
            if (!e.parameters.contains("coefficient"))
                errors.push_back(where + "drift requires a coefficient");
            if (!e.parameters.contains("factor") && !e.parameters.contains("delta"))
                errors.push_back(where + "drift requires factor or delta");
        }
    }
    return errors;
}

double schedule_value(const std::vector<ScheduleEntry>& schedule, double hour, double fallback)
{
    for (const auto& e : schedule)
        if (hour >= e.start_hour && hour < e.end_hour)
            return e.value;
    return fallback;
}

SimWorld::SimWorld(SimConfig config, ScenarioScript scenario)
    : config_(std::move(config)), scenario_(std::move(scenario)), rng_(config_.seed)
{
    config_.validate();
    if (const auto errors = scenario_.validation_errors(config_); !errors.empty()) {
        std::string msg = "invalid ScenarioScript:";
        for (const auto& e : errors)
            msg += "\n  - " + e;
        throw ValidationError(msg);
    }
    catalog_ = point_catalog(config_);
    emit_state_.resize(catalog_.size());
    for (const auto& z : config_.zones)
        zones_.push_back({z.initial_temp, z.setpoint, 0.0});
    if (const auto* ch = find_system(SystemKind::Chiller))
        plant_.chiller_setpoint = ch->coef("setpoint", 7.0);
    if (const auto* b = find_system(SystemKind::Boiler))
        plant_.boiler_setpoint = b->coef("setpoint", 70.0);
    if (const auto* sh = find_system(SystemKind::ShadingSystem))
        for (const auto& f : facades(config_)) {
            shading_positions_[f] = sh->coef("default_position", 50.0);
            shading_previous_[f] = shading_positions_[f];
        }
    plant_.chiller_supply_temp = plant_.chiller_setpoint;
}

const SystemSpec* SimWorld::find_system(SystemKind kind) const
{
    for (const auto& s : config_.systems)
        if (s.kind == kind)
            return &s;
    return nullptr;
}

SystemSpec* SimWorld::find_system(SystemKind kind)
{
    for (auto& s : config_.systems)
        if (s.kind == kind)
            return &s;
    return nullptr;
}

TimestampMs SimWorld::now_ms() const noexcept
{
    return config_.epoch_ms + tick_ * static_cast<TimestampMs>(config_.tick_seconds) * 1000;
}

double SimWorld::hour_of_day(Tick t) const noexcept
{
    const auto seconds = config_.epoch_ms / 1000 + t * config_.tick_seconds;
    const auto day_seconds = ((seconds % 86400) + 86400) % 86400;
    return static_cast<double>(day_seconds) / 3600.0;
}

void SimWorld::set_noise_sigma(const std::string& point_id, double sigma)
{
    for (auto& p : catalog_)
        if (p.point_id == point_id)
            p.noise_sigma = sigma;
    config_.points[point_id].noise_sigma = sigma;
}

void SimWorld::set_comfort_band(const std::string& zone_id, Range band)
{
    for (auto& z : config_.zones)
        if (z.id == zone_id) {
            z.comfort_band = band;
            return;
        }
    throw NotFoundError("no zone " + zone_id);
}

std::pair<SimWorld, std::vector<SensorMessage>> step(SimWorld world,
                                                     const std::vector<ActuatorCommand>& commands)
{
    auto result = world.step(commands);
    return {std::move(world), std::move(result.messages)};
}

StepResult SimWorld::step(const std::vector<ActuatorCommand>& commands)
{
    StepResult result;
    while (next_event_ < scenario_.events.size() && scenario_.events[next_event_].tick <= tick_) {
        auto w = inject(scenario_.events[next_event_]);
        result.warnings.insert(result.warnings.end(), w.begin(), w.end());
        ++next_event_;
    }
    for (const auto& cmd : commands) {
        try {
            apply_command(cmd);
        } catch (const RejectedError& e) {
            result.rejected.emplace_back(e.what());
        }
    }
    physics();
    if (emit_)
        emit(result.messages);
    ++tick_;
    return result;
}

void SimWorld::apply_command(const ActuatorCommand& cmd)
{
    const auto reject = [&](const std::string& why) {
        throw RejectedError("command " + cmd.command_id + " to " + cmd.actuator_id + " rejected: " + why);
    };
    for (std::size_t i = 0; i < config_.zones.size(); ++i) {
        if (config_.zones[i].id != cmd.actuator_id)
            continue;
        if (cmd.verb != "set_setpoint" || !cmd.value)
            reject("zones accept set_setpoint with a value");
        zones_[i].setpoint = *cmd.value;
        return;
    }
    for (const auto& s : config_.systems) {
        if (s.kind == SystemKind::ShadingSystem) {
            for (auto& [facade, pos] : shading_positions_) {
                if (cmd.actuator_id != s.id + "." + facade)
                    continue;
                if (cmd.verb != "set_position" || !cmd.value)
                    reject("shading accepts set_position with a value");
                pos = std::clamp(*cmd.value, 0.0, 100.0);
                return;
            }
        }
        if (s.id != cmd.actuator_id)
            continue;
        switch (s.kind) {
        case SystemKind::Chiller:
            if (cmd.verb == "set_setpoint" && cmd.value) {
                plant_.chiller_setpoint = *cmd.value;
                chiller_schedule_.clear();
                return;
            }
            if (cmd.verb == "set_schedule" && !cmd.schedule.empty()) {
                chiller_schedule_ = cmd.schedule;
                return;
            }
            reject("chiller accepts set_setpoint or set_schedule");
            break;
        case SystemKind::Boiler:
            if (cmd.verb == "set_setpoint" && cmd.value) {
                plant_.boiler_setpoint = *cmd.value;
                return;
            }
            reject("boiler accepts set_setpoint");
            break;
        case SystemKind::BackupGenerator: {
            const bool broken = std::any_of(active_.begin(), active_.end(), [&](const auto& a) {
                return a.event.kind == EventKind::FaultInjection && a.event.target == s.id;
            });
            if (cmd.verb == "start") {
                if (broken)
                    reject("generator is out of service");
                plant_.generator_running = plant_.generator_fuel_pct > 0;
                return;
            }
            if (cmd.verb == "stop") {
                plant_.generator_running = false;
                return;
            }
            reject("generator accepts exactly start and stop");
            break;
        }
        default:
            reject("system has no actuators");
        }
    }
    reject("unknown actuator");
}

double& SimWorld::coefficient_ref(const std::string& target, const std::string& name)
{
    if (target == "outdoor") {
        if (name == "mean")
            return outdoor_shift_;
        if (name == "amplitude")
            return config_.outdoor.amplitude;
        throw ValidationError("unknown outdoor coefficient " + name);
    }
    if (target == "building") {
        if (name == "gains_factor")
            return gains_factor_;
        throw ValidationError("unknown building coefficient " + name);
    }
    for (auto& z : config_.zones) {
        if (z.id != target)
            continue;
        if (name == "conductance")
            return z.conductance;
        if (name == "capacitance")
            return z.capacitance;
        if (name == "solar_aperture")
            return z.solar_aperture;
        throw ValidationError("unknown zone coefficient " + name);
    }
    for (auto& s : config_.systems) {
        if (s.id != target)
            continue;
        if (name == "capacity")
            return s.capacity;
        auto [it, inserted] = s.coefficients.try_emplace(name, 0.0);
        if (inserted && name.ends_with("_factor"))
            it->second = 1.0;
        return it->second;
    }
    throw ValidationError("no coefficient " + name + " on " + target);
}

std::vector<std::string> SimWorld::inject(const ScenarioEvent& event)
{
    std::vector<std::string> warnings;
    switch (event.kind) {
    case EventKind::FaultInjection:
        active_.push_back({event, 0.0});
        break;
    case EventKind::DriftInjection: {
        const auto name = event.parameters.at("coefficient").get<std::string>();
        double& c = coefficient_ref(event.target, name);
        const double before = c;
        if (event.parameters.contains("factor"))
            c *= event.parameters.at("factor").get<double>();
        else
            c += event.parameters.at("delta").get<double>();
        active_.push_back({event, before});
        break;
    }
    case EventKind::Repair: {
        const auto kind_filter = event.parameters.value("kind", std::string{});
        auto it = std::find_if(active_.rbegin(), active_.rend(), [&](const ActiveInjection& a) {
            if (a.event.target != event.target)
                return false;
            if (kind_filter.empty())
                return true;
            return json(a.event.kind).get<std::string>() == kind_filter;
        });
        if (it == active_.rend()) {
            warnings.push_back("repair of " + event.target + " at tick " + std::to_string(event.tick) +
                               " matches no active injection");
            break;
        }
        if (it->event.kind == EventKind::DriftInjection)
            coefficient_ref(it->event.target, it->event.parameters.at("coefficient").get<std::string>()) =
                it->previous;
        active_.erase(std::next(it).base());
        break;
    }
    }
    return warnings;
}

void SimWorld::physics()
{
    const double dt = config_.tick_seconds;
    const double hour = hour_of_day(tick_);
    const auto& out = config_.outdoor;
    const double outdoor_mean = out.mean + outdoor_shift_;
    plant_.outdoor_temp =
        outdoor_mean + out.amplitude * std::sin(2.0 * std::numbers::pi * (hour - out.peak_hour) / out.period_hours +
                                                std::numbers::pi / 2.0);
    plant_.solar = (hour >= 6.0 && hour < 18.0) ? out.solar_peak * std::sin(std::numbers::pi * (hour - 6.0) / 12.0)
                                                : 0.0;

    const auto outage = [&](const std::string& id) {
        return std::any_of(active_.begin(), active_.end(), [&](const ActiveInjection& a) {
            return a.event.kind == EventKind::FaultInjection && a.event.target == id &&
                   a.event.parameters.value("mode", std::string{}) == "outage";
        });
    };

    const SystemSpec* mains = find_system(SystemKind::PowerSupply);
    const SystemSpec* chiller = find_system(SystemKind::Chiller);
    const SystemSpec* boiler = find_system(SystemKind::Boiler);
    const SystemSpec* shading = find_system(SystemKind::ShadingSystem);
    const SystemSpec* generator = find_system(SystemKind::BackupGenerator);

    plant_.mains_ok = !(mains && outage(mains->id));
    if (generator && outage(generator->id))
        plant_.generator_running = false;
    const bool powered = plant_.mains_ok || plant_.generator_running;

    // Supply temperature follows the active schedule entry.
    plant_.chiller_supply_temp = schedule_value(chiller_schedule_, hour, plant_.chiller_setpoint);
    const double t_sup = plant_.chiller_supply_temp;

    double chiller_capacity = 0.0;
    if (chiller && powered && !outage(chiller->id)) {
        chiller_capacity = chiller->capacity * chiller->coef("capacity_factor", 1.0) *
                           (1.0 + chiller->coef("capacity_slope", 0.0) * (t_sup - chiller->coef("rated_supply", 7.0)));
        chiller_capacity = std::max(0.0, chiller_capacity);
    }
    double boiler_capacity = 0.0;
    if (boiler && powered && !outage(boiler->id))
        boiler_capacity = boiler->capacity * boiler->coef("capacity_factor", 1.0);

    // Each zone requests the heat flow that would land it on its setpoint
    // this tick; the plant delivers in proportion to its capacity.
    std::vector<double> gains(zones_.size()), request(zones_.size());
    double cool_total = 0.0, heat_total = 0.0;
    for (std::size_t i = 0; i < zones_.size(); ++i) {
        const auto& spec = config_.zones[i];
        double shade = 0.0;
        if (!spec.facade.empty() && shading_positions_.count(spec.facade))
            shade = shading_positions_.at(spec.facade) / 100.0;
        gains[i] = gains_factor_ * spec.gains.at(hour) +
                   plant_.solar * spec.solar_aperture * (1.0 - kShadingSolarCut * shade);
        const double t = zones_[i].temp;
        request[i] = spec.conductance * (plant_.outdoor_temp - t) + gains[i] +
                     spec.capacitance / dt * (t - zones_[i].setpoint);
        if (request[i] > 0)
            cool_total += request[i] / 1000.0;
        else
            heat_total += -request[i] / 1000.0;
    }
    const double cool_frac = cool_total > 0 ? std::min(1.0, chiller_capacity / cool_total) : 0.0;
    const double heat_frac = heat_total > 0 ? std::min(1.0, boiler_capacity / heat_total) : 0.0;

    double cooled = 0.0, heated = 0.0;
    for (std::size_t i = 0; i < zones_.size(); ++i) {
        const auto& spec = config_.zones[i];
        double cooling = 0.0, heating = 0.0;
        if (request[i] > 0)
            cooling = request[i] * cool_frac;
        else
            heating = -request[i] * heat_frac;
        auto& z = zones_[i];
        z.temp += dt / spec.capacitance *
                  (spec.conductance * (plant_.outdoor_temp - z.temp) + gains[i] - cooling + heating);
        z.hvac_load_kw = (cooling - heating) / 1000.0;
        cooled += cooling / 1000.0;
        heated += heating / 1000.0;
        if (!std::isfinite(z.temp))
            throw SimulationFault("zone " + spec.id + " temperature became non-finite at tick " +
                                  std::to_string(tick_));
    }

    plant_.chiller_load_kw = cooled;
    plant_.chiller_power_kw = 0.0;
    plant_.pump_power_kw = 0.0;
    if (chiller) {
        const double t_ret = chiller->coef("return_temp", 14.0);
        plant_.chiller_cop = chiller->coef("cop_factor", 1.0) *
                             (chiller->coef("cop_c0", 3.5) + chiller->coef("cop_c1", 0.2) * t_sup +
                              chiller->coef("cop_c2", -0.05) * plant_.outdoor_temp);
        double free_fraction = 0.0;
        if (chiller->coef("economizer", 0.0) > 0 && t_ret > t_sup) {
            free_fraction = (t_ret - (plant_.outdoor_temp + chiller->coef("economizer_approach", 2.0))) /
                            (t_ret - t_sup);
            free_fraction = std::clamp(free_fraction, 0.0, 1.0);
        }
        if (cooled > 0) {
            plant_.chiller_power_kw = cooled * (1.0 - free_fraction) / std::max(plant_.chiller_cop, 0.1);
            const double flow = cooled / std::max(t_ret - t_sup, 0.5);
            plant_.pump_power_kw = chiller->coef("pump_k", 0.0) * flow * flow;
        }
    }

    plant_.boiler_load_kw = heated;
    plant_.boiler_power_kw = 0.0;
    if (boiler && heated > 0) {
        const double eff =
            boiler->coef("eff_e0", 0.95) - boiler->coef("eff_e1", 0.002) * (plant_.boiler_setpoint - 60.0);
        plant_.boiler_power_kw = heated / std::max(eff, 0.1);
    }

    const bool occupied_hours = mains && hour >= mains->coef("occupied_start", 8.0) &&
                                hour < mains->coef("occupied_end", 18.0);
    plant_.base_power_kw = 0.0;
    if (mains && powered)
        plant_.base_power_kw =
            occupied_hours ? mains->coef("base_occupied_kw", 0.0) : mains->coef("base_unoccupied_kw", 0.0);

    plant_.aux_power_kw = 0.0;
    for (const auto& s : config_.systems)
        if (s.kind == SystemKind::Auxiliary && s.unit == "kW" && powered && !outage(s.id))
            plant_.aux_power_kw += occupied_hours ? s.coef("occupied", 0.0) : s.coef("unoccupied", 0.0);

    plant_.shading_power_kw = 0.0;
    if (shading && powered) {
        for (const auto& [facade, pos] : shading_positions_) {
            if (pos != shading_previous_[facade])
                plant_.shading_power_kw += shading->coef("motor_kw", 0.2);
            shading_previous_[facade] = pos;
        }
    }

    const double components = plant_.chiller_power_kw + plant_.pump_power_kw + plant_.boiler_power_kw +
                              plant_.base_power_kw + plant_.aux_power_kw + plant_.shading_power_kw;
    plant_.building_power_kw = plant_.mains_ok ? components : 0.0;
    plant_.generator_power_kw = (!plant_.mains_ok && plant_.generator_running) ? components : 0.0;
    if (generator && plant_.generator_power_kw > 0) {
        const double fuel_kwh = std::max(generator->coef("fuel_kwh", 10000.0), 1.0);
        plant_.generator_fuel_pct =
            std::max(0.0, plant_.generator_fuel_pct - plant_.generator_power_kw * dt / 3600.0 / fuel_kwh * 100.0);
        if (plant_.generator_fuel_pct <= 0)
            plant_.generator_running = false;
    }

    const double hours = dt / 3600.0;
    energy_.meter_kwh += (plant_.building_power_kw + plant_.generator_power_kw) * hours;
    energy_.component_kwh += plant_.chiller_power_kw * hours + plant_.pump_power_kw * hours +
                             plant_.boiler_power_kw * hours + plant_.base_power_kw * hours +
                             plant_.aux_power_kw * hours + plant_.shading_power_kw * hours;
    energy_.hvac_kwh += (plant_.chiller_power_kw + plant_.pump_power_kw + plant_.boiler_power_kw) * hours;
    energy_.chiller_plant_kwh += (plant_.chiller_power_kw + plant_.pump_power_kw) * hours;
}

std::optional<double> SimWorld::true_value(const std::string& point_id) const
{
    for (std::size_t i = 0; i < config_.zones.size(); ++i) {
        const auto& id = config_.zones[i].id;
        if (point_id == id + ".temp")
            return zones_[i].temp;
        if (point_id == id + ".setpoint")
            return zones_[i].setpoint;
        if (point_id == id + ".hvac_load")
            return zones_[i].hvac_load_kw;
    }
    if (point_id == "outdoor.temp")
        return plant_.outdoor_temp;
    if (point_id == "outdoor.solar")
        return plant_.solar;
    const double hour = hour_of_day(tick_ > 0 ? tick_ - 1 : 0);
    for (const auto& s : config_.systems) {
        const auto is = [&](const char* q) { return point_id == s.id + "." + q; };
        switch (s.kind) {
        case SystemKind::Chiller:
            if (is("supply_temp"))
                return plant_.chiller_supply_temp;
            if (is("power"))
                return plant_.chiller_power_kw;
            if (is("pump_power"))
                return plant_.pump_power_kw;
            if (is("load"))
                return plant_.chiller_load_kw;
            if (is("cop"))
                return plant_.chiller_cop;
            break;
        case SystemKind::Boiler:
            if (is("supply_temp"))
                return plant_.boiler_setpoint;
            if (is("power"))
                return plant_.boiler_power_kw;
            if (is("load"))
                return plant_.boiler_load_kw;
            break;
        case SystemKind::ShadingSystem:
            for (const auto& [facade, pos] : shading_positions_)
                if (point_id == s.id + "." + facade + ".position")
                    return pos;
            break;
        case SystemKind::PowerSupply:
            if (is("voltage"))
                return plant_.mains_ok ? s.coef("nominal_voltage", 230.0) : 0.0;
            if (is("frequency"))
                return plant_.mains_ok ? s.coef("nominal_frequency", 50.0) : 0.0;
            if (is("power"))
                return plant_.building_power_kw;
            break;
        case SystemKind::BackupGenerator:
            if (is("status"))
                return plant_.generator_running ? 1.0 : 0.0;
            if (is("power"))
                return plant_.generator_power_kw;
            if (is("fuel"))
                return plant_.generator_fuel_pct;
            break;
        case SystemKind::Auxiliary:
            if (point_id == s.id + "." + s.quantity) {
                const auto* mains = find_system(SystemKind::PowerSupply);
                const bool occupied = mains && hour >= mains->coef("occupied_start", 8.0) &&
                                      hour < mains->coef("occupied_end", 18.0);
                const bool powered = plant_.mains_ok || plant_.generator_running;
                if (s.unit == "kW" && !powered)
                    return 0.0;
                return occupied ? s.coef("occupied", 0.0) : s.coef("unoccupied", 0.0);
            }
            break;
        case SystemKind::Weather:
        case SystemKind::Zone:
            break;
        }
    }
    return std::nullopt;
}

double SimWorld::reading(const PointInfo& p) const
{
    double v = true_value(p.point_id).value_or(0.0);
    for (const auto& a : active_) {
        if (a.event.kind != EventKind::FaultInjection || a.event.target != p.point_id)
            continue;
        const auto mode = a.event.parameters.value("mode", std::string{});
        if (mode == "bias")
            v += a.event.parameters.value("offset", 0.0);
        else if (mode == "stuck")
            v = a.event.parameters.value("value", v);
    }
    return v;
}

void SimWorld::emit(std::vector<SensorMessage>& out)
{
    const bool powered = plant_.mains_ok || plant_.generator_running;
    const TimestampMs ts = now_ms();
    for (std::size_t i = 0; i < catalog_.size(); ++i) {
        const auto& p = catalog_[i];
        double v = reading(p);
        if (config_.sensor_noise && p.noise_sigma > 0) {
            std::normal_distribution<double> noise(0.0, p.noise_sigma);
            const double noisy = v + noise(rng_);
            // transmitter span: noise alone never carries an in-range reading out
            v = p.range.contains(v) ? std::clamp(noisy, p.range.min, p.range.max) : noisy;
        }
        const Quality q = (p.mains_powered && !powered) ? Quality::Suspect : Quality::Good;
        auto& st = emit_state_[i];
        const bool changed = !st.emitted || std::abs(v - st.last_value) >= p.cov_threshold || q != st.last_quality;
        if (!changed)
            continue;
        st.emitted = true;
        st.last_value = v;
        st.last_quality = q;
        ++st.seq_no;
        out.push_back(SensorMessage{p.device_id, p.point_id, ts, st.seq_no, v, p.unit, q, Source::Native});
    }
}

}  // namespace sb::sim
