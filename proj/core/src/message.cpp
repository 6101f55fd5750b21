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

#include "sb/message.hpp"

#include <cmath>

namespace sb {

void to_json(json& j, const SensorMessage& m)
{
    j = json{{"device_id", m.device_id}, {"point_id", m.point_id}, {"ts", m.timestamp},
             {"seq_no", m.seq_no},       {"value", m.value},       {"unit", m.unit},
             {"quality", m.quality},     {"source", m.source}};
}

void from_json(const json& j, SensorMessage& m)
{
    m.device_id = j.at("device_id").get<std::string>();
    m.point_id = j.at("point_id").get<std::string>();
    m.timestamp = j.at("ts").get<TimestampMs>();
    m.seq_no = j.at("seq_no").get<std::int64_t>();
    m.value = j.at("value").get<double>();
    m.unit = j.value("unit", std::string{});
    m.quality = j.value("quality", Quality::Good);
    m.source = j.value("source", Source::Native);
}

void validate(const SensorMessage& m)
{
    if (m.device_id.empty())
        throw ValidationError("sensor message has empty device_id");
    if (m.point_id.empty())
        throw ValidationError("sensor message has empty point_id");
    if (!std::isfinite(m.value))
        throw ValidationError("sensor message for " + m.point_id + " has non-finite value");
}

void to_json(json& j, const ScheduleEntry& e)
{
    j = json{{"start_hour", e.start_hour}, {"end_hour", e.end_hour}, {"value", e.value}};
}

void from_json(const json& j, ScheduleEntry& e)
{
    e.start_hour = j.at("start_hour").get<int>();
    e.end_hour = j.at("end_hour").get<int>();
    e.value = j.at("value").get<double>();
}

void to_json(json& j, const ActuatorCommand& c)
{
    j = json{{"command_id", c.command_id},
             {"issuer", c.issuer},
             {"actuator_id", c.actuator_id},
             {"verb", c.verb}};
    if (c.value)
        j["value"] = *c.value;
    if (!c.schedule.empty())
        j["schedule"] = c.schedule;
}

void from_json(const json& j, ActuatorCommand& c)
{
    c.command_id = j.value("command_id", std::string{});
    c.issuer = j.value("issuer", std::string{});
    c.actuator_id = j.at("actuator_id").get<std::string>();
    c.verb = j.at("verb").get<std::string>();
    if (j.contains("value"))
        c.value = j.at("value").get<double>();
    else
        c.value.reset();
    c.schedule = j.value("schedule", std::vector<ScheduleEntry>{});
}

}  // namespace sb
