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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sb/common.hpp"

namespace sb {

/// One change-of-value reading. Unit of transport on the broker.
struct SensorMessage {
    std::string device_id;
    std::string point_id;
    TimestampMs timestamp = 0;
    std::int64_t seq_no = 0;
    double value = 0.0;
    std::string unit;
    Quality quality = Quality::Good;
    Source source = Source::Native;

    bool operator==(const SensorMessage&) const = default;
};

void to_json(json& j, const SensorMessage& m);
void from_json(const json& j, SensorMessage& m);

/// Throws ValidationError for a missing id or a non-finite value.
void validate(const SensorMessage& m);

struct ScheduleEntry {
    int start_hour = 0;  // inclusive
    int end_hour = 24;   // exclusive
    double value = 0.0;

    bool operator==(const ScheduleEntry&) const = default;
};

void to_json(json& j, const ScheduleEntry& e);
void from_json(const json& j, ScheduleEntry& e);

/// Command to one actuator. Verbs understood by the simulator:
/// set_setpoint, set_schedule, set_position, start, stop.
struct ActuatorCommand {
    std::string command_id;
    std::string issuer;
    std::string actuator_id;
    std::string verb;
    std::optional<double> value;
    std::vector<ScheduleEntry> schedule;

    bool operator==(const ActuatorCommand&) const = default;
};

void to_json(json& j, const ActuatorCommand& c);
void from_json(const json& j, ActuatorCommand& c);

}  // namespace sb
