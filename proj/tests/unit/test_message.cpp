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

#include <cmath>

#include <gtest/gtest.h>

#include "sb/message.hpp"

using namespace sb;

namespace {

SensorMessage sample()
{
    SensorMessage m;
    m.device_id = "dev:chiller.supply_temp";
    m.point_id = "chiller.supply_temp";
    m.timestamp = 1767225600000;
    m.seq_no = 7;
    m.value = 6.75;
    m.unit = "degC";
    m.quality = Quality::Suspect;
    m.source = Source::LegacyBAS;
    return m;
}

}  // namespace

TEST(SensorMessage, JsonRoundTrip)
{
    const auto m = sample();
    const json j = m;
    EXPECT_EQ(j.at("quality"), "Suspect");
    EXPECT_EQ(j.at("source"), "LegacyBAS");
    EXPECT_EQ(j.get<SensorMessage>(), m);
}

TEST(SensorMessage, ValidateRejectsMissingIdsAndNonFinite)
{
    auto m = sample();
    EXPECT_NO_THROW(validate(m));
    m.point_id.clear();
    EXPECT_THROW(validate(m), ValidationError);
    m = sample();
    m.value = std::nan("");
    EXPECT_THROW(validate(m), ValidationError);
    m.value = INFINITY;
    EXPECT_THROW(validate(m), ValidationError);
}

TEST(ActuatorCommand, JsonRoundTripWithSchedule)
{
    ActuatorCommand c;
    c.command_id = "cmd-1";
    c.issuer = "optimizer";
    c.actuator_id = "chiller";
    c.verb = "set_schedule";
    c.schedule = {{0, 6, 8.0}, {6, 24, 7.0}};
    const json j = c;
    EXPECT_EQ(j.get<ActuatorCommand>(), c);

    ActuatorCommand s;
    s.command_id = "cmd-2";
    s.actuator_id = "generator";
    s.verb = "start";
    EXPECT_FALSE(json(s).get<ActuatorCommand>().value.has_value());
}
