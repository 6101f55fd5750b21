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

#include "sb/reference_building.hpp"

#include <cstdio>

namespace sb {

sim::SimConfig reference_building()
{
    using sim::SystemKind;
    sim::SimConfig c;
    c.tick_seconds = 60;
    c.seed = 42;
    c.outdoor = {26.0, 5.0, 24.0, 15.0, 800.0};

    for (int i = 1; i <= 10; ++i) {
        sim::ZoneSpec z;
        char id[16];
        std::snprintf(id, sizeof(id), "zone%02d", i);
        z.id = id;
        z.capacitance = 1.5e7 + 1e6 * (i % 5);
        z.conductance = 300.0 + 25.0 * i;
        z.gains.base = 2500.0;
        z.gains.blocks = {{8, 18, 14000.0 + 1000.0 * (i % 4)}};
        z.solar_aperture = 10.0 + 1.5 * i;
        z.facade = (i % 2 == 0) ? "south" : "north";
        z.initial_temp = 23.0;
        z.setpoint = 23.0;
        z.comfort_band = {21.0, 25.0};
        c.zones.push_back(z);
    }

    c.systems.push_back({"chiller",
                         SystemKind::Chiller,
                         600.0,
                         {{"capacity_slope", -0.04},
                          {"rated_supply", 7.0},
                          {"cop_c0", 3.5},
                          {"cop_c1", 0.2},
                          {"cop_c2", -0.02},
                          {"return_temp", 14.0},
                          {"pump_k", 0.006},
                          {"setpoint", 7.0},
                          {"economizer", 1.0},
                          {"economizer_approach", 2.0}}});
    c.systems.push_back({"boiler", SystemKind::Boiler, 400.0, {{"setpoint", 70.0}, {"eff_e0", 0.95}, {"eff_e1", 0.002}}});
    c.systems.push_back({"shading", SystemKind::ShadingSystem, 0.0, {{"default_position", 50.0}, {"motor_kw", 0.2}}});
    c.systems.push_back({"mains",
                         SystemKind::PowerSupply,
                         1500.0,
                         {{"nominal_voltage", 230.0},
                          {"nominal_frequency", 50.0},
                          {"base_occupied_kw", 80.0},
                          {"base_unoccupied_kw", 25.0},
                          {"occupied_start", 8.0},
                          {"occupied_end", 18.0}}});
    c.systems.push_back({"generator", SystemKind::BackupGenerator, 1200.0, {{"fuel_kwh", 20000.0}}});
    sim::SystemSpec elevator{"elevator", SystemKind::Auxiliary, 40.0, {{"occupied", 8.0}, {"unoccupied", 1.0}, {"range_max", 40.0}}};
    c.systems.push_back(elevator);
    sim::SystemSpec security{"security", SystemKind::Auxiliary, 0.0, {{"occupied", 0.0}, {"unoccupied", 0.0}, {"range_max", 100.0}}};
    security.quantity = "alarm_count";
    security.unit = "count";
    c.systems.push_back(security);
    return c;
}

}  // namespace sb
