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

#include <gtest/gtest.h>

#include "sb/building.hpp"
#include "tmpdir.hpp"

using namespace sb;
using namespace sb::autonomic;

namespace {

constexpr Tick kFaultAt = 1500;

RuntimeConfig manual_config()
{
    auto cfg = default_runtime_config();
    for (auto& a : cfg.actors)
        if (a.actor_id == "maint-hvac") {
            a.ack_delay.reset();
            a.resolve_delay.reset();
        }
    return cfg;
}

sim::ScenarioScript bias()
{
    return json{{"events",
                 {{{"tick", kFaultAt},
                   {"kind", "FaultInjection"},
                   {"target", "chiller.supply_temp"},
                   {"parameters", {{"mode", "bias"}, {"offset", 9.0}}}}}}}
        .get<sim::ScenarioScript>();
}

}  // namespace

TEST(RuntimeConfigTest, DefaultsAreValidAndRoundTrip)
{
    const auto cfg = default_runtime_config();
    EXPECT_TRUE(cfg.validation_errors().empty());
    const auto doc = to_json(cfg);
    EXPECT_EQ(to_json(load_runtime_config(doc)), doc);
    EXPECT_NO_THROW(load_runtime_config(json{{"building", "reference"}}));
}

TEST(RuntimeConfigTest, LoaderListsEveryProblem)
{
    try {
        load_runtime_config(json{{"bogus", 1}, {"probe_ticks", "soon"}, {"watchdog_ticks", -5}});
        FAIL();
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("bogus"), std::string::npos);
        EXPECT_NE(msg.find("probe_ticks"), std::string::npos);
        EXPECT_NE(msg.find("watchdog_ticks"), std::string::npos);
    }
}

TEST(RuntimeConfigTest, LegacyMappingMayNotShadowNativePoints)
{
    auto cfg = default_runtime_config();
    cfg.legacy_mapping = iface::LegacyMapping{{{"CH1.CHWST", {"chiller.supply_temp", "d", "degF"}}}};
    const auto errors = cfg.validation_errors();
    ASSERT_EQ(errors.size(), 1u);
    EXPECT_NE(errors.front().find("legacy"), std::string::npos);
}

TEST(GoldenProjection, KeepsStructuralKeysOnly)
{
    const auto p = golden_projection(json{{"type", "ticket"}, {"tick", 3}, {"detail", "free text"}, {"verb", "X"}});
    EXPECT_EQ(p, (json{{"type", "ticket"}, {"tick", 3}, {"verb", "X"}}));
}

class BuildingRun : public ::testing::Test {
protected:
    static void SetUpTestSuite()
    {
        building = new Building(manual_config(), bias());
        building->run(kFaultAt + 20);
    }
    static void TearDownTestSuite()
    {
        delete building;
        building = nullptr;
    }
    static Building* building;
};

Building* BuildingRun::building = nullptr;

TEST_F(BuildingRun, CommissionedThenFaultMovesToInterfacing)
{
    EXPECT_EQ(building->tick(), kFaultAt + 20);
    EXPECT_EQ(building->mode(), Mode::Interfacing);
    EXPECT_EQ(building->bkr().registry()->devices.size(), 50u);
    EXPECT_TRUE(building->bkr().commissioned());
    const auto events = building->events();
    ASSERT_FALSE(events.empty());
    EXPECT_EQ(events.front().target, "chiller.supply_temp");
}

TEST_F(BuildingRun, DescribeKnowsEveryReportAndRejectsOthers)
{
    for (const auto& name : Building::report_names())
        EXPECT_NO_THROW(building->describe(name)) << name;
    try {
        (void)building->describe("weather");
        FAIL();
    } catch (const NotFoundError& e) {
        EXPECT_NE(std::string(e.what()).find("commissioning"), std::string::npos);
    }
    EXPECT_EQ(building->summary().at("final_mode"), "Interfacing");
}

TEST_F(BuildingRun, TicketWorkflowThroughBuilding)
{
    std::string id;
    for (const auto& t : building->tickets())
        if (t.actor_id == "maint-hvac")
            id = t.ticket_id;
    ASSERT_FALSE(id.empty());
    EXPECT_THROW(building->acknowledge(id, "manager"), RejectedError);
    EXPECT_EQ(building->acknowledge(id, "maint-hvac").at("status"), "Acknowledged");
    EXPECT_THROW(building->resolve(id, iface::Resolution::RepairedNoEquipChange, "intruder"), RejectedError);
    EXPECT_EQ(building->resolve(id, iface::Resolution::RepairedNoEquipChange, "maint-hvac").at("status"), "Resolved");
}

TEST_F(BuildingRun, ComfortRequestsRespectLimits)
{
    EXPECT_THROW(building->tenant_comfort("zone01", 15.0, 30.0, "tenants"), ValidationError);
    EXPECT_THROW(building->tenant_comfort("zone01", 21.0, 24.0, ""), RejectedError);
    EXPECT_THROW(building->tenant_comfort("zone99", 21.0, 24.0, "tenants"), NotFoundError);
    EXPECT_NO_THROW(building->tenant_comfort("zone01", 21.5, 24.5, "tenants"));
}

TEST_F(BuildingRun, WaiveNeedsPendingCommissioning)
{
    EXPECT_THROW(building->waive("chiller.supply_temp", "manager"), ConflictError);
    EXPECT_THROW(building->waive("chiller.supply_temp", ""), RejectedError);
}

TEST_F(BuildingRun, StreamResumesAfterSequence)
{
    const auto all = building->stream_after(0, std::chrono::milliseconds(0));
    ASSERT_GT(all.size(), 3u);
    for (std::size_t i = 1; i < all.size(); ++i)
        EXPECT_GT(all[i].seq, all[i - 1].seq);
    const auto tail = building->stream_after(all[1].seq, std::chrono::milliseconds(0));
    ASSERT_FALSE(tail.empty());
    EXPECT_EQ(tail.front().seq, all[2].seq);
}

TEST(BuildingRestart, ResumesAfterLastPersistedTick)
{
    sbtest::TmpDir dir;
    {
        Building b(default_runtime_config(), {}, dir.str());
        b.run(1500);
        EXPECT_EQ(b.mode(), Mode::DetectingChange);
    }
    Building b(default_runtime_config(), {}, dir.str());
    EXPECT_EQ(b.tick(), 1500);
    EXPECT_EQ(b.mode(), Mode::DetectingChange);
    b.run(10);
    EXPECT_EQ(b.bkr().latest_rt()->tick, 1509);
}
