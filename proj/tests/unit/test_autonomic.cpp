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

#include "sb/autonomic.hpp"

using namespace sb;
using namespace sb::autonomic;

TEST(Transitions, RelationEdges)
{
    int legal = 0;
    for (auto m : kAllModes)
        for (auto s : kAllStimuli)
            legal += next_mode(m, s).has_value();
    EXPECT_EQ(legal, 7);  // six arrows, CommissioningComplete and UpgradeComplete share one
    EXPECT_EQ(next_mode(Mode::DetectingChange, Stimulus::FaultDetected), Mode::Interfacing);
    EXPECT_EQ(next_mode(Mode::Interfacing, Stimulus::EquipmentChanged), Mode::Initializing);
    EXPECT_FALSE(next_mode(Mode::Optimizing, Stimulus::FaultDetected).has_value());
}

TEST(Transitions, IllegalPairLeavesModeAndRecordsAnomaly)
{
    const BuildingMode m{Mode::Initializing, 0, {}};
    const auto r = transition(m, Stimulus::DriftDetected, 5, "spurious");
    EXPECT_FALSE(r.accepted);
    EXPECT_EQ(r.mode, m);
    EXPECT_EQ(r.record.at("type"), "anomaly");
    EXPECT_EQ(r.record.at("tick"), 5);
}

TEST(ModeMachine, DrainAppliesInOrderAndJournals)
{
    std::vector<json> journal;
    ModeMachine mm({}, [&](const json& j) { journal.push_back(j); });
    mm.post(Stimulus::CommissioningComplete, "cx");
    mm.post(Stimulus::FaultDetected, "too early");
    mm.post(Stimulus::OptimumFound, "opt");
    EXPECT_TRUE(mm.pending());
    const auto accepted = mm.drain(10);
    EXPECT_EQ(accepted.size(), 2u);
    EXPECT_EQ(mm.mode(), Mode::DetectingChange);
    EXPECT_EQ(mm.current().since, 10);
    EXPECT_EQ(mm.anomalies(), 1u);
    EXPECT_EQ(journal.size(), 3u);
    EXPECT_FALSE(mm.pending());
}

TEST(Replay, ReproducesHistory)
{
    std::vector<json> journal;
    ModeMachine mm({}, [&](const json& j) { journal.push_back(j); });
    mm.apply(Stimulus::CommissioningComplete, "a", 1);
    mm.apply(Stimulus::OptimumFound, "b", 2);
    mm.apply(Stimulus::OptimumFound, "dup", 3);
    mm.apply(Stimulus::DriftDetected, "c", 4);
    const auto h = replay(journal);
    ASSERT_EQ(h.size(), 4u);
    EXPECT_EQ(h.back().mode, Mode::Optimizing);
    EXPECT_EQ(mode_at(h, 0), Mode::Initializing);
    EXPECT_EQ(mode_at(h, 2), Mode::DetectingChange);
    EXPECT_EQ(mode_at(h, 100), Mode::Optimizing);
}

TEST(Replay, RejectsTamperedJournal)
{
    std::vector<json> journal;
    ModeMachine mm({}, [&](const json& j) { journal.push_back(j); });
    mm.apply(Stimulus::CommissioningComplete, "a", 1);
    mm.apply(Stimulus::OptimumFound, "b", 2);
    auto bad = journal;
    bad[1]["to"] = "Interfacing";
    EXPECT_THROW(replay(bad), ValidationError);
    bad = journal;
    bad[1]["from"] = "Interfacing";
    EXPECT_THROW(replay(bad), ValidationError);
}

TEST(BuildingModeJson, RoundTrip)
{
    const BuildingMode m{Mode::Interfacing, 42, "ev-000001"};
    EXPECT_EQ(json(m).get<BuildingMode>(), m);
    EXPECT_EQ(to_string(Stimulus::UpgradeComplete), "UpgradeComplete");
}
