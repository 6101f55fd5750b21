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

#include "sb/bkr.hpp"
#include "tmpdir.hpp"

using namespace sb;
using namespace sb::bkr;

namespace {

DeviceRecord device(const std::string& point, double mean = 20.0)
{
    DeviceRecord d;
    d.device_id = "dev:" + point;
    d.point_ids = {point};
    d.device_class = "ZoneTempSensor";
    d.system = "zone01";
    d.system_kind = "Zone";
    d.operating_range = Range{10.0, 35.0};
    d.unit = "degC";
    d.baseline = Baseline{mean, 0.5, 100, 0, 100};
    return d;
}

StateVector vec(Tick t, double v)
{
    StateVector sv;
    sv.tick = t;
    sv.tick_ts = 1767225600000 + t * 60000;
    sv.values["p"] = PointValue{v, ValueProvenance::Observed, 0, Quality::Good, false};
    return sv;
}

BkrConfig small()
{
    BkrConfig c;
    c.retention_ticks = 10;
    c.ticks_per_hour = 5;
    c.min_baseline_samples = 3;
    return c;
}

}  // namespace

TEST(Baseline, PopulationStatistics)
{
    const auto b = compute_baseline({1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(b.mean, 2.5);
    EXPECT_NEAR(b.std, std::sqrt(1.25), 1e-12);
    EXPECT_EQ(b.sample_count, 4);
}

TEST(Registry, SnapshotsAreImmutable)
{
    Bkr repo;
    repo.register_device(device("p"));
    const auto before = repo.registry();
    repo.register_device(device("q"));
    EXPECT_EQ(before->devices.size(), 1u);
    EXPECT_EQ(repo.registry()->devices.size(), 2u);
    EXPECT_GT(repo.registry()->version, before->version);
    EXPECT_EQ(repo.registry()->by_point("q")->device_id, "dev:q");
    EXPECT_EQ(repo.registry()->by_point("zzz"), nullptr);
}

TEST(Registry, UpdateBaselineArchivesPrevious)
{
    Bkr repo({}, small());
    repo.register_device(device("p", 20.0));
    repo.update_baseline("p", Baseline{22.0, 0.4, 50, 100, 150}, BaselineProvenance::OCx, 150);
    EXPECT_DOUBLE_EQ(repo.registry()->by_point("p")->baseline.mean, 22.0);
    const auto archive = repo.baseline_archive();
    ASSERT_FALSE(archive.empty());
    EXPECT_EQ(archive.back().dump().find("OCx") != std::string::npos, true);
    EXPECT_THROW(repo.update_baseline("p", Baseline{1.0, 0.1, 2, 0, 2}, BaselineProvenance::OCx, 160),
                 InsufficientDataError);
}

TEST(Rules, ValidationCatchesUnknownActorAndDuplicateDefault)
{
    Rule a;
    a.rule_id = "r1";
    a.trigger.event_kind = "Fault";
    a.actions = {RuleAction{"maint", "Inspect"}};
    a.is_default = true;
    EXPECT_NO_THROW(validate_rules({a}, {"maint"}));
    EXPECT_THROW(validate_rules({a}, {"someone-else"}), ValidationError);
    auto b = a;
    b.rule_id = "r2";
    EXPECT_THROW(validate_rules({a, b}, {"maint"}), ValidationError);
}

TEST(RealTimeZone, ReadReportsCoverage)
{
    Bkr repo({}, small());
    for (Tick t = 0; t < 6; ++t)
        repo.write_rt(vec(t, static_cast<double>(t)));
    const auto full = repo.read_rt(2, 5);
    EXPECT_EQ(full.vectors.size(), 3u);
    EXPECT_TRUE(full.coverage.complete);
    const auto partial = repo.read_rt(4, 9);
    EXPECT_EQ(partial.vectors.size(), 2u);
    EXPECT_FALSE(partial.coverage.complete);
    EXPECT_EQ(partial.coverage.available_to, 6);
}

TEST(RealTimeZone, EvictionNeverPassesWatermark)
{
    Bkr repo({}, small());
    for (Tick t = 0; t < 25; ++t)
        repo.write_rt(vec(t, 1.0));
    EXPECT_EQ(repo.evict_rt(), 0u);  // nothing exported yet
    repo.set_export_watermark(20);
    EXPECT_EQ(repo.evict_rt(), 15u);
    EXPECT_EQ(repo.rt_size(), 10u);
    EXPECT_EQ(repo.rt_oldest(), 15);
}

TEST(RealTimeZone, InjectedOutageThrowsUnavailable)
{
    Bkr repo;
    repo.fail_next_rt_writes(1);
    EXPECT_THROW(repo.write_rt(vec(0, 1.0)), UnavailableError);
    EXPECT_NO_THROW(repo.write_rt(vec(0, 1.0)));
}

TEST(HistoricalZone, WriteHistSkipsExistingKeys)
{
    Bkr repo({}, small());
    AggregateRow r{"p", 3, 5, 1.0, 0.5, 1.5, 0.2};
    EXPECT_EQ(repo.write_hist({r}), 1u);
    r.mean = 9.0;
    EXPECT_EQ(repo.write_hist({r}), 0u);
    EXPECT_DOUBLE_EQ(repo.aggregates().front().mean, 1.0);
    const auto s = repo.query_hist("p", 2, 5, HistStat::Mean);
    ASSERT_EQ(s.values.size(), 3u);
    EXPECT_FALSE(s.values[0].has_value());
    EXPECT_DOUBLE_EQ(*s.values[1], 1.0);
    EXPECT_FALSE(s.coverage.complete);
    EXPECT_EQ(parse_stat("max"), HistStat::Max);
}

TEST(Persistence, ReopenRestoresEverything)
{
    sbtest::TmpDir dir;
    {
        Bkr repo(dir.str(), small());
        repo.register_device(device("p"));
        for (Tick t = 0; t < 12; ++t)
            repo.write_rt(vec(t, static_cast<double>(t)));
        repo.write_hist({AggregateRow{"p", 0, 5, 2.0, 0.0, 4.0, 1.4}});
        repo.set_export_watermark(5);
        repo.append_journal(json{{"type", "note"}, {"tick", 3}});
        repo.append_report(json{{"kind", "commissioning"}, {"complete", true}});
    }
    Bkr repo(dir.str(), small());
    EXPECT_EQ(repo.registry()->devices.size(), 1u);
    EXPECT_EQ(repo.latest_rt()->tick, 11);
    EXPECT_EQ(repo.export_watermark(), 5);
    EXPECT_EQ(repo.aggregates().size(), 1u);
    EXPECT_EQ(repo.journal().size(), 1u);
    EXPECT_TRUE(repo.commissioned());
    EXPECT_TRUE(repo.export_archive().is_object());
}

TEST(Persistence, FreshRepositoryIsNotCommissioned)
{
    sbtest::TmpDir dir;
    Bkr repo(dir.str());
    EXPECT_FALSE(repo.commissioned());
    repo.append_report(json{{"kind", "commissioning"}, {"complete", false}});
    EXPECT_FALSE(repo.commissioned());
}
