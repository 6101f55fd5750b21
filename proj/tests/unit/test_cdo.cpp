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

#include "sb/cdo.hpp"
#include "sb/reference_building.hpp"

using namespace sb;
using namespace sb::cdo;

namespace {

bkr::Registry registry(double std = 1.0, const std::string& cls = "Generic")
{
    bkr::DeviceRecord d;
    d.device_id = "dev:p";
    d.point_ids = {"p"};
    d.device_class = cls;
    d.system = "plant";
    d.system_kind = "Chiller";
    d.operating_range = Range{0.0, 100.0};
    d.baseline = bkr::Baseline{50.0, std, 500, 0, 500};
    bkr::Registry r;
    r.devices[d.device_id] = d;
    r.point_owner["p"] = d.device_id;
    return r;
}

StateVector vec(Tick t, double v, Quality q = Quality::Good)
{
    StateVector sv;
    sv.tick = t;
    sv.values["p"] = PointValue{v, ValueProvenance::Observed, 0, q, false};
    return sv;
}

/// Feeds a constant value until an event appears; returns it.
std::optional<ChangeEvent> feed_until_event(ChangeDetector& d, const bkr::Registry& r, Tick from, Tick to, double v,
                                            Quality q = Quality::Good)
{
    for (Tick t = from; t < to; ++t)
        if (auto out = d.observe(vec(t, v, q), r); !out.events.empty())
            return out.events.front();
    return std::nullopt;
}

SearchSpace space(std::vector<std::vector<double>> grid)
{
    SearchSpace s;
    s.system = "chiller";
    s.actuator = "chiller";
    const int n = static_cast<int>(grid.size());
    for (int i = 0; i < n; ++i)
        s.windows.push_back({24 * i / n, 24 * (i + 1) / n, grid[static_cast<std::size_t>(i)]});
    return s;
}

}  // namespace

TEST(Detector, QuietAtBaseline)
{
    ChangeDetector d;
    EXPECT_FALSE(feed_until_event(d, registry(), 0, 500, 50.0).has_value());
}

TEST(Detector, OutOfRangeIsImmediateCriticalFault)
{
    ChangeDetector d;
    const auto r = registry();
    feed_until_event(d, r, 0, 50, 50.0);
    const auto ev = feed_until_event(d, r, 50, 100, 150.0);
    ASSERT_TRUE(ev);
    EXPECT_EQ(ev->kind, ChangeKind::Fault);
    EXPECT_EQ(ev->severity, Severity::Critical);
    EXPECT_EQ(ev->detected_at, 50);
    EXPECT_EQ(ev->system, "plant");
}

TEST(Detector, PersistentInRangeShiftIsConceptDrift)
{
    ChangeDetector d;
    const auto r = registry();
    feed_until_event(d, r, 0, 100, 50.0);
    const auto ev = feed_until_event(d, r, 100, 400, 60.0);
    ASSERT_TRUE(ev);
    EXPECT_EQ(ev->kind, ChangeKind::ConceptDrift);
    EXPECT_EQ(ev->severity, Severity::Info);
    EXPECT_GT(ev->detected_at, 100);
    EXPECT_LE(ev->detected_at, 100 + d.config().window + d.config().persistence);
    EXPECT_GT(ev->evidence.value, ev->evidence.threshold);
}

TEST(Detector, ShortExcursionIsNotDrift)
{
    ChangeDetector d;
    const auto r = registry();
    feed_until_event(d, r, 0, 100, 50.0);
    EXPECT_FALSE(feed_until_event(d, r, 100, 103, 60.0).has_value());
    EXPECT_FALSE(feed_until_event(d, r, 103, 400, 50.0).has_value());
}

TEST(Detector, SuspectFractionRaisesWarningFault)
{
    ChangeDetector d;
    const auto ev = feed_until_event(d, registry(), 0, 200, 50.0, Quality::Suspect);
    ASSERT_TRUE(ev);
    EXPECT_EQ(ev->kind, ChangeKind::Fault);
    EXPECT_EQ(ev->severity, Severity::Warning);
}

TEST(Detector, OneOpenEventPerTargetAndKindUntilResolved)
{
    ChangeDetector d;
    const auto r = registry();
    const auto first = feed_until_event(d, r, 0, 10, 150.0);
    ASSERT_TRUE(first);
    EXPECT_FALSE(feed_until_event(d, r, 10, 50, 150.0).has_value());
    EXPECT_EQ(d.open_events().size(), 1u);
    d.resolve(first->event_id, 50);
    EXPECT_FALSE(d.find(first->event_id).has_value());
    EXPECT_THROW(d.resolve(first->event_id, 51), NotFoundError);
    const auto again = feed_until_event(d, r, 50, 60, 150.0);
    ASSERT_TRUE(again);
    EXPECT_NE(again->event_id, first->event_id);
}

TEST(Detector, NoBaselinesGivesSingleCommissioningNotice)
{
    ChangeDetector d;
    auto r = registry();
    r.devices.begin()->second.baseline = {};
    EXPECT_EQ(d.observe(vec(0, 150.0), r).notices.size(), 1u);
    const auto out = d.observe(vec(1, 150.0), r);
    EXPECT_TRUE(out.notices.empty());
    EXPECT_TRUE(out.events.empty());
}

TEST(Detector, ZeroStdUsesClassTolerance)
{
    DetectorConfig cfg;
    cfg.classes["Tank"] = ClassParams{std::nullopt, std::nullopt, 10.0};
    ChangeDetector d(cfg);
    const auto r = registry(0.0, "Tank");
    EXPECT_FALSE(feed_until_event(d, r, 0, 200, 55.0).has_value());  // inside the tolerance
    std::vector<Notice> notices;
    std::optional<ChangeEvent> ev;
    for (Tick t = 200; t < 400 && !ev; ++t) {
        auto out = d.observe(vec(t, 65.0), r);
        notices.insert(notices.end(), out.notices.begin(), out.notices.end());
        if (!out.events.empty())
            ev = out.events.front();
    }
    ASSERT_TRUE(ev);
    EXPECT_EQ(ev->evidence.statistic, "mean_shift_abs");
    EXPECT_DOUBLE_EQ(ev->evidence.threshold, 10.0);
    ASSERT_EQ(notices.size(), 1u);
    EXPECT_EQ(notices.front().kind, "DegenerateBaseline");
}

TEST(Detector, DriftSuppressionAndRearm)
{
    ChangeDetector d;
    const auto r = registry();
    feed_until_event(d, r, 0, 100, 50.0);
    d.suppress_drift("plant", 300);
    EXPECT_FALSE(feed_until_event(d, r, 100, 300, 60.0).has_value());
    d.rearm("plant", 300);
    EXPECT_TRUE(feed_until_event(d, r, 300, 600, 60.0).has_value());
}

TEST(Detector, BatchDetectMatchesStreaming)
{
    std::vector<StateVector> window;
    for (Tick t = 0; t < 30; ++t)
        window.push_back(vec(t, t == 29 ? 150.0 : 50.0));
    EXPECT_TRUE(detect({window.begin(), window.begin() + 29}, registry(), DetectorConfig{}, ZScorePersistenceDetector{})
                    .empty());
    const auto findings = detect(window, registry(), DetectorConfig{}, ZScorePersistenceDetector{});
    ASSERT_EQ(findings.count("p"), 1u);
    EXPECT_EQ(findings.at("p").front().kind, ChangeKind::Fault);
}

TEST(SearchSpaceTest, ValidateChecksPartitionAndRange)
{
    auto s = space({{7.0, 8.0}, {7.0}});
    EXPECT_NO_THROW(s.validate());
    EXPECT_EQ(s.size(), 2u);
    s.windows[1].start_hour = 13;
    EXPECT_THROW(s.validate(), ValidationError);
    s = space({{7.0, 20.0}});
    s.operating_range = Range{4, 15};
    EXPECT_THROW(s.validate(), ValidationError);
}

TEST(Optimizer, ExhaustiveFindsMinimum)
{
    const auto s = space({{6, 7, 8, 9}, {6, 7, 8, 9}});
    int calls = 0;
    const Evaluator f = [&](const std::vector<ScheduleEntry>& e) {
        ++calls;
        return Evaluation{std::pow(e[0].value - 8, 2) + std::pow(e[1].value - 7, 2), 1.0};
    };
    const auto r = optimize(s, f, {}, 10);
    EXPECT_EQ(r.status, OptimizeStatus::Optimal);
    EXPECT_TRUE(r.exhaustive);
    EXPECT_EQ(calls, 16);
    EXPECT_DOUBLE_EQ(r.schedule.entries[0].value, 8);
    EXPECT_DOUBLE_EQ(r.schedule.entries[1].value, 7);
    EXPECT_EQ(r.schedule.established_at, 10);
}

TEST(Optimizer, TiesBreakTowardLowerSetpoints)
{
    const auto r = optimize(space({{6, 7, 8}}), [](const auto&) { return Evaluation{1.0, 1.0}; }, {}, 0);
    EXPECT_DOUBLE_EQ(r.schedule.entries[0].value, 6);
    EXPECT_TRUE(better(1.0, {7}, 2.0, {6}));
    EXPECT_TRUE(better(1.0, {6}, 1.0 + 1e-12, {7}));
    EXPECT_FALSE(better(1.0, {7, 6}, 1.0, {7, 5}));
}

TEST(Optimizer, ComfortConstraintAndInfeasible)
{
    const Evaluator f = [](const std::vector<ScheduleEntry>& e) {
        return Evaluation{-e[0].value, e[0].value > 8 ? 0.5 : 1.0};
    };
    EXPECT_DOUBLE_EQ(optimize(space({{6, 7, 8, 9}}), f, {}, 0).schedule.entries[0].value, 8);

    ParameterSchedule incumbent;
    incumbent.entries = {{0, 24, 7.5}};
    const auto r = optimize(space({{9, 10}}), f, incumbent, 0);
    EXPECT_EQ(r.status, OptimizeStatus::Infeasible);
    EXPECT_DOUBLE_EQ(r.schedule.entries[0].value, 7.5);
}

TEST(Optimizer, EvaluatorFailureKeepsIncumbentAfterRetries)
{
    int calls = 0;
    const Evaluator f = [&](const auto&) -> Evaluation {
        ++calls;
        throw SimulationFault("twin diverged");
    };
    OptimizerConfig cfg;
    cfg.evaluator_retries = 2;
    const auto r = optimize(space({{6, 7}}), f, {}, 0, cfg);
    EXPECT_EQ(r.status, OptimizeStatus::EvaluatorFailed);
    EXPECT_EQ(calls, 3);
    EXPECT_NE(r.detail.find("diverged"), std::string::npos);
}

TEST(Optimizer, CoordinateDescentWhenOverBudget)
{
    std::vector<double> c{4, 5, 6, 7, 8, 9, 10, 11};
    const auto s = space({c, c, c});
    OptimizerConfig cfg;
    cfg.budget = 64;
    const Evaluator f = [](const std::vector<ScheduleEntry>& e) {
        return Evaluation{std::abs(e[0].value - 5) + std::abs(e[1].value - 9) + std::abs(e[2].value - 6), 1.0};
    };
    const auto r = optimize(s, f, {}, 0, cfg);
    EXPECT_FALSE(r.exhaustive);
    EXPECT_LT(r.evaluations, 512u);
    EXPECT_DOUBLE_EQ(r.schedule.objective_value, 0.0);
}

TEST(SimEvaluatorTest, WarmerSetpointUsesLessPumpEnergyAtNight)
{
    sim::SimWorld twin(reference_building());
    twin.set_emit(false);
    SimEvaluator eval(twin, "chiller", 120);
    const auto cold = eval({{0, 24, 6.0}});
    const auto again = eval({{0, 24, 6.0}});
    EXPECT_DOUBLE_EQ(cold.energy_kwh, again.energy_kwh);
    EXPECT_GE(cold.energy_kwh, 0.0);
    EXPECT_LE(cold.min_comfort_fraction, 1.0);
    EXPECT_THROW(SimEvaluator(twin, "boiler", 5)({{0, 24, 6.0}}), RejectedError);
}

TEST(Etl, ExportsCompleteHoursOnly)
{
    bkr::BkrConfig cfg;
    cfg.ticks_per_hour = 4;
    cfg.retention_ticks = 4;
    bkr::Bkr repo({}, cfg);
    for (Tick t = 0; t < 10; ++t)
        repo.write_rt(vec(t, static_cast<double>(t)));
    const auto r = etl_cycle(repo);
    EXPECT_EQ(r.from, 0);
    EXPECT_EQ(r.to, 8);
    EXPECT_EQ(r.hours, 2u);
    EXPECT_EQ(r.rows_written, 2u);
    EXPECT_EQ(repo.export_watermark(), 8);
    const auto rows = repo.aggregates();
    EXPECT_DOUBLE_EQ(rows[0].mean, 1.5);
    EXPECT_DOUBLE_EQ(rows[1].max, 7.0);
    EXPECT_EQ(repo.rt_oldest(), 6);
    EXPECT_EQ(etl_cycle(repo).hours, 0u);
}

TEST(Etl, CrashBeforeWatermarkIsRepairedByRerun)
{
    bkr::BkrConfig cfg;
    cfg.ticks_per_hour = 4;
    bkr::Bkr repo({}, cfg);
    for (Tick t = 0; t < 16; ++t)
        repo.write_rt(vec(t, 1.0));
    EtlOptions crash;
    crash.crash_after_hours = 2;
    etl_cycle(repo, crash);
    EXPECT_FALSE(repo.export_watermark().has_value());
    EXPECT_EQ(repo.aggregates().size(), 2u);
    const auto r = etl_cycle(repo);
    EXPECT_EQ(r.rows_written, 2u);
    EXPECT_EQ(repo.aggregates().size(), 4u);
    EXPECT_EQ(repo.export_watermark(), 16);
}
