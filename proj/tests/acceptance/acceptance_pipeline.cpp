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

// Pipeline completeness and deterministic replay over a randomized
// change-of-value feed.

#include <map>

#include "report.hpp"
#include "sb/bkr.hpp"
#include "sb/broker.hpp"
#include "sb/stream_engine.hpp"

using namespace sb;

namespace {

constexpr int kPoints = 50;
constexpr Tick kTicks = 10000;
constexpr std::int64_t kTickMs = 60000;
constexpr TimestampMs kEpoch = 1767225600000;

void register_points(bkr::Bkr& repo)
{
    for (int i = 0; i < kPoints; ++i) {
        bkr::DeviceRecord d;
        d.point_ids = {"pt" + std::to_string(i)};
        d.device_id = "dev" + std::to_string(i);
        d.device_class = "Generic";
        d.system = "sys" + std::to_string(i % 5);
        d.system_kind = "Auxiliary";
        d.operating_range = Range{-1000.0, 1000.0};
        d.unit = i % 7 == 0 ? "degF" : "u";
        d.baseline = bkr::Baseline{static_cast<double>(i), 1.0, 100, 0, 100};
        repo.register_device(d);
    }
}

stream::TransformTable transforms()
{
    stream::TransformTable t;
    for (int i = 0; i < kPoints; i += 7)
        t["pt" + std::to_string(i)] = stream::TransformSpec{5.0 / 9.0, -160.0 / 9.0, "degC", std::nullopt};
    return t;
}

struct Published {
    std::string topic;
    SensorMessage msg;
};

/// Randomized feed for tick t: sparse change-of-value updates, duplicates,
/// late arrivals, suspect readings and unregistered points.
std::vector<Published> feed(std::mt19937_64& rng, Tick t, std::vector<std::int64_t>& seq)
{
    std::vector<Published> out;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 3.0);
    const TimestampMs start = kEpoch + t * kTickMs;
    for (int i = 0; i < kPoints; ++i) {
        if (u(rng) > 0.3)
            continue;
        SensorMessage m;
        m.device_id = "dev" + std::to_string(i);
        m.point_id = "pt" + std::to_string(i);
        m.seq_no = ++seq[i];
        m.timestamp = start + static_cast<TimestampMs>(u(rng) * (kTickMs - 1));
        if (t > 0 && u(rng) < 0.02)
            m.timestamp -= kTickMs;  // late arrival from the previous window
        m.value = i + noise(rng);
        m.unit = i % 7 == 0 ? "degF" : "u";
        m.quality = u(rng) < 0.05 ? Quality::Suspect : Quality::Good;
        const auto topic = "topic" + std::to_string(i % 3);
        out.push_back({topic, m});
        if (u(rng) < 0.05)
            out.push_back({topic, m});  // producer retry
    }
    if (u(rng) < 0.1) {
        SensorMessage stray;
        stray.device_id = "unknown";
        stray.point_id = "stray" + std::to_string(rng() % 4);
        stray.seq_no = t;
        stray.timestamp = start + 10;
        stray.value = 1.0;
        out.push_back({"topic0", stray});
    }
    return out;
}

struct Run {
    std::vector<std::string> encoded;
    std::size_t holes = 0;
    std::size_t extra = 0;
    std::uint64_t quarantined = 0;
    std::size_t persisted_mismatch = 0;
};

template <class Source>
Run run_pipeline(Source&& source)
{
    broker::Broker broker;
    bkr::BkrConfig cfg;
    cfg.retention_ticks = kTicks;
    bkr::Bkr repo({}, cfg);
    register_points(repo);
    stream::PipelineConfig pc;
    pc.epoch_ms = kEpoch;
    pc.tick_ms = kTickMs;
    stream::Pipeline pipeline(broker, repo, transforms(), pc);
    const auto registry = repo.registry();

    Run run;
    run.encoded.reserve(kTicks);
    for (Tick t = 0; t < kTicks; ++t) {
        for (const auto& p : source(t))
            broker.publish(p.topic, p.msg);
        const auto sv = pipeline.process_tick(t);
        for (const auto& [point, owner] : registry->point_owner)
            run.holes += sv.values.count(point) == 0;
        run.extra += sv.values.size() > registry->point_owner.size() ? 1 : 0;
        run.encoded.push_back(encode(sv));
    }
    const auto stored = repo.read_rt(0, kTicks).vectors;
    for (std::size_t i = 0; i < stored.size(); ++i)
        run.persisted_mismatch += encode(stored[i]) != run.encoded[i];
    run.persisted_mismatch += stored.size() != run.encoded.size();
    run.quarantined = pipeline.quarantined();
    return run;
}

}  // namespace

int main()
{
    acceptance::Report report("pipeline");
    acceptance::Stopwatch clock;

    std::mt19937_64 rng(424242);
    std::vector<std::int64_t> seq(kPoints, 0);
    std::map<Tick, std::vector<Published>> recorded;
    std::size_t messages = 0;
    const auto live = run_pipeline([&](Tick t) {
        auto batch = feed(rng, t, seq);
        messages += batch.size();
        recorded[t] = batch;
        return batch;
    });
    report.check("ticks_10000", live.encoded.size() == static_cast<std::size_t>(kTicks),
                 std::to_string(live.encoded.size()) + " vectors from " + std::to_string(messages) + " messages");
    report.check("zero_holes", live.holes == 0 && live.extra == 0,
                 std::to_string(live.holes) + " missing point-ticks, " + std::to_string(live.extra) +
                     " vectors with unregistered points");
    report.check("persisted_equals_emitted", live.persisted_mismatch == 0);
    report.check("unregistered_points_quarantined", live.quarantined > 0,
                 std::to_string(live.quarantined) + " quarantined");

    const auto replayed = run_pipeline([&](Tick t) { return recorded[t]; });
    std::size_t differing = 0;
    for (std::size_t i = 0; i < live.encoded.size() && i < replayed.encoded.size(); ++i)
        differing += live.encoded[i] != replayed.encoded[i];
    report.check("replay_byte_identical", differing == 0 && live.encoded.size() == replayed.encoded.size(),
                 std::to_string(differing) + " differing vectors");

    const auto elapsed = clock.seconds();
    report.check("runtime_under_60s", elapsed < 60.0, acceptance::fmt_double(elapsed, 2) + " s");
    return report.exit_code();
}
