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

#include "sb/stream_engine.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <spdlog/spdlog.h>

namespace sb::stream {

double TransformSpec::apply(double raw) const
{
    double v = a * raw + b;
    if (clamp)
        v = std::clamp(v, clamp->min, clamp->max);
    return v;
}

double TransformSpec::invert(double canonical) const { return (canonical - b) / a; }

void to_json(json& j, const TransformSpec& t)
{
    j = json{{"a", t.a}, {"b", t.b}, {"canonical_unit", t.canonical_unit}};
    if (t.clamp)
        j["clamp"] = *t.clamp;
}

void from_json(const json& j, TransformSpec& t)
{
    for (const auto& [key, v] : j.items())
        if (key != "a" && key != "b" && key != "canonical_unit" && key != "clamp")
            throw ValidationError("transform: unknown key " + key);
    t.a = j.value("a", 1.0);
    t.b = j.value("b", 0.0);
    t.canonical_unit = j.value("canonical_unit", std::string{});
    if (j.contains("clamp") && !j["clamp"].is_null())
        t.clamp = j["clamp"].get<Range>();
}

TransformTable parse_transforms(const json& doc)
{
    TransformTable out;
    for (const auto& [point, spec] : doc.items()) {
        auto t = spec.get<TransformSpec>();
        if (t.a == 0.0 || !std::isfinite(t.a) || !std::isfinite(t.b))
            throw ValidationError("transform for " + point + " is not invertible");
        out.emplace(point, std::move(t));
    }
    return out;
}

StateVector seed_vector(const bkr::Registry& registry, Tick tick, TimestampMs tick_ts)
{
    StateVector sv;
    sv.tick = tick;
    sv.tick_ts = tick_ts;
    for (const auto& [point, device] : registry.point_owner)
        sv.values[point] =
            PointValue{registry.devices.at(device).baseline.mean, ValueProvenance::Imputed, 0, Quality::Good, false};
    return sv;
}

IngestResult ingest_tick(const std::vector<SensorMessage>& batch, const StateVector& prev,
                         const bkr::Registry& registry, const TransformTable& transforms, const TickWindow& window)
{
    IngestResult out;
    out.vector.tick = window.tick;
    out.vector.tick_ts = window.start;

    std::map<std::string, const SensorMessage*> latest;
    for (const auto& m : batch) {
        if (!registry.point_owner.count(m.point_id)) {
            out.quarantined.push_back(m);
            continue;
        }
        auto& slot = latest[m.point_id];
        if (!slot || m.seq_no >= slot->seq_no)
            slot = &m;
    }

    for (const auto& [point, device] : registry.point_owner) {
        PointValue pv;
        if (const auto it = latest.find(point); it != latest.end()) {
            const auto& m = *it->second;
            const auto t = transforms.find(point);
            pv.value = t == transforms.end() ? m.value : t->second.apply(m.value);
            pv.provenance = ValueProvenance::Observed;
            pv.age_ticks = 0;
            pv.quality = m.quality;
            pv.late = m.timestamp < window.start;
        } else if (const auto p = prev.values.find(point); p != prev.values.end()) {
            pv = p->second;
            pv.provenance = ValueProvenance::Imputed;
            pv.age_ticks += 1;
            pv.late = false;
        } else {
            pv.value = registry.devices.at(device).baseline.mean;
            pv.provenance = ValueProvenance::Imputed;
            pv.age_ticks = 1;
        }
        out.vector.values.emplace(point, pv);
    }
    return out;
}

Pipeline::Pipeline(broker::Broker& broker, bkr::Bkr& bkr, TransformTable transforms, PipelineConfig config)
    : broker_(broker), bkr_(bkr), transforms_(std::move(transforms)), config_(std::move(config))
{
    if (config_.tick_ms <= 0)
        throw ValidationError("tick_ms must be positive");
    prev_ = bkr_.latest_rt();
}

TickWindow Pipeline::window(Tick t) const
{
    const TimestampMs start = config_.epoch_ms + t * config_.tick_ms;
    return TickWindow{t, start, start + config_.tick_ms};
}

StateVector Pipeline::process_tick(Tick t)
{
    const auto w = window(t);
    const auto registry = bkr_.registry();

    std::vector<SensorMessage> batch;
    std::map<std::string, std::int64_t> consumed;
    for (const auto& topic : broker_.topics()) {
        if (topic == config_.quarantine_topic || config_.excluded_topics.count(topic))
            continue;
        auto pos = positions_.find(topic);
        if (pos == positions_.end()) {
            const auto c = broker_.committed(topic, config_.consumer_id);
            pos = positions_.emplace(topic, c ? *c + 1 : 0).first;
        }
        std::int64_t next = pos->second;
        for (bool more = true; more;) {
            const auto chunk = broker_.read(topic, next, 256);
            more = chunk.size() == 256;
            for (const auto& e : chunk) {
                if (e.message.timestamp >= w.end) {
                    more = false;  // belongs to a later tick
                    break;
                }
                batch.push_back(e.message);
                next = e.offset + 1;
            }
        }
        if (next != pos->second)
            consumed[topic] = next;
    }

    const StateVector prev = prev_ ? *prev_ : seed_vector(*registry, t - 1, w.start - config_.tick_ms);
    auto result = ingest_tick(batch, prev, *registry, transforms_, w);

    for (const auto& m : result.quarantined)
        if (broker_.publish(config_.quarantine_topic, m) == broker::PublishResult::Accepted) {
            ++quarantined_;
            spdlog::debug("stream: quarantined {} (unregistered)", m.point_id);
        }

    persist(result.vector);
    for (const auto& [topic, next] : consumed) {
        broker_.commit(topic, config_.consumer_id, next - 1);
        positions_[topic] = next;
    }
    prev_ = result.vector;
    return result.vector;
}

bool Pipeline::persist(const StateVector& sv)
{
    auto delay = config_.backoff;
    for (int attempt = 0;; ++attempt) {
        try {
            bkr_.write_rt(sv);
            return true;
        } catch (const UnavailableError& e) {
            if (attempt >= config_.max_retries) {
                bkr_.dead_letter(sv, e.what());
                alarms_.push_back(json{{"kind", "PersistFailure"}, {"tick", sv.tick}, {"reason", e.what()}});
                return false;
            }
            spdlog::warn("stream: RT write for tick {} failed (attempt {}), retrying", sv.tick, attempt + 1);
            std::this_thread::sleep_for(delay);
            delay *= 2;
        }
    }
}

std::vector<json> Pipeline::take_alarms()
{
    std::vector<json> out(alarms_.begin() + static_cast<std::ptrdiff_t>(alarms_taken_), alarms_.end());
    alarms_taken_ = alarms_.size();
    return out;
}

}  // namespace sb::stream
