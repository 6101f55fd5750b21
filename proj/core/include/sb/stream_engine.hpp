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

#include <chrono>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sb/bkr.hpp"
#include "sb/broker.hpp"
#include "sb/message.hpp"
#include "sb/state_vector.hpp"

namespace sb::stream {

/// Affine unit conversion to a canonical unit: canonical = a * raw + b.
struct TransformSpec {
    double a = 1.0;
    double b = 0.0;
    std::string canonical_unit;
    std::optional<Range> clamp;

    [[nodiscard]] double apply(double raw) const;
    [[nodiscard]] double invert(double canonical) const;
};

void to_json(json& j, const TransformSpec& t);
void from_json(const json& j, TransformSpec& t);

/// Keyed by point_id. Throws ValidationError for a == 0.
using TransformTable = std::map<std::string, TransformSpec>;
TransformTable parse_transforms(const json& doc);

struct TickWindow {
    Tick tick = 0;
    TimestampMs start = 0;  // inclusive
    TimestampMs end = 0;    // exclusive
};

struct IngestResult {
    StateVector vector;
    std::vector<SensorMessage> quarantined;
};

/// Vector every later tick starts from: each registered point seeded with
/// its baseline mean, Imputed, age 0, at tick `tick`.
StateVector seed_vector(const bkr::Registry& registry, Tick tick, TimestampMs tick_ts);

/// Folds one window of messages into the previous vector. The latest
/// message per point (by seq_no) wins and is Observed with age 0; other
/// points carry the previous value forward as Imputed with age + 1.
/// Messages stamped before the window are applied and flagged late.
IngestResult ingest_tick(const std::vector<SensorMessage>& batch, const StateVector& prev,
                         const bkr::Registry& registry, const TransformTable& transforms, const TickWindow& window);

struct PipelineConfig {
    std::string consumer_id = "stream-engine";
    std::string quarantine_topic = "quarantine";
    std::set<std::string> excluded_topics;
    TimestampMs epoch_ms = 0;
    std::int64_t tick_ms = 60000;
    int max_retries = 3;
    std::chrono::milliseconds backoff{1};
};

/// Consumes every sensor topic, assembles one StateVector per tick and
/// persists it to the real-time zone. Offsets are committed only after the
/// vector has been persisted, so a restarted pipeline resumes exactly after
/// the last persisted tick.
class Pipeline {
public:
    Pipeline(broker::Broker& broker, bkr::Bkr& bkr, TransformTable transforms, PipelineConfig config);

    /// Builds, persists and returns the vector for tick `t`.
    StateVector process_tick(Tick t);

    /// Writes with bounded exponential backoff; after the last retry the
    /// vector is dead-lettered and an alarm is recorded. Returns whether the
    /// vector landed.
    bool persist(const StateVector& sv);

    [[nodiscard]] TickWindow window(Tick t) const;
    [[nodiscard]] std::uint64_t quarantined() const noexcept { return quarantined_; }
    [[nodiscard]] const std::vector<json>& alarms() const noexcept { return alarms_; }
    std::vector<json> take_alarms();
    [[nodiscard]] const std::optional<StateVector>& previous() const noexcept { return prev_; }
    /// Replaces the carry-forward source, e.g. after commissioning rebuilt
    /// the probe horizon under a new registry.
    void reset_previous(std::optional<StateVector> prev) { prev_ = std::move(prev); }

private:
    broker::Broker& broker_;
    bkr::Bkr& bkr_;
    TransformTable transforms_;
    PipelineConfig config_;
    std::map<std::string, std::int64_t> positions_;
    std::optional<StateVector> prev_;
    std::uint64_t quarantined_ = 0;
    std::vector<json> alarms_;
    std::size_t alarms_taken_ = 0;
};

}  // namespace sb::stream
