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

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sb/bkr.hpp"
#include "sb/broker.hpp"
#include "sb/stream_engine.hpp"

/// Discovery and classification of point feeds.
namespace sb::dnc {

inline constexpr const char* kUnknown = "Unknown";

struct CandidatePoint {
    std::string point_id;
    std::string device_id;
    std::string topic;
    std::string unit;
    Source source = Source::Native;
    std::int64_t samples = 0;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double std = 0.0;
    double messages_per_hour = 0.0;
    std::vector<std::string> name_tokens;
    bool known = false;
};

void to_json(json& j, const CandidatePoint& c);

/// Lower-case alphabetic runs of a point id: "zone01.supply_temp" ->
/// {"zone", "supply", "temp"}.
std::vector<std::string> tokenize(const std::string& name);

struct DiscoverOptions {
    TimestampMs from_ts = 0;          // inclusive
    TimestampMs to_ts = INT64_MAX;    // exclusive
    const stream::TransformTable* transforms = nullptr;
    std::set<std::string> topics;                  // empty = every topic
    std::map<std::string, std::int64_t> from_offsets;  // per topic, default 0
};

/// Every point with at least one message in the probe window, once, in
/// point_id order. Reads all topics including the quarantine topic; a
/// message seen on several topics (e.g. re-routed to quarantine) counts once.
std::vector<CandidatePoint> discover(const broker::Broker& broker, const bkr::Registry& registry,
                                     const DiscoverOptions& options = {});

struct Classification {
    std::string label = kUnknown;
    double confidence = 0.0;

    bool operator==(const Classification&) const = default;
};

class Classifier {
public:
    virtual ~Classifier() = default;
    [[nodiscard]] virtual Classification classify(const CandidatePoint& c) const = 0;
};

/// One row of the rule table. `units` gates the rule; the four features
/// (unit, value range, name tokens, cadence) each score one quarter.
/// Features a rule leaves unspecified match anything.
struct ClassRule {
    std::string label;
    std::set<std::string> units;
    std::optional<Range> value_range;
    std::vector<std::string> name_tokens;  // all required
    std::optional<Range> messages_per_hour;
    Range default_operating_range{0.0, 1.0};
};

void to_json(json& j, const ClassRule& r);
void from_json(const json& j, ClassRule& r);

/// Deterministic feature-rule classifier. The best-scoring rule wins; a tie
/// between different labels yields Unknown with confidence 0.
class RuleTableClassifier final : public Classifier {
public:
    explicit RuleTableClassifier(std::vector<ClassRule> rules);
    static RuleTableClassifier from_json(const json& doc);
    static RuleTableClassifier defaults();

    [[nodiscard]] Classification classify(const CandidatePoint& c) const override;
    [[nodiscard]] const std::vector<ClassRule>& rules() const noexcept { return rules_; }
    [[nodiscard]] const ClassRule* rule(const std::string& label) const;

private:
    std::vector<ClassRule> rules_;
};

/// The built-in rule table as a JSON document.
json default_rule_table();

inline constexpr double kAutoRegisterThreshold = 0.5;

/// Manufacturer data for one point, keyed by point_id.
struct DatasheetEntry {
    std::string device_id;
    std::string system;
    std::string system_kind;
    std::string unit;
    Range operating_range;
};

void to_json(json& j, const DatasheetEntry& e);
void from_json(const json& j, DatasheetEntry& e);

using Datasheet = std::map<std::string, DatasheetEntry>;

struct PassResult {
    std::vector<std::string> registered;
    std::vector<CandidatePoint> needs_label;  // below threshold
};

/// Continuous pass: classifies every new candidate and registers those at or
/// above the auto-registration threshold, baselined from their probe stats.
PassResult register_new(bkr::Bkr& bkr, const std::vector<CandidatePoint>& candidates,
                        const Classifier& classifier, const RuleTableClassifier& table, const Datasheet& datasheet,
                        TimestampMs now);

/// Builds the registry record for a classified candidate.
bkr::DeviceRecord make_record(const CandidatePoint& c, const Classification& cls, const RuleTableClassifier& table,
                              const Datasheet& datasheet, TimestampMs now);

}  // namespace sb::dnc
