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
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sb/broker.hpp"
#include "sb/message.hpp"

/// Message-level adapter for a legacy building automation system that
/// exports change-of-value rows as CSV: timestamp_ms,point,value,status.
namespace sb::iface {

struct LegacyRow {
    TimestampMs timestamp = 0;
    std::string legacy_point;
    double value = 0.0;
    std::string status;
};

/// Parses the dump; a header line starting with "timestamp" is skipped.
/// Throws ValidationError naming the offending line.
std::vector<LegacyRow> parse_legacy_csv(std::string_view text);

struct LegacyTarget {
    std::string point_id;
    std::string device_id;
    std::string unit;
};

/// Legacy point name -> native identity. JSON: {"points": {name: target}}.
struct LegacyMapping {
    std::map<std::string, LegacyTarget> points;
};

void from_json(const json& j, LegacyTarget& t);
void to_json(json& j, const LegacyTarget& t);
void from_json(const json& j, LegacyMapping& m);
void to_json(json& j, const LegacyMapping& m);

class LegacyAdapter {
public:
    /// Throws ConflictError when a mapped point id is already emitted
    /// natively or two legacy points map to the same point id.
    LegacyAdapter(LegacyMapping mapping, const std::set<std::string>& native_points);

    struct Stats {
        std::size_t published = 0;
        std::size_t duplicates = 0;
        std::size_t quarantined = 0;
    };

    /// Translated message, or nullopt for an unmapped point. The sequence
    /// number is the row timestamp, so a repeated row repeats its key.
    [[nodiscard]] std::optional<SensorMessage> translate(const LegacyRow& row) const;

    Stats ingest(const std::vector<LegacyRow>& rows, broker::Broker& broker, const std::string& topic = "legacy",
                 const std::string& quarantine_topic = "quarantine");

    [[nodiscard]] const LegacyMapping& mapping() const noexcept { return mapping_; }

private:
    LegacyMapping mapping_;
};

}  // namespace sb::iface
