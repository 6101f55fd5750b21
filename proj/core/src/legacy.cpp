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

#include "sb/legacy.hpp"

#include <sstream>

#include <spdlog/spdlog.h>

namespace sb::iface {

std::vector<LegacyRow> parse_legacy_csv(std::string_view text)
{
    std::vector<LegacyRow> rows;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line.rfind("timestamp", 0) == 0)
            continue;
        std::vector<std::string> cols;
        std::istringstream fields(line);
        for (std::string f; std::getline(fields, f, ',');)
            cols.push_back(f);
        if (cols.size() != 4)
            throw ValidationError("legacy row " + std::to_string(lineno) + ": expected 4 columns, got " +
                                  std::to_string(cols.size()));
        try {
            rows.push_back({std::stoll(cols[0]), cols[1], std::stod(cols[2]), cols[3]});
        } catch (const std::logic_error&) {
            throw ValidationError("legacy row " + std::to_string(lineno) + ": malformed number");
        }
    }
    return rows;
}

void from_json(const json& j, LegacyTarget& t)
{
    t.point_id = j.at("point_id").get<std::string>();
    t.device_id = j.value("device_id", t.point_id);
    t.unit = j.at("unit").get<std::string>();
}

void to_json(json& j, const LegacyTarget& t)
{
    j = json{{"point_id", t.point_id}, {"device_id", t.device_id}, {"unit", t.unit}};
}

void from_json(const json& j, LegacyMapping& m) { m.points = j.at("points").get<std::map<std::string, LegacyTarget>>(); }

void to_json(json& j, const LegacyMapping& m) { j = json{{"points", m.points}}; }

LegacyAdapter::LegacyAdapter(LegacyMapping mapping, const std::set<std::string>& native_points)
    : mapping_(std::move(mapping))
{
    std::set<std::string> targets;
    for (const auto& [name, t] : mapping_.points) {
        if (native_points.count(t.point_id))
            throw ConflictError("legacy point " + name + " maps onto native point " + t.point_id);
        if (!targets.insert(t.point_id).second)
            throw ConflictError("legacy mapping assigns " + t.point_id + " twice");
    }
}

std::optional<SensorMessage> LegacyAdapter::translate(const LegacyRow& row) const
{
    const auto it = mapping_.points.find(row.legacy_point);
    if (it == mapping_.points.end())
        return std::nullopt;
    SensorMessage m;
    m.device_id = it->second.device_id;
    m.point_id = it->second.point_id;
    m.timestamp = row.timestamp;
    m.seq_no = row.timestamp;
    m.value = row.value;
    m.unit = it->second.unit;
    m.quality = (row.status == "ok" || row.status == "normal" || row.status.empty()) ? Quality::Good : Quality::Suspect;
    m.source = Source::LegacyBAS;
    return m;
}

LegacyAdapter::Stats LegacyAdapter::ingest(const std::vector<LegacyRow>& rows, broker::Broker& broker,
                                           const std::string& topic, const std::string& quarantine_topic)
{
    Stats s;
    for (const auto& row : rows) {
        if (auto m = translate(row)) {
            if (broker.publish(topic, *m) == broker::PublishResult::Accepted)
                ++s.published;
            else
                ++s.duplicates;
            continue;
        }
        SensorMessage q;
        q.device_id = "legacy";
        q.point_id = "legacy:" + row.legacy_point;
        q.timestamp = row.timestamp;
        q.seq_no = row.timestamp;
        q.value = row.value;
        q.source = Source::LegacyBAS;
        q.quality = Quality::Suspect;
        if (broker.publish(quarantine_topic, q) == broker::PublishResult::Accepted) {
            ++s.quarantined;
            spdlog::debug("legacy point {} is unmapped; quarantined", row.legacy_point);
        } else {
            ++s.duplicates;
        }
    }
    return s;
}

}  // namespace sb::iface
