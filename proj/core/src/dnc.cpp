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

#include "sb/dnc.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <spdlog/spdlog.h>

namespace sb::dnc {

namespace {

std::string normalize_unit(const std::string& u)
{
    if (u == "\xC2\xB0"
             "C" ||
        u == "C" || u == "degC" || u == "celsius")
        return "degC";
    if (u == "\xC2\xB0"
             "F" ||
        u == "F" || u == "degF")
        return "degF";
    return u;
}

constexpr double kEps = 1e-9;

}  // namespace

void to_json(json& j, const CandidatePoint& c)
{
    j = json{{"point_id", c.point_id},
             {"device_id", c.device_id},
             {"topic", c.topic},
             {"unit", c.unit},
             {"source", c.source},
             {"samples", c.samples},
             {"min", c.min},
             {"max", c.max},
             {"mean", c.mean},
             {"std", c.std},
             {"messages_per_hour", c.messages_per_hour},
             {"name_tokens", c.name_tokens},
             {"known", c.known}};
}

std::vector<std::string> tokenize(const std::string& name)
{
    std::vector<std::string> out;
    std::string cur;
    for (char ch : name) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalpha(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty())
        out.push_back(std::move(cur));
    return out;
}

std::vector<CandidatePoint> discover(const broker::Broker& broker, const bkr::Registry& registry,
                                     const DiscoverOptions& options)
{
    struct Acc {
        CandidatePoint c;
        double sum = 0.0;
        double sum_sq = 0.0;
    };
    std::map<std::string, Acc> acc;
    std::set<std::pair<std::string, std::int64_t>> seen;
    for (const auto& topic : broker.topics()) {
        if (!options.topics.empty() && !options.topics.count(topic))
            continue;
        const auto start = options.from_offsets.find(topic);
        for (std::int64_t pos = start == options.from_offsets.end() ? 0 : start->second;;) {
            const auto chunk = broker.read(topic, pos, 1024);
            for (const auto& e : chunk) {
                const auto& m = e.message;
                if (m.timestamp < options.from_ts || m.timestamp >= options.to_ts)
                    continue;
                if (!seen.emplace(m.point_id, m.seq_no).second)
                    continue;
                double v = m.value;
                std::string unit = normalize_unit(m.unit);
                if (options.transforms) {
                    if (const auto t = options.transforms->find(m.point_id); t != options.transforms->end()) {
                        v = t->second.apply(v);
                        unit = normalize_unit(t->second.canonical_unit);
                    }
                }
                auto [it, fresh] = acc.try_emplace(m.point_id);
                auto& a = it->second;
                if (fresh) {
                    a.c.point_id = m.point_id;
                    a.c.device_id = m.device_id;
                    a.c.topic = topic;
                    a.c.unit = unit;
                    a.c.source = m.source;
                    a.c.min = v;
                    a.c.max = v;
                    a.c.name_tokens = tokenize(m.point_id);
                    a.c.known = registry.point_owner.count(m.point_id) > 0;
                }
                ++a.c.samples;
                a.c.min = std::min(a.c.min, v);
                a.c.max = std::max(a.c.max, v);
                a.sum += v;
                a.sum_sq += v * v;
            }
            if (chunk.size() < 1024)
                break;
            pos = chunk.back().offset + 1;
        }
    }

    const bool bounded = options.to_ts != INT64_MAX && options.to_ts > options.from_ts;
    const double hours = bounded ? static_cast<double>(options.to_ts - options.from_ts) / 3.6e6 : 0.0;
    std::vector<CandidatePoint> out;
    out.reserve(acc.size());
    for (auto& [id, a] : acc) {
        const auto n = static_cast<double>(a.c.samples);
        a.c.mean = a.sum / n;
        a.c.std = std::sqrt(std::max(0.0, a.sum_sq / n - a.c.mean * a.c.mean));
        a.c.messages_per_hour = hours > 0 ? n / hours : 0.0;
        out.push_back(std::move(a.c));
    }
    return out;
}

void to_json(json& j, const ClassRule& r)
{
    j = json{{"label", r.label}, {"units", r.units}, {"default_operating_range", r.default_operating_range}};
    if (r.value_range)
        j["value_range"] = *r.value_range;
    if (!r.name_tokens.empty())
        j["name_tokens"] = r.name_tokens;
    if (r.messages_per_hour)
        j["messages_per_hour"] = *r.messages_per_hour;
}

void from_json(const json& j, ClassRule& r)
{
    r.label = j.at("label").get<std::string>();
    for (const auto& u : j.at("units"))
        r.units.insert(normalize_unit(u.get<std::string>()));
    if (j.contains("value_range"))
        r.value_range = j["value_range"].get<Range>();
    r.name_tokens = j.value("name_tokens", std::vector<std::string>{});
    if (j.contains("messages_per_hour"))
        r.messages_per_hour = j["messages_per_hour"].get<Range>();
    r.default_operating_range = j.value("default_operating_range", Range{0.0, 1.0});
}

RuleTableClassifier::RuleTableClassifier(std::vector<ClassRule> rules) : rules_(std::move(rules))
{
    std::set<std::string> labels;
    for (const auto& r : rules_) {
        if (r.label.empty() || r.label == kUnknown)
            throw ValidationError("classification rule needs a label other than Unknown");
        if (r.units.empty())
            throw ValidationError("classification rule " + r.label + " needs at least one unit");
        if (!labels.insert(r.label).second)
            throw ValidationError("duplicate classification rule " + r.label);
    }
}

RuleTableClassifier RuleTableClassifier::from_json(const json& doc)
{
    return RuleTableClassifier(doc.at("rules").get<std::vector<ClassRule>>());
}

RuleTableClassifier RuleTableClassifier::defaults() { return from_json(default_rule_table()); }

const ClassRule* RuleTableClassifier::rule(const std::string& label) const
{
    for (const auto& r : rules_)
        if (r.label == label)
            return &r;
    return nullptr;
}

Classification RuleTableClassifier::classify(const CandidatePoint& c) const
{
    const auto unit = normalize_unit(c.unit);
    Classification best;
    bool tie = false;
    for (const auto& r : rules_) {
        if (!r.units.count(unit))
            continue;
        double score = 1.0;  // unit
        if (!r.value_range || (r.value_range->contains(c.min) && r.value_range->contains(c.max)))
            score += 1.0;
        if (r.name_tokens.empty()) {
            score += 1.0;
        } else {
            std::size_t hit = 0;
            for (const auto& t : r.name_tokens)
                hit += std::count(c.name_tokens.begin(), c.name_tokens.end(), t) > 0 ? 1 : 0;
            score += static_cast<double>(hit) / static_cast<double>(r.name_tokens.size());
        }
        if (!r.messages_per_hour || r.messages_per_hour->contains(c.messages_per_hour))
            score += 1.0;
        const double conf = score / 4.0;
        if (conf > best.confidence + kEps) {
            best = {r.label, conf};
            tie = false;
        } else if (std::abs(conf - best.confidence) <= kEps && r.label != best.label) {
            tie = true;
        }
    }
    if (tie)
        return {};
    return best;
}

json default_rule_table()
{
    return json::parse(R"({
  "rules": [
    {"label": "ZoneTempSensor", "units": ["degC"], "value_range": [10, 35], "name_tokens": ["zone", "temp"],
     "default_operating_range": [10, 35]},
    {"label": "ZoneSetpoint", "units": ["degC"], "value_range": [16, 30], "name_tokens": ["setpoint"],
     "messages_per_hour": [0, 1], "default_operating_range": [16, 30]},
    {"label": "ChilledWaterSupplyTemp", "units": ["degC"], "value_range": [2, 18], "name_tokens": ["supply", "temp"],
     "default_operating_range": [4, 15]},
    {"label": "HotWaterSupplyTemp", "units": ["degC"], "value_range": [35, 95], "name_tokens": ["supply", "temp"],
     "default_operating_range": [40, 90]},
    {"label": "OutdoorTempSensor", "units": ["degC"], "value_range": [-40, 50], "name_tokens": ["outdoor", "temp"],
     "default_operating_range": [-40, 50]},
    {"label": "ThermalLoadMeter", "units": ["kWt"], "name_tokens": ["load"], "default_operating_range": [-1000, 1000]},
    {"label": "PowerMeter", "units": ["kW"], "value_range": [0, 5000], "name_tokens": ["power"],
     "default_operating_range": [0, 5000]},
    {"label": "CopSensor", "units": ["COP"], "value_range": [0, 12], "name_tokens": ["cop"],
     "default_operating_range": [1.5, 9]},
    {"label": "ShadingPosition", "units": ["%"], "value_range": [0, 100], "name_tokens": ["position"],
     "default_operating_range": [0, 100]},
    {"label": "FuelLevel", "units": ["%"], "value_range": [0, 100], "name_tokens": ["fuel"],
     "default_operating_range": [0, 100]},
    {"label": "VoltageSensor", "units": ["V"], "value_range": [0, 500], "name_tokens": ["voltage"],
     "default_operating_range": [207, 253]},
    {"label": "FrequencySensor", "units": ["Hz"], "value_range": [40, 70], "name_tokens": ["frequency"],
     "default_operating_range": [49.5, 50.5]},
    {"label": "GeneratorStatus", "units": ["state"], "value_range": [0, 1], "name_tokens": ["status"],
     "default_operating_range": [0, 1]},
    {"label": "SolarIrradianceSensor", "units": ["W/m2"], "value_range": [0, 1500], "name_tokens": ["solar"],
     "default_operating_range": [0, 1400]},
    {"label": "AlarmCounter", "units": ["count"], "name_tokens": ["alarm"], "default_operating_range": [0, 100]}
  ]
})");
}

void to_json(json& j, const DatasheetEntry& e)
{
    j = json{{"device_id", e.device_id},
             {"system", e.system},
             {"system_kind", e.system_kind},
             {"unit", e.unit},
             {"operating_range", e.operating_range}};
}

void from_json(const json& j, DatasheetEntry& e)
{
    e.device_id = j.value("device_id", std::string{});
    e.system = j.value("system", std::string{});
    e.system_kind = j.value("system_kind", std::string{});
    e.unit = j.value("unit", std::string{});
    e.operating_range = j.at("operating_range").get<Range>();
}

bkr::DeviceRecord make_record(const CandidatePoint& c, const Classification& cls, const RuleTableClassifier& table,
                              const Datasheet& datasheet, TimestampMs now)
{
    bkr::DeviceRecord rec;
    rec.device_id = c.device_id.empty() ? "dev:" + c.point_id : c.device_id;
    rec.point_ids = {c.point_id};
    rec.device_class = cls.label;
    rec.unit = normalize_unit(c.unit);
    rec.source = c.source;
    rec.commissioned_at = now;
    if (const auto it = datasheet.find(c.point_id); it != datasheet.end()) {
        rec.system = it->second.system;
        rec.system_kind = it->second.system_kind;
        rec.operating_range = it->second.operating_range;
    } else if (const auto* r = table.rule(cls.label)) {
        rec.operating_range = r->default_operating_range;
    } else {
        rec.operating_range = {c.min - 1.0, c.max + 1.0};
    }
    rec.baseline = bkr::Baseline{c.mean, c.std, c.samples, 0, 0};
    return rec;
}

PassResult register_new(bkr::Bkr& bkr, const std::vector<CandidatePoint>& candidates,
                        const Classifier& classifier, const RuleTableClassifier& table, const Datasheet& datasheet,
                        TimestampMs now)
{
    PassResult out;
    for (const auto& c : candidates) {
        if (c.known)
            continue;
        const auto cls = classifier.classify(c);
        if (cls.label == kUnknown || cls.confidence < kAutoRegisterThreshold) {
            out.needs_label.push_back(c);
            continue;
        }
        try {
            bkr.register_device(make_record(c, cls, table, datasheet, now));
            out.registered.push_back(c.point_id);
        } catch (const ConflictError& e) {
            spdlog::warn("dnc: cannot register {}: {}", c.point_id, e.what());
            out.needs_label.push_back(c);
        }
    }
    return out;
}

}  // namespace sb::dnc
