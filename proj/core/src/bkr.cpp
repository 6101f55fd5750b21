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

#include "sb/bkr.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <spdlog/spdlog.h>

namespace fs = std::filesystem;

namespace sb::bkr {

void to_json(json& j, const Baseline& b)
{
    j = json{{"mean", b.mean},
             {"std", b.std},
             {"sample_count", b.sample_count},
             {"window", json::array({b.window_from, b.window_to})}};
}

void from_json(const json& j, Baseline& b)
{
    b.mean = j.value("mean", 0.0);
    b.std = j.value("std", 0.0);
    b.sample_count = j.value("sample_count", std::int64_t{0});
    if (j.contains("window")) {
        b.window_from = j["window"].at(0).get<Tick>();
        b.window_to = j["window"].at(1).get<Tick>();
    }
}

Baseline compute_baseline(const std::vector<double>& values)
{
    Baseline b;
    b.sample_count = static_cast<std::int64_t>(values.size());
    if (values.empty())
        return b;
    double sum = 0.0;
    for (double v : values)
        sum += v;
    b.mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values)
        ss += (v - b.mean) * (v - b.mean);
    b.std = std::sqrt(ss / static_cast<double>(values.size()));
    return b;
}

void to_json(json& j, const DeviceRecord& d)
{
    j = json{{"device_id", d.device_id},
             {"point_ids", d.point_ids},
             {"class", d.device_class},
             {"system", d.system},
             {"system_kind", d.system_kind},
             {"operating_range", d.operating_range},
             {"unit", d.unit},
             {"baseline", d.baseline},
             {"source", d.source},
             {"commissioned_at", d.commissioned_at},
             {"waived", d.waived}};
}

void from_json(const json& j, DeviceRecord& d)
{
    d.device_id = j.at("device_id").get<std::string>();
    d.point_ids = j.at("point_ids").get<std::vector<std::string>>();
    d.device_class = j.value("class", std::string{});
    d.system = j.value("system", std::string{});
    d.system_kind = j.value("system_kind", std::string{});
    d.operating_range = j.at("operating_range").get<Range>();
    d.unit = j.value("unit", std::string{});
    if (j.contains("baseline"))
        d.baseline = j["baseline"].get<Baseline>();
    d.source = j.value("source", Source::Native);
    d.commissioned_at = j.value("commissioned_at", TimestampMs{0});
    d.waived = j.value("waived", false);
}

const DeviceRecord* Registry::by_point(const std::string& point_id) const
{
    const auto it = point_owner.find(point_id);
    if (it == point_owner.end())
        return nullptr;
    const auto d = devices.find(it->second);
    return d == devices.end() ? nullptr : &d->second;
}

std::vector<std::string> Registry::points() const
{
    std::vector<std::string> out;
    out.reserve(point_owner.size());
    for (const auto& [p, d] : point_owner)
        out.push_back(p);
    return out;
}

namespace {

template <typename T>
void put_opt(json& j, const char* key, const std::optional<T>& v)
{
    if (v)
        j[key] = *v;
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key)
{
    if (!j.contains(key) || j[key].is_null())
        return std::nullopt;
    return j[key].get<T>();
}

void validate_record(const DeviceRecord& rec)
{
    if (rec.device_id.empty())
        throw ValidationError("device_id must not be empty");
    if (rec.point_ids.empty())
        throw ValidationError("device " + rec.device_id + " owns no points");
    if (!(rec.operating_range.min < rec.operating_range.max))
        throw ValidationError("device " + rec.device_id + " operating range min must be below max");
    if (rec.baseline.std < 0)
        throw ValidationError("device " + rec.device_id + " baseline std must be non-negative");
}

}  // namespace

void to_json(json& j, const RuleTrigger& t)
{
    j = json{{"event_kind", t.event_kind}};
    put_opt(j, "system", t.system);
    put_opt(j, "system_kind", t.system_kind);
    put_opt(j, "min_severity", t.min_severity);
    put_opt(j, "mode", t.mode);
}

void from_json(const json& j, RuleTrigger& t)
{
    t.event_kind = j.at("event_kind").get<std::string>();
    t.system = get_opt<std::string>(j, "system");
    t.system_kind = get_opt<std::string>(j, "system_kind");
    t.min_severity = get_opt<std::string>(j, "min_severity");
    t.mode = get_opt<std::string>(j, "mode");
}

void to_json(json& j, const RuleAction& a)
{
    j = json{{"actor_id", a.actor_id},
             {"verb", a.verb},
             {"parameters", a.parameters},
             {"priority", a.priority},
             {"awaits_resolution", a.awaits_resolution}};
}

void from_json(const json& j, RuleAction& a)
{
    a.actor_id = j.at("actor_id").get<std::string>();
    a.verb = j.at("verb").get<std::string>();
    a.parameters = j.value("parameters", json::object());
    a.priority = j.value("priority", 0);
    a.awaits_resolution = j.value("awaits_resolution", true);
}

void to_json(json& j, const Rule& r)
{
    j = json{{"rule_id", r.rule_id}, {"trigger", r.trigger},   {"actions", r.actions},
             {"priority", r.priority}, {"enabled", r.enabled}, {"default", r.is_default}};
}

void from_json(const json& j, Rule& r)
{
    r.rule_id = j.at("rule_id").get<std::string>();
    r.trigger = j.at("trigger").get<RuleTrigger>();
    r.actions = j.value("actions", std::vector<RuleAction>{});
    r.priority = j.value("priority", 100);
    r.enabled = j.value("enabled", true);
    r.is_default = j.value("default", false);
}

void validate_rules(const std::vector<Rule>& rules, const std::set<std::string>& actor_ids)
{
    std::set<std::string> ids;
    std::set<std::string> defaults;
    for (const auto& r : rules) {
        if (r.rule_id.empty())
            throw ValidationError("rule without rule_id");
        if (!ids.insert(r.rule_id).second)
            throw ValidationError("duplicate rule_id " + r.rule_id);
        if (r.is_default && !defaults.insert(r.trigger.event_kind).second)
            throw ValidationError("more than one default rule for event kind " + r.trigger.event_kind);
        for (const auto& a : r.actions)
            if (!actor_ids.count(a.actor_id))
                throw ValidationError("rule " + r.rule_id + " names unknown actor " + a.actor_id);
    }
}

void to_json(json& j, const AggregateRow& r)
{
    j = json{{"point_id", r.point_id}, {"hour", r.hour}, {"count", r.count}, {"mean", r.mean},
             {"min", r.min},           {"max", r.max},   {"std", r.std}};
}

void from_json(const json& j, AggregateRow& r)
{
    r.point_id = j.at("point_id").get<std::string>();
    r.hour = j.at("hour").get<std::int64_t>();
    r.count = j.at("count").get<std::int64_t>();
    r.mean = j.at("mean").get<double>();
    r.min = j.at("min").get<double>();
    r.max = j.at("max").get<double>();
    r.std = j.at("std").get<double>();
}

void to_json(json& j, const Coverage& c)
{
    j = json{{"requested", json::array({c.requested_from, c.requested_to})},
             {"available", c.available_from ? json::array({*c.available_from, *c.available_to}) : json(nullptr)},
             {"complete", c.complete}};
}

HistStat parse_stat(const std::string& name)
{
    if (name == "mean")
        return HistStat::Mean;
    if (name == "min")
        return HistStat::Min;
    if (name == "max")
        return HistStat::Max;
    if (name == "std")
        return HistStat::Std;
    if (name == "count")
        return HistStat::Count;
    throw ValidationError("unknown statistic '" + name + "' (mean, min, max, std, count)");
}

void to_json(json& j, const BkrConfig& c)
{
    j = json{{"retention_ticks", c.retention_ticks},
             {"ticks_per_hour", c.ticks_per_hour},
             {"min_baseline_samples", c.min_baseline_samples},
             {"rt_fsync", c.rt_fsync}};
}

void from_json(const json& j, BkrConfig& c)
{
    c.retention_ticks = j.value("retention_ticks", c.retention_ticks);
    c.ticks_per_hour = j.value("ticks_per_hour", c.ticks_per_hour);
    c.min_baseline_samples = j.value("min_baseline_samples", c.min_baseline_samples);
    c.rt_fsync = j.value("rt_fsync", c.rt_fsync);
}

Bkr::Bkr(std::string root, BkrConfig config)
    : root_(std::move(root)), config_(config), registry_(std::make_shared<const Registry>())
{
    if (config_.retention_ticks <= 0 || config_.ticks_per_hour <= 0)
        throw ValidationError("retention_ticks and ticks_per_hour must be positive");
    if (root_.empty())
        return;
    for (const char* d : {"registry", "rules", "rt", "hist"})
        fs::create_directories(path(d));
    load();
    agg_log_ = std::make_unique<AppendFile>(path("hist/aggregates.jsonl"), true);
    baseline_log_ = std::make_unique<AppendFile>(path("hist/baselines.jsonl"), true);
    schedule_log_ = std::make_unique<AppendFile>(path("hist/schedules.jsonl"), true);
    report_log_ = std::make_unique<AppendFile>(path("hist/reports.jsonl"), true);
    journal_log_ = std::make_unique<AppendFile>(path("hist/journal.jsonl"), true);
    deadletter_log_ = std::make_unique<AppendFile>(path("rt/deadletter.jsonl"), config_.rt_fsync);
}

void Bkr::load()
{
    if (auto text = read_file(path("registry/registry.json"))) {
        const auto j = json::parse(*text);
        auto reg = std::make_shared<Registry>();
        reg->version = j.at("version").get<std::uint64_t>();
        for (const auto& d : j.at("devices")) {
            auto rec = d.get<DeviceRecord>();
            for (const auto& p : rec.point_ids)
                reg->point_owner[p] = rec.device_id;
            reg->devices[rec.device_id] = std::move(rec);
        }
        registry_ = std::move(reg);
    }
    if (auto text = read_file(path("rules/rules.json")))
        rules_ = json::parse(*text).get<std::vector<Rule>>();

    std::map<Tick, StateVector> rt;
    for (const auto& f : fs::directory_iterator(path("rt"))) {
        const auto name = f.path().filename().string();
        if (name.rfind("seg-", 0) != 0)
            continue;
        for (const auto& line : read_lines(f.path().string())) {
            const auto j = json::parse(line, nullptr, false);
            if (j.is_discarded())
                continue;
            auto sv = j.get<StateVector>();
            rt.emplace(sv.tick, std::move(sv));
        }
    }
    for (auto& [t, sv] : rt)
        rt_.push_back(std::move(sv));

    for (const auto& line : read_lines(path("hist/aggregates.jsonl"))) {
        const auto j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            continue;
        for (const auto& r : j.at("rows")) {
            auto row = r.get<AggregateRow>();
            aggregates_.emplace(std::make_pair(row.point_id, row.hour), std::move(row));
        }
    }
    const auto load_json_lines = [](const std::string& p) {
        std::vector<json> out;
        for (const auto& line : read_lines(p)) {
            auto j = json::parse(line, nullptr, false);
            if (!j.is_discarded())
                out.push_back(std::move(j));
        }
        return out;
    };
    baselines_ = load_json_lines(path("hist/baselines.jsonl"));
    schedules_ = load_json_lines(path("hist/schedules.jsonl"));
    reports_ = load_json_lines(path("hist/reports.jsonl"));
    journal_ = load_json_lines(path("hist/journal.jsonl"));
    if (auto text = read_file(path("hist/watermark.json")))
        watermark_ = json::parse(*text).at("exported_to").get<Tick>();
    evict_rt();
}

void Bkr::persist_registry_locked() const
{
    if (root_.empty())
        return;
    json devices = json::array();
    for (const auto& [id, d] : registry_->devices)
        devices.push_back(d);
    write_file_atomic(path("registry/registry.json"),
                      json{{"version", registry_->version}, {"devices", devices}}.dump(2), true);
}

void Bkr::register_device(const DeviceRecord& rec)
{
    validate_record(rec);
    std::lock_guard lock(registry_mu_);
    if (registry_->devices.count(rec.device_id))
        throw ConflictError("device " + rec.device_id + " already registered");
    for (const auto& p : rec.point_ids)
        if (const auto it = registry_->point_owner.find(p); it != registry_->point_owner.end())
            throw ConflictError("point " + p + " already owned by " + it->second);
    auto next = std::make_shared<Registry>(*registry_);
    next->devices[rec.device_id] = rec;
    for (const auto& p : rec.point_ids)
        next->point_owner[p] = rec.device_id;
    ++next->version;
    registry_ = std::move(next);
    persist_registry_locked();
}

void Bkr::update_device(const DeviceRecord& rec)
{
    validate_record(rec);
    std::lock_guard lock(registry_mu_);
    const auto it = registry_->devices.find(rec.device_id);
    if (it == registry_->devices.end())
        throw NotFoundError("device " + rec.device_id + " is not registered");
    for (const auto& p : rec.point_ids)
        if (const auto o = registry_->point_owner.find(p);
            o != registry_->point_owner.end() && o->second != rec.device_id)
            throw ConflictError("point " + p + " already owned by " + o->second);
    auto next = std::make_shared<Registry>(*registry_);
    for (const auto& p : it->second.point_ids)
        next->point_owner.erase(p);
    next->devices[rec.device_id] = rec;
    for (const auto& p : rec.point_ids)
        next->point_owner[p] = rec.device_id;
    ++next->version;
    registry_ = std::move(next);
    persist_registry_locked();
}

std::shared_ptr<const Registry> Bkr::registry() const
{
    std::lock_guard lock(registry_mu_);
    return registry_;
}

std::optional<DeviceRecord> Bkr::get_device(const std::string& device_id) const
{
    const auto reg = registry();
    const auto it = reg->devices.find(device_id);
    if (it == reg->devices.end())
        return std::nullopt;
    return it->second;
}

void Bkr::update_baseline(const std::string& point_id, const Baseline& stats, BaselineProvenance provenance,
                          Tick at)
{
    if (stats.sample_count < config_.min_baseline_samples)
        throw InsufficientDataError("baseline for " + point_id + " has " + std::to_string(stats.sample_count) +
                                    " samples, need " + std::to_string(config_.min_baseline_samples));
    if (stats.std < 0 || !std::isfinite(stats.mean) || !std::isfinite(stats.std))
        throw ValidationError("baseline for " + point_id + " is not finite");
    json record;
    {
        std::lock_guard lock(registry_mu_);
        const auto* dev = registry_->by_point(point_id);
        if (!dev)
            throw NotFoundError("point " + point_id + " is not registered");
        record = json{{"point_id", point_id},   {"device_id", dev->device_id},
                      {"provenance", provenance}, {"tick", at},
                      {"archived", dev->baseline}, {"activated", stats}};
        {
            std::lock_guard hist(hist_mu_);
            if (baseline_log_)
                baseline_log_->append(to_line(record));
            baselines_.push_back(record);
        }
        auto next = std::make_shared<Registry>(*registry_);
        next->devices[dev->device_id].baseline = stats;
        ++next->version;
        registry_ = std::move(next);
        persist_registry_locked();
    }
}

std::vector<json> Bkr::baseline_archive() const
{
    std::lock_guard lock(hist_mu_);
    return baselines_;
}

void Bkr::store_rules(const std::vector<Rule>& rules)
{
    std::lock_guard lock(registry_mu_);
    rules_ = rules;
    if (!root_.empty())
        write_file_atomic(path("rules/rules.json"), json(rules_).dump(2), true);
}

std::vector<Rule> Bkr::rules() const
{
    std::lock_guard lock(registry_mu_);
    return rules_;
}

AppendFile& Bkr::rt_segment(std::int64_t hour)
{
    auto it = rt_segments_.find(hour);
    if (it == rt_segments_.end())
        it = rt_segments_
                 .emplace(hour, AppendFile(path("rt/seg-" + std::to_string(hour) + ".jsonl"), config_.rt_fsync))
                 .first;
    return it->second;
}

void Bkr::write_rt(const StateVector& sv)
{
    std::lock_guard lock(rt_mu_);
    if (rt_failures_pending_ > 0) {
        --rt_failures_pending_;
        throw UnavailableError("real-time zone unavailable");
    }
    if (!rt_.empty()) {
        if (rt_.back().tick == sv.tick && rt_.back() == sv)
            return;  // replayed write of the same tick
        if (sv.tick <= rt_.back().tick)
            throw ValidationError("real-time write for tick " + std::to_string(sv.tick) + " is not after tick " +
                                  std::to_string(rt_.back().tick));
    }
    if (!root_.empty())
        rt_segment(sv.tick / config_.ticks_per_hour).append(encode(sv));
    rt_.push_back(sv);
}

RtRange Bkr::read_rt(Tick from, Tick to) const
{
    std::lock_guard lock(rt_mu_);
    RtRange out;
    out.coverage.requested_from = from;
    out.coverage.requested_to = to;
    const auto begin = std::lower_bound(rt_.begin(), rt_.end(), from,
                                        [](const StateVector& sv, Tick t) { return sv.tick < t; });
    for (auto it = begin; it != rt_.end() && it->tick < to; ++it)
        out.vectors.push_back(*it);
    if (!out.vectors.empty()) {
        out.coverage.available_from = out.vectors.front().tick;
        out.coverage.available_to = out.vectors.back().tick + 1;
    }
    out.coverage.complete = to <= from || static_cast<Tick>(out.vectors.size()) == to - from;
    return out;
}

std::optional<StateVector> Bkr::latest_rt() const
{
    std::lock_guard lock(rt_mu_);
    if (rt_.empty())
        return std::nullopt;
    return rt_.back();
}

std::vector<StateVector> Bkr::rt_tail(std::size_t n) const
{
    std::lock_guard lock(rt_mu_);
    n = std::min(n, rt_.size());
    return {rt_.end() - static_cast<std::ptrdiff_t>(n), rt_.end()};
}

std::size_t Bkr::rt_size() const
{
    std::lock_guard lock(rt_mu_);
    return rt_.size();
}

std::optional<Tick> Bkr::rt_oldest() const
{
    std::lock_guard lock(rt_mu_);
    if (rt_.empty())
        return std::nullopt;
    return rt_.front().tick;
}

std::size_t Bkr::evict_rt()
{
    const auto wm = export_watermark();
    std::lock_guard lock(rt_mu_);
    if (rt_.empty() || !wm)
        return 0;
    const Tick keep_from = rt_.back().tick - config_.retention_ticks + 1;
    std::size_t n = 0;
    while (!rt_.empty() && rt_.front().tick < keep_from && rt_.front().tick < *wm) {
        rt_.pop_front();
        ++n;
    }
    if (!root_.empty() && n > 0) {
        const auto first_hour = rt_.empty() ? INT64_MAX : rt_.front().tick / config_.ticks_per_hour;
        for (const auto& f : fs::directory_iterator(path("rt"))) {
            const auto name = f.path().stem().string();
            if (name.rfind("seg-", 0) != 0)
                continue;
            const auto hour = std::stoll(name.substr(4));
            if (hour < first_hour) {
                rt_segments_.erase(hour);
                fs::remove(f.path());
            }
        }
    }
    return n;
}

void Bkr::dead_letter(const StateVector& sv, const std::string& reason)
{
    std::lock_guard lock(rt_mu_);
    spdlog::error("bkr: dead-lettered state vector for tick {}: {}", sv.tick, reason);
    if (deadletter_log_)
        deadletter_log_->append(to_line(json{{"reason", reason}, {"vector", sv}}));
}

void Bkr::fail_next_rt_writes(int n)
{
    std::lock_guard lock(rt_mu_);
    rt_failures_pending_ = n;
}

std::size_t Bkr::write_hist(const std::vector<AggregateRow>& rows)
{
    std::lock_guard lock(hist_mu_);
    std::vector<AggregateRow> fresh;
    std::set<std::pair<std::string, std::int64_t>> batch_keys;
    for (const auto& r : rows) {
        auto key = std::make_pair(r.point_id, r.hour);
        if (aggregates_.count(key) || !batch_keys.insert(key).second)
            continue;
        fresh.push_back(r);
    }
    if (fresh.empty())
        return 0;
    if (agg_log_)
        agg_log_->append(to_line(json{{"rows", fresh}}));
    for (auto& r : fresh)
        aggregates_.emplace(std::make_pair(r.point_id, r.hour), r);
    return fresh.size();
}

Series Bkr::query_hist(const std::string& point_id, std::int64_t from_hour, std::int64_t to_hour,
                       HistStat stat) const
{
    std::lock_guard lock(hist_mu_);
    Series out;
    out.coverage.requested_from = from_hour;
    out.coverage.requested_to = to_hour;
    bool complete = true;
    for (auto h = from_hour; h < to_hour; ++h) {
        const auto it = aggregates_.find({point_id, h});
        if (it == aggregates_.end()) {
            out.values.emplace_back(std::nullopt);
            complete = false;
            continue;
        }
        const auto& r = it->second;
        if (!out.coverage.available_from)
            out.coverage.available_from = h;
        out.coverage.available_to = h + 1;
        switch (stat) {
        case HistStat::Mean: out.values.emplace_back(r.mean); break;
        case HistStat::Min: out.values.emplace_back(r.min); break;
        case HistStat::Max: out.values.emplace_back(r.max); break;
        case HistStat::Std: out.values.emplace_back(r.std); break;
        case HistStat::Count: out.values.emplace_back(static_cast<double>(r.count)); break;
        }
    }
    out.coverage.complete = complete;
    return out;
}

std::vector<AggregateRow> Bkr::aggregates() const
{
    std::lock_guard lock(hist_mu_);
    std::vector<AggregateRow> out;
    out.reserve(aggregates_.size());
    for (const auto& [k, r] : aggregates_)
        out.push_back(r);
    return out;
}

std::optional<Tick> Bkr::export_watermark() const
{
    std::lock_guard lock(hist_mu_);
    return watermark_;
}

void Bkr::set_export_watermark(Tick exported_to)
{
    std::lock_guard lock(hist_mu_);
    if (watermark_ && exported_to < *watermark_)
        throw RejectedError("export watermark cannot move backwards");
    watermark_ = exported_to;
    if (!root_.empty())
        write_file_atomic(path("hist/watermark.json"), json{{"exported_to", exported_to}}.dump(), true);
}

void Bkr::append_schedule(const json& schedule)
{
    std::lock_guard lock(hist_mu_);
    if (schedule_log_)
        schedule_log_->append(to_line(schedule));
    schedules_.push_back(schedule);
}

std::vector<json> Bkr::schedules() const
{
    std::lock_guard lock(hist_mu_);
    return schedules_;
}

void Bkr::append_report(const json& report)
{
    std::lock_guard lock(hist_mu_);
    if (report_log_)
        report_log_->append(to_line(report));
    reports_.push_back(report);
}

std::vector<json> Bkr::reports() const
{
    std::lock_guard lock(hist_mu_);
    return reports_;
}

void Bkr::append_journal(const json& record)
{
    std::lock_guard lock(hist_mu_);
    if (journal_log_)
        journal_log_->append(to_line(record));
    journal_.push_back(record);
}

std::vector<json> Bkr::journal() const
{
    std::lock_guard lock(hist_mu_);
    return journal_;
}

bool Bkr::commissioned() const
{
    std::lock_guard lock(hist_mu_);
    return std::any_of(reports_.begin(), reports_.end(), [](const json& r) {
        return r.value("kind", std::string{}) == "commissioning" && r.value("complete", false);
    });
}

json Bkr::export_archive() const
{
    json out;
    out["format"] = "sb-bkr-archive/1";
    out["config"] = config_;
    {
        const auto reg = registry();
        json devices = json::array();
        for (const auto& [id, d] : reg->devices)
            devices.push_back(d);
        out["registry"] = json{{"version", reg->version}, {"devices", devices}};
    }
    out["rules"] = rules();
    {
        std::lock_guard lock(rt_mu_);
        out["rt"] = json::array();
        for (const auto& sv : rt_)
            out["rt"].push_back(sv);
    }
    std::lock_guard lock(hist_mu_);
    json aggs = json::array();
    for (const auto& [k, r] : aggregates_)
        aggs.push_back(r);
    out["hist"] = json{{"aggregates", aggs},  {"baselines", baselines_}, {"schedules", schedules_},
                       {"reports", reports_}, {"journal", journal_},     {"watermark", watermark_ ? json(*watermark_) : json(nullptr)}};
    return out;
}

}  // namespace sb::bkr
