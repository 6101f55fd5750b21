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

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sb/common.hpp"
#include "sb/state_vector.hpp"

/// Building knowledge repository: device registry, baselines, rules, the
/// real-time zone (recent StateVectors) and the append-only historical zone.
///
/// On-disk layout under the root directory:
///
///     registry/registry.json   registry snapshot (version + device records)
///     rules/rules.json         rules store
///     rt/seg-<hour>.jsonl      one StateVector per line, one file per hour
///     rt/deadletter.jsonl      vectors that could not be written
///     hist/aggregates.jsonl    one batch of hourly aggregate rows per line
///     hist/baselines.jsonl     archived baselines with provenance
///     hist/schedules.jsonl     optimal parameter schedules
///     hist/reports.jsonl       ETL and commissioning reports
///     hist/journal.jsonl       mode transitions and audit chain
///     hist/watermark.json      ETL export watermark
namespace sb::bkr {

enum class BaselineProvenance { StartUpCx, OCx };

NLOHMANN_JSON_SERIALIZE_ENUM(BaselineProvenance,
                             {{BaselineProvenance::StartUpCx, "StartUpCx"}, {BaselineProvenance::OCx, "OCx"}})

struct Baseline {
    double mean = 0.0;
    double std = 0.0;
    std::int64_t sample_count = 0;
    Tick window_from = 0;
    Tick window_to = 0;

    bool operator==(const Baseline&) const = default;
};

void to_json(json& j, const Baseline& b);
void from_json(const json& j, Baseline& b);

/// Population statistics over `values`; window bounds are left to the caller.
Baseline compute_baseline(const std::vector<double>& values);

struct DeviceRecord {
    std::string device_id;
    std::vector<std::string> point_ids;
    std::string device_class;
    std::string system;
    std::string system_kind;
    Range operating_range;
    std::string unit;
    Baseline baseline;
    Source source = Source::Native;
    TimestampMs commissioned_at = 0;
    bool waived = false;

    bool operator==(const DeviceRecord&) const = default;
};

void to_json(json& j, const DeviceRecord& d);
void from_json(const json& j, DeviceRecord& d);

/// Immutable registry snapshot. Readers hold a shared_ptr to a snapshot and
/// never observe a partial registration.
struct Registry {
    std::uint64_t version = 0;
    std::map<std::string, DeviceRecord> devices;
    std::map<std::string, std::string> point_owner;  // point_id -> device_id

    [[nodiscard]] const DeviceRecord* by_point(const std::string& point_id) const;
    [[nodiscard]] std::vector<std::string> points() const;
};

struct RuleTrigger {
    std::string event_kind;  // Fault, ConceptDrift, FaultResolved, CommissioningFailure, ...
    std::optional<std::string> system;
    std::optional<std::string> system_kind;
    std::optional<std::string> min_severity;
    std::optional<std::string> mode;
};

struct RuleAction {
    std::string actor_id;
    std::string verb;
    json parameters = json::object();
    int priority = 0;
    bool awaits_resolution = true;
};

struct Rule {
    std::string rule_id;
    RuleTrigger trigger;
    std::vector<RuleAction> actions;
    int priority = 100;  // lower evaluates first
    bool enabled = true;
    bool is_default = false;
};

void to_json(json& j, const RuleTrigger& t);
void from_json(const json& j, RuleTrigger& t);
void to_json(json& j, const RuleAction& a);
void from_json(const json& j, RuleAction& a);
void to_json(json& j, const Rule& r);
void from_json(const json& j, Rule& r);

/// Throws ValidationError when an action names an unknown actor or more
/// than one default rule claims an event kind.
void validate_rules(const std::vector<Rule>& rules, const std::set<std::string>& actor_ids);

struct AggregateRow {
    std::string point_id;
    std::int64_t hour = 0;  // tick / ticks_per_hour
    std::int64_t count = 0;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    double std = 0.0;

    bool operator==(const AggregateRow&) const = default;
};

void to_json(json& j, const AggregateRow& r);
void from_json(const json& j, AggregateRow& r);

struct Coverage {
    std::int64_t requested_from = 0;
    std::int64_t requested_to = 0;  // exclusive
    std::optional<std::int64_t> available_from;
    std::optional<std::int64_t> available_to;  // exclusive
    bool complete = false;
};

void to_json(json& j, const Coverage& c);

struct RtRange {
    std::vector<StateVector> vectors;
    Coverage coverage;
};

enum class HistStat { Mean, Min, Max, Std, Count };

/// One value per requested hour; nullopt marks a gap.
struct Series {
    std::vector<std::optional<double>> values;
    Coverage coverage;
};

HistStat parse_stat(const std::string& name);

struct BkrConfig {
    std::int64_t retention_ticks = 1440;
    std::int64_t ticks_per_hour = 60;
    std::int64_t min_baseline_samples = 60;
    bool rt_fsync = false;
};

void to_json(json& j, const BkrConfig& c);
void from_json(const json& j, BkrConfig& c);

class Bkr {
public:
    /// Opens (and recovers) a repository rooted at `root`; an empty root
    /// keeps everything in memory.
    explicit Bkr(std::string root = {}, BkrConfig config = {});

    Bkr(const Bkr&) = delete;
    Bkr& operator=(const Bkr&) = delete;

    [[nodiscard]] const BkrConfig& config() const noexcept { return config_; }
    [[nodiscard]] const std::string& root() const noexcept { return root_; }

    // Registry
    void register_device(const DeviceRecord& rec);
    void update_device(const DeviceRecord& rec);
    [[nodiscard]] std::shared_ptr<const Registry> registry() const;
    [[nodiscard]] std::optional<DeviceRecord> get_device(const std::string& device_id) const;

    /// Archives the active baseline with its provenance, then activates the
    /// new one. Throws InsufficientDataError below the configured minimum.
    void update_baseline(const std::string& point_id, const Baseline& stats, BaselineProvenance provenance,
                         Tick at);
    [[nodiscard]] std::vector<json> baseline_archive() const;

    // Rules
    void store_rules(const std::vector<Rule>& rules);
    [[nodiscard]] std::vector<Rule> rules() const;

    // Real-time zone
    void write_rt(const StateVector& sv);
    [[nodiscard]] RtRange read_rt(Tick from, Tick to) const;  // [from, to)
    [[nodiscard]] std::optional<StateVector> latest_rt() const;
    [[nodiscard]] std::vector<StateVector> rt_tail(std::size_t n) const;
    [[nodiscard]] std::size_t rt_size() const;
    [[nodiscard]] std::optional<Tick> rt_oldest() const;
    /// Drops vectors outside the retention window, never past the export
    /// watermark. Returns the number evicted.
    std::size_t evict_rt();
    void dead_letter(const StateVector& sv, const std::string& reason);
    /// Test hook: the next `n` RT writes fail with UnavailableError.
    void fail_next_rt_writes(int n);

    // Historical zone
    /// Appends rows whose (point, hour) key is new; returns how many were
    /// written. The batch lands atomically.
    std::size_t write_hist(const std::vector<AggregateRow>& rows);
    [[nodiscard]] Series query_hist(const std::string& point_id, std::int64_t from_hour, std::int64_t to_hour,
                                    HistStat stat) const;
    [[nodiscard]] std::vector<AggregateRow> aggregates() const;
    /// Exclusive bound: every tick below it has been exported.
    [[nodiscard]] std::optional<Tick> export_watermark() const;
    void set_export_watermark(Tick exported_to);

    void append_schedule(const json& schedule);
    [[nodiscard]] std::vector<json> schedules() const;
    void append_report(const json& report);
    [[nodiscard]] std::vector<json> reports() const;
    void append_journal(const json& record);
    [[nodiscard]] std::vector<json> journal() const;

    /// True when the historical zone carries a completed start-up
    /// commissioning report ({"kind": "commissioning", "complete": true}).
    [[nodiscard]] bool commissioned() const;

    /// Portable single-document export of the whole repository.
    [[nodiscard]] json export_archive() const;

private:
    void load();
    void persist_registry_locked() const;
    std::string path(const std::string& rel) const { return root_ + "/" + rel; }
    AppendFile& rt_segment(std::int64_t hour);

    std::string root_;
    BkrConfig config_;

    mutable std::mutex registry_mu_;
    std::shared_ptr<const Registry> registry_;
    std::vector<Rule> rules_;

    mutable std::mutex rt_mu_;
    std::deque<StateVector> rt_;
    std::map<std::int64_t, AppendFile> rt_segments_;
    int rt_failures_pending_ = 0;

    mutable std::mutex hist_mu_;
    std::map<std::pair<std::string, std::int64_t>, AggregateRow> aggregates_;
    std::vector<json> baselines_;
    std::vector<json> schedules_;
    std::vector<json> reports_;
    std::vector<json> journal_;
    std::optional<Tick> watermark_;
    std::unique_ptr<AppendFile> agg_log_, baseline_log_, schedule_log_, report_log_, journal_log_;
    std::unique_ptr<AppendFile> deadletter_log_;
};

}  // namespace sb::bkr
