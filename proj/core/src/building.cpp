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

#include "sb/building.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <spdlog/spdlog.h>

#include "sb/reference_building.hpp"

namespace sb::autonomic {

namespace fs = std::filesystem;

namespace {

std::string make_id(const char* prefix, std::uint64_t n)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s-%06llu", prefix, static_cast<unsigned long long>(n));
    return buf;
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

constexpr Tick kForever = std::numeric_limits<Tick>::max();

}  // namespace

// Configuration

std::vector<cdo::SearchSpace> reference_search_spaces()
{
    cdo::SearchSpace s;
    s.system = "chiller";
    s.actuator = "chiller";
    s.unit = "degC";
    s.operating_range = Range{4.0, 15.0};
    cdo::SearchWindow w;
    for (double v = 6.0; v <= 9.5 + 1e-9; v += 0.5)
        w.candidates.push_back(v);
    s.windows = {w};
    return {s};
}

RuntimeConfig default_runtime_config()
{
    RuntimeConfig c;
    c.building = reference_building();
    c.search_spaces = reference_search_spaces();
    c.actors = iface::default_actors();
    c.rules = iface::default_rules();
    c.classification = dnc::default_rule_table();
    // Fuel and run-state readings move whenever the generator is used.
    c.detector.classes["FuelLevel"].abs_tolerance = 10.0;
    return c;
}

std::vector<std::string> RuntimeConfig::validation_errors() const
{
    auto errors = building.validation_errors();
    const auto check = [&](bool ok, const std::string& msg) {
        if (!ok)
            errors.push_back(msg);
    };
    check(evaluation_horizon > 0, "evaluation_horizon must be positive");
    check(probe_ticks > 0, "probe_ticks must be positive");
    check(baseline_ticks > 0, "baseline_ticks must be positive");
    check(watchdog_ticks > 0, "watchdog_ticks must be positive");
    check(discovery_interval > 0, "discovery_interval must be positive");
    check(comfort_limits.min < comfort_limits.max, "comfort_limits must satisfy min < max");
    check(detector.window > 0 && detector.persistence > 0, "detector window and persistence must be positive");
    check(bkr.ticks_per_hour > 0 && bkr.retention_ticks > 0, "bkr ticks_per_hour and retention_ticks must be positive");
    for (const auto& s : search_spaces) {
        try {
            s.validate();
        } catch (const Error& e) {
            errors.push_back("search space " + s.system + ": " + e.what());
        }
    }
    try {
        iface::validate_rules(rules, iface::ActorDirectory(actors));
    } catch (const Error& e) {
        errors.push_back(std::string("rules: ") + e.what());
    }
    try {
        (void)dnc::RuleTableClassifier::from_json(classification);
    } catch (const std::exception& e) {
        errors.push_back(std::string("classification: ") + e.what());
    }
    if (legacy_mapping) {
        std::set<std::string> native;
        for (const auto& p : sim::point_catalog(building))
            native.insert(p.point_id);
        try {
            iface::LegacyAdapter(*legacy_mapping, native);
        } catch (const Error& e) {
            errors.push_back(std::string("legacy: ") + e.what());
        }
    }
    return errors;
}

json to_json(const RuntimeConfig& c)
{
    json j{{"building", c.building},
           {"bkr", c.bkr},
           {"detector", c.detector},
           {"optimizer", c.optimizer},
           {"search_spaces", c.search_spaces},
           {"evaluation_horizon", c.evaluation_horizon},
           {"probe_ticks", c.probe_ticks},
           {"baseline_ticks", c.baseline_ticks},
           {"watchdog_ticks", c.watchdog_ticks},
           {"discovery_interval", c.discovery_interval},
           {"actors", c.actors},
           {"rules", c.rules},
           {"classification", c.classification},
           {"transforms", c.transforms},
           {"comfort_limits", c.comfort_limits},
           {"quarantine_topic", c.quarantine_topic}};
    if (c.legacy_mapping)
        j["legacy"] = json{{"mapping", *c.legacy_mapping}, {"feed", c.legacy_feed}};
    return j;
}

RuntimeConfig load_runtime_config(const json& doc)
{
    if (!doc.is_object())
        throw ValidationError("configuration must be a JSON object");
    RuntimeConfig c = default_runtime_config();
    std::vector<std::string> errors;
    const auto field = [&](const char* key, auto&& parse) {
        if (!doc.contains(key))
            return;
        try {
            parse(doc.at(key));
        } catch (const std::exception& e) {
            errors.push_back(std::string(key) + ": " + e.what());
        }
    };
    static const std::set<std::string> known{
        "building", "bkr",      "detector",       "optimizer",  "search_spaces",  "evaluation_horizon",
        "probe_ticks", "baseline_ticks", "watchdog_ticks", "discovery_interval", "actors", "rules",
        "classification", "transforms", "legacy", "comfort_limits", "quarantine_topic"};
    for (const auto& [key, value] : doc.items())
        if (!known.count(key))
            errors.push_back("unknown key '" + key + "'");

    field("building", [&](const json& j) {
        if (j.is_string() && j.get<std::string>() == "reference")
            c.building = reference_building();
        else
            c.building = j.get<sim::SimConfig>();
    });
    field("bkr", [&](const json& j) { c.bkr = j.get<bkr::BkrConfig>(); });
    field("detector", [&](const json& j) { c.detector = j.get<cdo::DetectorConfig>(); });
    field("optimizer", [&](const json& j) { c.optimizer = j.get<cdo::OptimizerConfig>(); });
    field("search_spaces", [&](const json& j) { c.search_spaces = j.get<std::vector<cdo::SearchSpace>>(); });
    field("evaluation_horizon", [&](const json& j) { c.evaluation_horizon = j.get<Tick>(); });
    field("probe_ticks", [&](const json& j) { c.probe_ticks = j.get<Tick>(); });
    field("baseline_ticks", [&](const json& j) { c.baseline_ticks = j.get<Tick>(); });
    field("watchdog_ticks", [&](const json& j) { c.watchdog_ticks = j.get<Tick>(); });
    field("discovery_interval", [&](const json& j) { c.discovery_interval = j.get<Tick>(); });
    field("actors", [&](const json& j) { c.actors = j.get<std::vector<iface::ActorStub>>(); });
    field("rules", [&](const json& j) { c.rules = j.get<std::vector<bkr::Rule>>(); });
    field("classification", [&](const json& j) { c.classification = j; });
    field("transforms", [&](const json& j) { c.transforms = stream::parse_transforms(j); });
    field("legacy", [&](const json& j) {
        c.legacy_mapping = j.at("mapping").get<iface::LegacyMapping>();
        c.legacy_feed = j.value("feed", std::string{});
    });
    field("comfort_limits", [&](const json& j) { c.comfort_limits = j.get<Range>(); });
    field("quarantine_topic", [&](const json& j) { c.quarantine_topic = j.get<std::string>(); });

    for (auto& e : c.validation_errors())
        errors.push_back(std::move(e));
    if (!errors.empty()) {
        std::string msg;
        for (const auto& e : errors)
            msg += (msg.empty() ? "" : "; ") + e;
        throw ValidationError(msg);
    }
    return c;
}

// Reports shared with tests

json energy_summary(const bkr::Bkr& bkr, double tick_hours)
{
    const auto registry = bkr.registry();
    std::vector<std::string> meters;
    for (const auto& [id, d] : registry->devices)
        if (d.device_class == "PowerMeter" && (d.system_kind == "PowerSupply" || d.system_kind == "BackupGenerator"))
            meters.insert(meters.end(), d.point_ids.begin(), d.point_ids.end());
    std::sort(meters.begin(), meters.end());

    const auto watermark = bkr.export_watermark().value_or(0);
    const auto tph = bkr.config().ticks_per_hour;
    std::map<std::string, double> kwh;
    std::map<std::string, std::int64_t> ticks;
    for (const auto& row : bkr.aggregates()) {
        if (!std::count(meters.begin(), meters.end(), row.point_id) || (row.hour + 1) * tph > watermark)
            continue;
        kwh[row.point_id] += row.mean * static_cast<double>(row.count) * tick_hours;
        ticks[row.point_id] += row.count;
    }
    const auto latest = bkr.latest_rt();
    if (latest) {
        for (const auto& sv : bkr.read_rt(watermark, latest->tick + 1).vectors)
            for (const auto& p : meters)
                if (const auto v = sv.values.find(p); v != sv.values.end()) {
                    kwh[p] += v->second.value * tick_hours;
                    ++ticks[p];
                }
    }
    json per = json::object();
    double total = 0.0;
    for (const auto& p : meters) {
        per[p] = json{{"kwh", kwh[p]}, {"ticks", ticks[p]}};
        total += kwh[p];
    }
    return json{{"meters", per}, {"total_kwh", total}, {"tick_hours", tick_hours}};
}

json golden_projection(const json& rec)
{
    static const std::vector<std::string> keys{"type",   "tick",      "from",  "to",       "stimulus", "kind",
                                               "target", "system",    "actor_id", "verb",  "status",   "resolution",
                                               "reason", "provenance", "trigger", "complete", "actuator"};
    json out = json::object();
    for (const auto& k : keys)
        if (rec.contains(k))
            out[k] = rec[k];
    return out;
}

// Building

Building::Building(RuntimeConfig config, sim::ScenarioScript scenario, std::string dir)
    : config_(std::move(config)),
      dir_(std::move(dir)),
      sim_(config_.building, scenario),
      detector_(config_.detector),
      iface_(iface::ActorDirectory(config_.actors), config_.rules),
      classifier_(dnc::RuleTableClassifier::from_json(config_.classification))
{
    if (const auto errors = config_.validation_errors(); !errors.empty())
        throw ValidationError(errors.front());
    if (const auto errors = scenario.validation_errors(config_.building); !errors.empty())
        throw ValidationError("scenario: " + errors.front());

    if (dir_.empty()) {
        broker_ = std::make_unique<broker::Broker>();
        bkr_ = std::make_unique<bkr::Bkr>(std::string{}, config_.bkr);
    } else {
        fs::create_directories(dir_);
        broker_ = std::make_unique<broker::Broker>(dir_ + "/broker");
        bkr_ = std::make_unique<bkr::Bkr>(dir_ + "/bkr", config_.bkr);
    }
    bkr_->store_rules(config_.rules);

    for (const auto& p : sim_.catalog()) {
        topic_of_[p.point_id] = lower(json(p.system_kind).get<std::string>());
        datasheet_[p.point_id] = dnc::DatasheetEntry{p.device_id, p.system_id, json(p.system_kind).get<std::string>(),
                                                     p.unit, p.range};
    }
    if (config_.legacy_mapping) {
        std::set<std::string> native;
        for (const auto& [id, topic] : topic_of_)
            native.insert(id);
        legacy_ = std::make_unique<iface::LegacyAdapter>(*config_.legacy_mapping, native);
        if (!config_.legacy_feed.empty()) {
            const auto text = read_file(config_.legacy_feed);
            if (!text)
                throw NotFoundError("legacy feed " + config_.legacy_feed + " not found");
            legacy_rows_ = iface::parse_legacy_csv(*text);
            std::stable_sort(legacy_rows_.begin(), legacy_rows_.end(),
                             [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
        }
    }

    stream::PipelineConfig pc;
    pc.quarantine_topic = config_.quarantine_topic;
    pc.epoch_ms = config_.building.epoch_ms;
    pc.tick_ms = static_cast<std::int64_t>(config_.building.tick_seconds) * 1000;
    pipeline_ = std::make_unique<stream::Pipeline>(*broker_, *bkr_, config_.transforms, pc);

    // Resume after the last persisted tick; the plant keeps running while
    // the software is down, so the simulator is fast-forwarded.
    if (const auto latest = bkr_->latest_rt())
        tick_ = latest->tick + 1;
    while (sim_.tick() < tick_)
        sim_.step({});
    for (const auto& s : bkr_->schedules()) {
        if (!s.contains("entries") || !s.contains("actuator"))
            continue;
        schedules_[s.value("system", std::string{})] = s["entries"].get<std::vector<ScheduleEntry>>();
        ActuatorCommand cmd;
        cmd.command_id = "resume-" + std::to_string(tick_) + "-" + s.value("system", std::string{});
        cmd.issuer = "autonomic";
        cmd.actuator_id = s["actuator"].get<std::string>();
        cmd.verb = "set_schedule";
        cmd.schedule = schedules_[s.value("system", std::string{})];
        if (tick_ > 0)
            commands_.send(cmd);
    }

    BuildingMode initial;
    if (bkr_->commissioned()) {
        const auto history = replay(bkr_->journal());
        if (!history.empty())
            initial = BuildingMode{history.back().mode, history.back().tick, "journal replay"};
    }
    machine_ = ModeMachine(initial, [this](const json& rec) { record(rec); });
    if (tick_ > 0)
        record(json{{"type", "restart"}, {"tick", tick_}, {"mode", initial.mode}});
    if (initial.mode == Mode::Initializing)
        start_probe(tick_, false);
}

Building::~Building()
{
    for (auto& j : jobs_)
        if (j.result.valid())
            j.result.wait();
}

void Building::record(json rec)
{
    bkr_->append_journal(rec);
    const auto type = rec.value("type", std::string{});
    push_stream(type == "transition" || type == "anomaly" ? "mode" : type, std::move(rec));
}

void Building::push_stream(const std::string& type, json data)
{
    {
        std::lock_guard lk(stream_mu_);
        stream_.push_back({stream_.size() + 1, type, std::move(data)});
    }
    stream_cv_.notify_all();
}

std::vector<StreamItem> Building::stream_after(std::uint64_t after, std::chrono::milliseconds timeout) const
{
    std::unique_lock lk(stream_mu_);
    stream_cv_.wait_for(lk, timeout, [&] { return stream_.size() > after; });
    if (stream_.size() <= after)
        return {};
    return {stream_.begin() + static_cast<std::ptrdiff_t>(after), stream_.end()};
}

void Building::send_command(const ActuatorCommand& cmd) { commands_.send(cmd); }

void Building::apply_dispatch(iface::Dispatch d, Concern* concern)
{
    for (const auto& cmd : d.commands) {
        send_command(cmd);
        if (concern)
            concern->healed.insert(cmd.actuator_id);
    }
    for (auto& rec : d.journal)
        record(std::move(rec));
    for (const auto& t : d.tickets) {
        if (concern) {
            if (t.rule_id == "escalation")
                concern->escalations.push_back(t.ticket_id);
            else
                concern->tickets.push_back(t.ticket_id);
        }
    }
}

// Tick loop

void Building::step()
{
    std::lock_guard lk(mu_);
    const Tick t = tick_;

    auto res = sim_.step(commands_.take("simulator"));
    for (const auto& r : res.rejected)
        record(json{{"type", "command_rejected"}, {"tick", t}, {"detail", r}});
    for (const auto& m : res.messages)
        broker_->publish(topic_of_.count(m.point_id) ? topic_of_[m.point_id] : "misc", m);
    if (legacy_) {
        const auto window_end = config_.building.epoch_ms +
                                (t + 1) * static_cast<std::int64_t>(config_.building.tick_seconds) * 1000;
        std::vector<iface::LegacyRow> due;
        while (legacy_next_ < legacy_rows_.size() && legacy_rows_[legacy_next_].timestamp < window_end)
            due.push_back(legacy_rows_[legacy_next_++]);
        if (!due.empty())
            legacy_->ingest(due, *broker_, "legacy", config_.quarantine_topic);
    }

    const auto sv = pipeline_->process_tick(t);
    for (const auto& alarm : pipeline_->take_alarms())
        on_notice(cdo::Notice{alarm.value("kind", std::string{"PersistFailure"}), "rt", "", cdo::Severity::Critical,
                              alarm.value("reason", std::string{}), t},
                  t);

    collect_jobs(t);
    if (cx_.active) {
        if (t + 1 >= cx_.probe_to && !cx_.evaluated)
            run_commissioning(t);
    } else if (machine_.mode() != Mode::Initializing) {
        detect(sv, t);
    }

    const auto activity = iface_.tick(t);
    for (const auto& a : activity.acknowledged)
        record(json{{"type", "ticket"}, {"tick", t}, {"ticket_id", a.ticket_id}, {"status", "Acknowledged"},
                    {"actor_id", a.actor_id}});
    for (const auto& r : activity.resolved)
        on_ticket_resolved(r, t);

    run_refreshes(t);
    watchdog(t);
    if (machine_.mode() != Mode::Initializing && (t + 1) % config_.discovery_interval == 0)
        discovery_pass(t);
    reconcile(t);

    if ((t + 1) % config_.bkr.ticks_per_hour == 0) {
        const auto report = cdo::etl_cycle(*bkr_);
        if (report.hours > 0)
            spdlog::debug("etl: {} hours, {} rows", report.hours, report.rows_written);
    }
    ++tick_;
}

void Building::run(Tick ticks)
{
    for (Tick i = 0; i < ticks; ++i)
        step();
}

// Commissioning

void Building::start_probe(Tick from, bool upgrade)
{
    cx_ = Commissioning{};
    cx_.active = true;
    cx_.upgrade = upgrade;
    cx_.probe_from = from;
    cx_.probe_to = from + config_.probe_ticks;
    record(json{{"type", "commissioning"}, {"tick", from}, {"status", "probing"}, {"upgrade", upgrade},
                {"probe", json::array({cx_.probe_from, cx_.probe_to})}});
}

std::map<std::string, std::vector<double>> Building::replay_probe(const bkr::Registry& registry, Tick from, Tick to,
                                                                  std::optional<StateVector>* last)
{
    const auto tick_ms = static_cast<std::int64_t>(config_.building.tick_seconds) * 1000;
    const auto epoch = config_.building.epoch_ms;
    std::map<Tick, std::vector<SensorMessage>> batches;
    std::set<std::pair<std::string, std::int64_t>> seen;
    for (const auto& topic : broker_->topics()) {
        for (std::int64_t pos = 0;;) {
            const auto chunk = broker_->read(topic, pos, 1024);
            for (const auto& e : chunk) {
                const auto& m = e.message;
                const Tick tk = (m.timestamp - epoch) / tick_ms;
                if (tk < from || tk >= to || !registry.point_owner.count(m.point_id))
                    continue;
                if (seen.emplace(m.point_id, m.seq_no).second)
                    batches[tk].push_back(m);
            }
            if (chunk.size() < 1024)
                break;
            pos = chunk.back().offset + 1;
        }
    }
    std::map<std::string, std::vector<double>> series;
    StateVector prev = stream::seed_vector(registry, from - 1, epoch + (from - 1) * tick_ms);
    for (Tick tk = from; tk < to; ++tk) {
        const stream::TickWindow w{tk, epoch + tk * tick_ms, epoch + (tk + 1) * tick_ms};
        static const std::vector<SensorMessage> none;
        const auto it = batches.find(tk);
        prev = stream::ingest_tick(it == batches.end() ? none : it->second, prev, registry, config_.transforms, w)
                   .vector;
        for (const auto& [p, v] : prev.values)
            if (v.quality == Quality::Good && v.provenance == ValueProvenance::Observed)
                series[p].push_back(v.value);
            else if (v.quality == Quality::Good && series.count(p))
                series[p].push_back(v.value);
    }
    if (last)
        *last = prev;
    return series;
}

void Building::run_commissioning(Tick t)
{
    cx_.evaluated = true;
    const auto tick_ms = static_cast<std::int64_t>(config_.building.tick_seconds) * 1000;
    dnc::DiscoverOptions opts;
    opts.from_ts = config_.building.epoch_ms + cx_.probe_from * tick_ms;
    opts.to_ts = config_.building.epoch_ms + cx_.probe_to * tick_ms;
    opts.transforms = &config_.transforms;
    const auto before = registry();
    auto candidates = dnc::discover(*broker_, *before, opts);

    if (candidates.empty()) {
        cx_.error = "no points discovered during the probe; nothing to commission";
        const json report{{"kind", "commissioning"}, {"tick", t},         {"complete", false},
                          {"devices", 0},            {"error", cx_.error}, {"upgrade", cx_.upgrade}};
        bkr_->append_report(report);
        record(json{{"type", "commissioning"}, {"tick", t}, {"status", "blocked"}, {"complete", false},
                    {"error", cx_.error}});
        spdlog::error("commissioning blocked: {}", cx_.error);
        // Probe again; a building may come online later.
        const auto error = cx_.error;
        start_probe(t + 1, cx_.upgrade);
        cx_.error = error;
        return;
    }

    const auto now_ts = config_.building.epoch_ms + t * tick_ms;
    for (const auto& c : candidates) {
        if (c.device_id == "legacy" && !legacy_)
            continue;
        CommissioningItem item;
        item.point_id = c.point_id;
        item.candidate = c;
        item.classification = classifier_.classify(c);
        item.record = dnc::make_record(c, item.classification, classifier_, datasheet_, now_ts);
        item.range_ok = item.record.operating_range.contains(c.min) && item.record.operating_range.contains(c.max);
        if (item.classification.label == dnc::kUnknown || item.classification.confidence < dnc::kAutoRegisterThreshold) {
            item.status = "fail";
            item.reason = "unclassified";
        } else if (!item.range_ok) {
            item.status = "fail";
            item.reason = "live values outside the manufacturer range";
        } else {
            item.status = "pass";
        }
        cx_.items.push_back(std::move(item));
    }

    for (const auto& item : cx_.items) {
        if (item.status == "pass") {
            if (before->by_point(item.point_id)) {
                auto rec = item.record;
                rec.device_id = before->point_owner.at(item.point_id);
                bkr_->update_device(rec);
            } else {
                bkr_->register_device(item.record);
            }
            continue;
        }
        const auto kind = item.reason == "unclassified" ? "HumanLabelRequest" : "CommissioningFailure";
        on_notice(cdo::Notice{kind, item.point_id, item.record.system, cdo::Severity::Warning,
                              item.reason + fmt::format(" (observed [{:.3f}, {:.3f}], class {})", item.candidate.min,
                                                        item.candidate.max, item.classification.label),
                              t},
                  t);
    }
    finish_commissioning(t);
}

void Building::finish_commissioning(Tick t)
{
    const bool complete =
        std::all_of(cx_.items.begin(), cx_.items.end(), [](const auto& i) { return i.status != "fail"; });

    json items = json::array();
    std::size_t passed = 0, failed = 0, waived = 0;
    for (const auto& i : cx_.items) {
        passed += i.status == "pass";
        failed += i.status == "fail";
        waived += i.status == "waived";
    }
    if (complete) {
        // Baselines from the probe horizon replayed under the new registry.
        std::optional<StateVector> last;
        const auto reg = registry();
        const auto series = replay_probe(*reg, cx_.probe_from, cx_.probe_to, &last);
        for (const auto& [point, device_id] : reg->point_owner) {
            const auto s = series.find(point);
            if (s == series.end())
                continue;
            auto b = bkr::compute_baseline(s->second);
            b.window_from = cx_.probe_from;
            b.window_to = cx_.probe_to;
            try {
                bkr_->update_baseline(point, b, bkr::BaselineProvenance::StartUpCx, t);
            } catch (const InsufficientDataError& e) {
                spdlog::warn("commissioning: {} keeps its discovery baseline: {}", point, e.what());
            }
        }
        if (last) {
            // Re-base the carry-forward vector on the new registry.
            last->tick = t;
            pipeline_->reset_previous(last);
        }
    }
    const auto reg = registry();
    for (const auto& i : cx_.items) {
        const auto* d = reg->by_point(i.point_id);
        items.push_back(json{{"point_id", i.point_id},
                             {"device_id", d ? d->device_id : i.record.device_id},
                             {"class", i.classification.label},
                             {"confidence", i.classification.confidence},
                             {"operating_range", i.record.operating_range},
                             {"observed", json::array({i.candidate.min, i.candidate.max})},
                             {"range_ok", i.range_ok},
                             {"status", i.status},
                             {"reason", i.reason},
                             {"baseline", d ? json(d->baseline) : json(nullptr)}});
    }
    const json report{{"kind", "commissioning"},
                      {"tick", t},
                      {"complete", complete},
                      {"upgrade", cx_.upgrade},
                      {"devices", cx_.items.size()},
                      {"passed", passed},
                      {"failed", failed},
                      {"waived", waived},
                      {"probe", json::array({cx_.probe_from, cx_.probe_to})},
                      {"items", items}};
    bkr_->append_report(report);
    record(json{{"type", "commissioning"},
                {"tick", t},
                {"status", complete ? "complete" : "awaiting-waivers"},
                {"complete", complete},
                {"passed", passed},
                {"failed", failed},
                {"waived", waived}});
    if (!complete)
        return;

    cx_.active = false;
    detector_.rearm("", t + 1);
    dnc_offset_ = broker_->has_topic(config_.quarantine_topic) ? broker_->high_water_mark(config_.quarantine_topic) : 0;
    machine_.post(cx_.upgrade ? Stimulus::UpgradeComplete : Stimulus::CommissioningComplete,
                  cx_.upgrade ? "re-commissioning" : "start-up commissioning");
    machine_.drain(t);
    // Initial parameter search for every optimizable system.
    for (const auto& s : config_.search_spaces)
        submit_job(s.system, "commissioning", {}, t);
    if (config_.search_spaces.empty())
        submit_job("", "commissioning", {}, t);
}

// Detection and concerns

void Building::detect(const StateVector& sv, Tick t)
{
    auto out = detector_.observe(sv, *registry());
    for (const auto& n : out.notices)
        on_notice(n, t);
    for (const auto& ev : out.events) {
        events_.push_back(ev);
        json rec = ev;
        rec["type"] = "event";
        rec["tick"] = t;
        record(std::move(rec));
        if (ev.kind == cdo::ChangeKind::Fault)
            on_fault(ev, t);
        else
            on_drift(ev, t);
    }
}

void Building::on_fault(const cdo::ChangeEvent& ev, Tick t)
{
    Concern* c = nullptr;
    for (auto& [id, cc] : concerns_)
        if (cc.open && cc.system == ev.system)
            c = &cc;
    const bool fresh = c == nullptr;
    if (fresh) {
        Concern n;
        n.id = make_id("cc", next_id_++);
        n.system = ev.system;
        n.system_kind = ev.system_kind;
        n.opened_at = t;
        c = &(concerns_[n.id] = std::move(n));
        record(json{{"type", "concern"}, {"tick", t}, {"concern", c->id}, {"system", c->system}, {"status", "open"},
                    {"event", ev.event_id}});
    }
    c->events.push_back(ev.event_id);
    c->points.insert(ev.target);
    // Readings of a faulted system are not a new operating regime.
    detector_.suppress_drift(ev.system, kForever);
    if (fresh) {
        apply_dispatch(iface_.handle_event(ev, to_string(machine_.mode()), t), c);
        for (const auto& a : c->healed)
            detector_.suppress_drift(a, kForever);
        if (search_space(ev.system))
            submit_job(ev.system, "fault", {}, t);
    } else {
        record(json{{"type", "concern"}, {"tick", t}, {"concern", c->id}, {"system", c->system},
                    {"status", "attached"}, {"event", ev.event_id}});
    }
}

void Building::on_drift(const cdo::ChangeEvent& ev, Tick t)
{
    for (auto& [id, ch] : chains_)
        if (!ch.closed && ch.trigger == "drift" && ch.system == ev.system) {
            ch.events.push_back(ev.event_id);
            return;
        }
    Chain ch;
    ch.id = make_id("ocx", next_id_++);
    ch.system = ev.system;
    ch.trigger = "drift";
    ch.events = {ev.event_id};
    ch.opened_at = t;
    record(json{{"type", "ocx"}, {"tick", t}, {"chain", ch.id}, {"status", "open"}, {"trigger", "drift"},
                {"system", ch.system}, {"events", ch.events}});
    const auto id = ch.id;
    chains_[id] = std::move(ch);
    detector_.suppress_drift(ev.system, kForever);
    drift_unannounced_.push_back(ev.event_id);
    submit_job(ev.system, "drift", id, t);
}

void Building::on_notice(const cdo::Notice& n, Tick t)
{
    if (n.kind == "HumanLabelRequest" && !label_requested_.insert(n.target).second)
        return;
    json rec = n;
    rec["type"] = "notice";
    rec["tick"] = t;
    record(std::move(rec));
    apply_dispatch(iface_.handle_notice(n, to_string(machine_.mode()), t), nullptr);
}

void Building::on_ticket_resolved(const iface::ActionTicket& ticket, Tick t)
{
    record(json{{"type", "ticket"},
                {"tick", t},
                {"ticket_id", ticket.ticket_id},
                {"status", "Resolved"},
                {"actor_id", ticket.actor_id},
                {"resolution", *ticket.resolution}});
    for (auto& [id, c] : concerns_) {
        if (!c.open)
            continue;
        const bool escalation = std::count(c.escalations.begin(), c.escalations.end(), ticket.ticket_id) > 0;
        const bool member = std::count(c.tickets.begin(), c.tickets.end(), ticket.ticket_id) > 0;
        if (!escalation && !member)
            continue;
        bool done = escalation;
        bool any_awaiting = false;
        auto resolution = iface::Resolution::Waived;
        if (!done) {
            done = true;
            for (const auto& tid : c.tickets) {
                const auto& tk = iface_.ticket(tid);
                if (!tk.awaits_resolution)
                    continue;
                any_awaiting = true;
                if (tk.status != iface::TicketStatus::Resolved)
                    done = false;
            }
            done = done && any_awaiting;
        }
        if (!done)
            return;
        // Strongest outcome across the concern's tickets.
        for (const auto& tid : c.tickets) {
            const auto& tk = iface_.ticket(tid);
            if (!tk.resolution)
                continue;
            if (*tk.resolution == iface::Resolution::EquipmentChanged)
                resolution = iface::Resolution::EquipmentChanged;
            else if (*tk.resolution == iface::Resolution::RepairedNoEquipChange &&
                     resolution == iface::Resolution::Waived)
                resolution = iface::Resolution::RepairedNoEquipChange;
        }
        if (escalation)
            resolution = *ticket.resolution;
        close_concern(c, resolution, t);
        return;
    }
}

void Building::close_concern(Concern& c, iface::Resolution resolution, Tick t)
{
    c.open = false;
    last_closed_concern_ = c.id;
    if (resolution != iface::Resolution::Waived) {
        // The maintenance visit fixes the plant.
        for (const auto& inj : std::vector<sim::ActiveInjection>(sim_.active_injections())) {
            if (inj.event.kind != sim::EventKind::FaultInjection)
                continue;
            if (inj.event.target == c.system || c.points.count(inj.event.target)) {
                sim::ScenarioEvent repair{t, sim::EventKind::Repair, inj.event.target, {{"kind", "FaultInjection"}}};
                for (const auto& w : sim_.inject(repair))
                    spdlog::warn("repair: {}", w);
            }
        }
    }
    for (const auto& ev : c.events)
        if (detector_.find(ev)) {
            detector_.resolve(ev, t + 1);
            resolved_events_.insert(ev);
        }
    detector_.rearm(c.system, t + 1);
    detector_.suppress_drift(c.system, t + 1);
    record(json{{"type", "concern"},
                {"tick", t},
                {"concern", c.id},
                {"system", c.system},
                {"status", "closed"},
                {"resolution", resolution},
                {"events", c.events},
                {"tickets", c.tickets}});
    apply_dispatch(iface_.handle_fault_resolved(c.system, c.system_kind, c.id, t), nullptr);
    for (const auto& a : c.healed) {
        detector_.rearm(a, t + 1);
        detector_.suppress_drift(a, t + 1);
    }

    if (resolution == iface::Resolution::EquipmentChanged) {
        recommission_requested_ = true;
        return;
    }
    if (resolution == iface::Resolution::Waived)
        return;
    Chain ch;
    ch.id = make_id("ocx", next_id_++);
    ch.system = c.system;
    ch.trigger = "repair";
    ch.events = c.events;
    ch.tickets = c.tickets;
    ch.opened_at = t;
    record(json{{"type", "ocx"}, {"tick", t}, {"chain", ch.id}, {"status", "open"}, {"trigger", "repair"},
                {"system", ch.system}, {"events", ch.events}, {"tickets", ch.tickets}});
    const auto id = ch.id;
    chains_[id] = std::move(ch);
    submit_job(c.system, "repair", id, t);
}

void Building::watchdog(Tick t)
{
    for (auto& [id, c] : concerns_) {
        if (!c.open || c.escalated || t - c.opened_at < config_.watchdog_ticks)
            continue;
        c.escalated = true;
        record(json{{"type", "watchdog"}, {"tick", t}, {"concern", c.id}, {"system", c.system}});
        apply_dispatch(iface_.escalate(c.events.front(), c.system,
                                       "fault open for " + std::to_string(t - c.opened_at) + " ticks", t),
                       &c);
    }
}

// Optimization

const cdo::SearchSpace* Building::search_space(const std::string& system) const
{
    for (const auto& s : config_.search_spaces)
        if (s.system == system)
            return &s;
    return nullptr;
}

void Building::submit_job(const std::string& system, const std::string& reason, const std::string& chain, Tick t)
{
    Job job;
    job.id = make_id("opt", next_id_++);
    job.system = system;
    job.reason = reason;
    job.chain = chain;
    job.submitted = t;
    const auto* space = search_space(system);
    cdo::ParameterSchedule incumbent;
    incumbent.system = system;
    if (const auto it = schedules_.find(system); it != schedules_.end())
        incumbent.entries = it->second;
    else if (space)
        incumbent.entries = sim_.chiller_schedule();
    if (space) {
        if (incumbent.entries.empty())
            incumbent.entries = {{0, 24, sim_.plant().chiller_setpoint}};
        incumbent.unit = space->unit;
        job.result = std::async(std::launch::async,
                                [space = *space, twin = sim_, incumbent, t, cfg = config_.optimizer,
                                 horizon = config_.evaluation_horizon]() {
                                    const cdo::SimEvaluator eval(twin, space.actuator, horizon);
                                    return cdo::optimize(space, eval, incumbent, t, cfg);
                                })
                         .share();
    } else {
        std::promise<cdo::OptimizeResult> p;
        cdo::OptimizeResult r;
        r.schedule = incumbent;
        r.evaluations = 0;
        r.detail = "no search space; incumbent retained";
        p.set_value(r);
        job.result = p.get_future().share();
    }
    ++optimizations_;
    if (reason == "commissioning" || reason == "drift")
        last_global_job_ = job.id;
    if (!chain.empty())
        chains_[chain].optimization = job.id;
    record(json{{"type", "optimization"}, {"tick", t}, {"job", job.id}, {"system", system}, {"reason", reason},
                {"status", "submitted"}, {"chain", chain}});
    jobs_.push_back(std::move(job));
}

void Building::collect_jobs(Tick t)
{
    // Results are taken one tick after submission regardless of how fast the
    // search ran, keeping runs reproducible.
    for (auto it = jobs_.begin(); it != jobs_.end();) {
        if (t < it->submitted + 1) {
            ++it;
            continue;
        }
        cdo::OptimizeResult r;
        try {
            r = it->result.get();
        } catch (const std::exception& e) {
            r.status = cdo::OptimizeStatus::EvaluatorFailed;
            r.detail = e.what();
        }
        finish_job(*it, r, t);
        it = jobs_.erase(it);
    }
}

void Building::finish_job(Job& job, const cdo::OptimizeResult& r, Tick t)
{
    const auto status = r.status == cdo::OptimizeStatus::Optimal      ? "Optimal"
                        : r.status == cdo::OptimizeStatus::Infeasible ? "Infeasible"
                                                                      : "EvaluatorFailed";
    const auto* space = search_space(job.system);
    const auto current = schedules_.count(job.system) ? schedules_[job.system] : std::vector<ScheduleEntry>{};
    const bool changed = space && r.status == cdo::OptimizeStatus::Optimal && r.schedule.entries != current;
    record(json{{"type", "optimization"},
                {"tick", t},
                {"job", job.id},
                {"system", job.system},
                {"reason", job.reason},
                {"status", status},
                {"evaluations", r.evaluations},
                {"exhaustive", r.exhaustive},
                {"objective_kwh", r.schedule.objective_value},
                {"schedule", r.schedule.entries},
                {"changed", changed},
                {"chain", job.chain}});
    if (r.status != cdo::OptimizeStatus::Optimal) {
        on_notice(cdo::Notice{r.status == cdo::OptimizeStatus::Infeasible ? "OptimizationInfeasible"
                                                                          : "OptimizationFailed",
                              job.system, job.system, cdo::Severity::Critical, r.detail, t},
                  t);
    }
    if (changed) {
        schedules_[job.system] = r.schedule.entries;
        ActuatorCommand cmd;
        cmd.command_id = "cmd-" + job.id;
        cmd.issuer = "cdo";
        cmd.actuator_id = space->actuator;
        cmd.verb = "set_schedule";
        cmd.schedule = r.schedule.entries;
        send_command(cmd);
        json sched = r.schedule;
        sched["actuator"] = space->actuator;
        sched["reason"] = job.reason;
        sched["job"] = job.id;
        bkr_->append_schedule(sched);
        record(json{{"type", "command"}, {"tick", t}, {"command_id", cmd.command_id}, {"actuator", cmd.actuator_id},
                    {"verb", cmd.verb}, {"schedule", cmd.schedule}, {"source", job.id}});
    }

    Refresh rf;
    rf.chain = job.chain;
    if (job.reason == "commissioning") {
        rf.provenance = bkr::BaselineProvenance::StartUpCx;
    } else if (job.reason == "fault") {
        if (!changed)
            return;
    } else if (!changed) {
        rf.system = job.system;  // only the re-optimized system moved
    }
    if (!job.chain.empty())
        for (const auto& ev : chains_[job.chain].events)
            rf.drift_events.push_back(ev);
    start_refresh(std::move(rf), t);
}

void Building::start_refresh(Refresh r, Tick t)
{
    r.from = t + 1;
    r.to = t + 1 + config_.baseline_ticks;
    detector_.suppress_drift(r.system, r.to);
    record(json{{"type", "baseline"}, {"tick", t}, {"status", "collecting"}, {"system", r.system},
                {"provenance", r.provenance}, {"window", json::array({r.from, r.to})}, {"chain", r.chain}});
    refreshes_.push_back(std::move(r));
}

void Building::run_refreshes(Tick t)
{
    std::vector<Refresh> retry;
    for (auto it = refreshes_.begin(); it != refreshes_.end();) {
        if (t + 1 < it->to) {
            ++it;
            continue;
        }
        auto r = std::move(*it);
        it = refreshes_.erase(it);
        const auto reg = registry();
        const auto vectors = bkr_->read_rt(r.from, r.to).vectors;
        std::size_t updated = 0;
        std::vector<std::string> short_points;
        for (const auto& [point, device_id] : reg->point_owner) {
            const auto& d = reg->devices.at(device_id);
            if (!r.system.empty() && d.system != r.system)
                continue;
            std::vector<double> values;
            for (const auto& sv : vectors)
                if (const auto v = sv.values.find(point); v != sv.values.end() && v->second.quality == Quality::Good)
                    values.push_back(v->second.value);
            auto b = bkr::compute_baseline(values);
            b.window_from = r.from;
            b.window_to = r.to;
            try {
                bkr_->update_baseline(point, b, r.provenance, t);
                ++updated;
            } catch (const InsufficientDataError&) {
                short_points.push_back(point);
            }
        }
        if (!short_points.empty() && r.attempts < 3) {
            record(json{{"type", "baseline"}, {"tick", t}, {"status", "retry"}, {"system", r.system},
                        {"provenance", r.provenance}, {"insufficient", short_points}, {"chain", r.chain}});
            ++r.attempts;
            retry.push_back(std::move(r));
            continue;
        }
        record(json{{"type", "baseline"}, {"tick", t}, {"status", "updated"}, {"system", r.system},
                    {"provenance", r.provenance}, {"devices", updated}, {"chain", r.chain}});
        for (const auto& ev : r.drift_events)
            if (detector_.find(ev)) {
                detector_.resolve(ev, t + 1);
                resolved_events_.insert(ev);
            }
        if (!r.chain.empty()) {
            auto& ch = chains_[r.chain];
            detector_.suppress_drift(ch.system, t + 1);
            ch.closed = true;
            ++ocx_closed_;
            record(json{{"type", "ocx"},
                        {"tick", t},
                        {"chain", ch.id},
                        {"status", "closed"},
                        {"trigger", ch.trigger},
                        {"system", ch.system},
                        {"events", ch.events},
                        {"tickets", ch.tickets},
                        {"optimization", ch.optimization},
                        {"provenance", r.provenance}});
        }
    }
    for (auto& r : retry)
        start_refresh(std::move(r), t);
}

// Continuous discovery

void Building::discovery_pass(Tick t)
{
    if (!broker_->has_topic(config_.quarantine_topic))
        return;
    const auto hwm = broker_->high_water_mark(config_.quarantine_topic);
    if (hwm <= dnc_offset_)
        return;
    dnc::DiscoverOptions opts;
    opts.topics = {config_.quarantine_topic};
    opts.from_offsets[config_.quarantine_topic] = dnc_offset_;
    opts.transforms = &config_.transforms;
    dnc_offset_ = hwm;
    const auto candidates = dnc::discover(*broker_, *registry(), opts);
    const auto tick_ms = static_cast<std::int64_t>(config_.building.tick_seconds) * 1000;
    const auto result = dnc::register_new(*bkr_, candidates, classifier_, classifier_, datasheet_,
                                          config_.building.epoch_ms + t * tick_ms);
    for (const auto& p : result.registered)
        record(json{{"type", "discovery"}, {"tick", t}, {"target", p}, {"status", "registered"}});
    for (const auto& c : result.needs_label)
        on_notice(cdo::Notice{"HumanLabelRequest", c.point_id, "", cdo::Severity::Warning,
                              "unclassified point seen on " + c.topic, t},
                  t);
}

// Mode reconciliation

bool Building::global_jobs_pending() const
{
    return std::any_of(jobs_.begin(), jobs_.end(),
                       [](const Job& j) { return j.reason == "commissioning" || j.reason == "drift"; });
}

bool Building::open_faults() const
{
    return std::any_of(concerns_.begin(), concerns_.end(), [](const auto& c) { return c.second.open; });
}

void Building::reconcile(Tick t)
{
    for (int guard = 0; guard < 8; ++guard) {
        const auto mode = machine_.mode();
        if (mode == Mode::Optimizing && !global_jobs_pending()) {
            machine_.post(Stimulus::OptimumFound, last_global_job_);
        } else if (mode == Mode::DetectingChange && recommission_requested_) {
            machine_.post(Stimulus::FaultDetected, "upgrade request");
        } else if (mode == Mode::DetectingChange && open_faults()) {
            std::string cause;
            for (const auto& [id, c] : concerns_)
                if (c.open) {
                    cause = c.events.front();
                    break;
                }
            machine_.post(Stimulus::FaultDetected, cause);
        } else if (mode == Mode::DetectingChange && !drift_unannounced_.empty()) {
            machine_.post(Stimulus::DriftDetected, drift_unannounced_.front());
            drift_unannounced_.clear();
        } else if (mode == Mode::Interfacing && recommission_requested_) {
            recommission_requested_ = false;
            machine_.post(Stimulus::EquipmentChanged, last_closed_concern_);
            machine_.drain(t);
            start_probe(t + 1, true);
            continue;
        } else if (mode == Mode::Interfacing && !open_faults()) {
            machine_.post(Stimulus::FaultResolvedNoEquipChange, last_closed_concern_);
        } else {
            break;
        }
        machine_.drain(t);
    }
}

// Queries and commands

Tick Building::tick() const
{
    std::lock_guard lk(mu_);
    return tick_;
}

Mode Building::mode() const
{
    std::lock_guard lk(mu_);
    return machine_.mode();
}

BuildingMode Building::building_mode() const
{
    std::lock_guard lk(mu_);
    return machine_.current();
}

const std::vector<std::string>& Building::report_names()
{
    static const std::vector<std::string> names{"status",        "energy",    "events", "tickets", "devices",
                                                "modes",         "commissioning", "schedules", "ocx"};
    return names;
}

json Building::describe(const std::string& name) const
{
    std::lock_guard lk(mu_);
    return describe_locked(name);
}

json Building::describe_locked(const std::string& name) const
{
    if (name == "status") {
        std::size_t open_tickets = 0;
        for (const auto& tk : iface_.tickets())
            open_tickets += tk.status != iface::TicketStatus::Resolved;
        std::size_t open_concerns = 0;
        for (const auto& [id, c] : concerns_)
            open_concerns += c.open;
        json cx{{"active", cx_.active}};
        if (cx_.active) {
            cx["probe"] = json::array({cx_.probe_from, cx_.probe_to});
            cx["evaluated"] = cx_.evaluated;
            std::size_t failed = 0;
            for (const auto& i : cx_.items)
                failed += i.status == "fail";
            cx["awaiting_waivers"] = failed;
        }
        if (!cx_.error.empty())
            cx["error"] = cx_.error;
        return json{{"tick", tick_},
                    {"mode", machine_.mode()},
                    {"since", machine_.current().since},
                    {"cause", machine_.current().cause},
                    {"devices", registry()->devices.size()},
                    {"open_events", detector_.open_events().size()},
                    {"open_concerns", open_concerns},
                    {"open_tickets", open_tickets},
                    {"optimizations", optimizations_},
                    {"ocx_chains_closed", ocx_closed_},
                    {"anomalies", machine_.anomalies()},
                    {"quarantined", pipeline_->quarantined()},
                    {"commissioning", cx},
                    {"meter_kwh", sim_.energy().meter_kwh}};
    }
    if (name == "energy") {
        auto e = energy_summary(*bkr_, config_.building.tick_seconds / 3600.0);
        e["through_tick"] = now_locked();
        return e;
    }
    if (name == "events") {
        json out = json::array();
        for (const auto& ev : events_) {
            json j = ev;
            j["status"] = detector_.find(ev.event_id) ? "open" : "resolved";
            out.push_back(std::move(j));
        }
        return out;
    }
    if (name == "tickets")
        return json(iface_.tickets());
    if (name == "devices") {
        json out = json::array();
        for (const auto& [id, d] : registry()->devices)
            out.push_back(d);
        return out;
    }
    if (name == "modes") {
        json out = json::array();
        for (const auto& rec : bkr_->journal())
            if (rec.value("type", std::string{}) == "transition")
                out.push_back(rec);
        return out;
    }
    if (name == "commissioning") {
        json last = nullptr;
        for (const auto& r : bkr_->reports())
            if (r.value("kind", std::string{}) == "commissioning")
                last = r;
        return last;
    }
    if (name == "schedules")
        return json(bkr_->schedules());
    if (name == "ocx") {
        json out = json::array();
        for (const auto& rec : bkr_->journal())
            if (rec.value("type", std::string{}) == "ocx")
                out.push_back(rec);
        return out;
    }
    std::string list;
    for (const auto& n : report_names())
        list += (list.empty() ? "" : ", ") + n;
    throw NotFoundError("unsupported report '" + name + "'; supported: " + list);
}

json Building::summary() const
{
    std::lock_guard lk(mu_);
    json modes = json::array();
    for (const auto& rec : bkr_->journal())
        if (rec.value("type", std::string{}) == "transition")
            modes.push_back(json{{"tick", rec["tick"]}, {"mode", rec["to"]}, {"stimulus", rec["stimulus"]}});
    json tickets = json::array();
    for (const auto& tk : iface_.tickets())
        tickets.push_back(json{{"ticket_id", tk.ticket_id},
                               {"actor_id", tk.actor_id},
                               {"verb", tk.verb},
                               {"system", tk.system},
                               {"dispatched_at", tk.dispatched_at},
                               {"status", tk.status},
                               {"resolution", tk.resolution ? json(*tk.resolution) : json(nullptr)}});
    json events = json::array();
    for (const auto& ev : events_)
        events.push_back(json{{"event_id", ev.event_id},
                              {"kind", ev.kind},
                              {"target", ev.target},
                              {"detected_at", ev.detected_at},
                              {"severity", ev.severity}});
    const auto& e = sim_.energy();
    return json{{"ticks", tick_},
                {"final_mode", machine_.mode()},
                {"mode_history", modes},
                {"events", events},
                {"tickets", tickets},
                {"optimizations", optimizations_},
                {"ocx_chains_closed", ocx_closed_},
                {"anomalies", machine_.anomalies()},
                {"devices", registry()->devices.size()},
                {"energy",
                 {{"meter_kwh", e.meter_kwh},
                  {"component_kwh", e.component_kwh},
                  {"hvac_kwh", e.hvac_kwh},
                  {"bkr", energy_summary(*bkr_, config_.building.tick_seconds / 3600.0)}}}};
}

json Building::acknowledge(const std::string& ticket_id, const std::string& actor_id)
{
    std::lock_guard lk(mu_);
    const auto t = now_locked();
    const auto tk = iface_.acknowledge(ticket_id, actor_id, t);
    record(json{{"type", "ticket"}, {"tick", t}, {"ticket_id", tk.ticket_id}, {"status", "Acknowledged"},
                {"actor_id", actor_id}});
    return tk;
}

json Building::resolve(const std::string& ticket_id, iface::Resolution resolution, const std::string& actor_id)
{
    std::lock_guard lk(mu_);
    const auto t = now_locked();
    const auto tk = iface_.resolve(ticket_id, resolution, actor_id, t);
    on_ticket_resolved(tk, t);
    reconcile(t);
    return tk;
}

json Building::waive(const std::string& point_id, const std::string& actor_id)
{
    std::lock_guard lk(mu_);
    const auto t = now_locked();
    if (!iface_.directory().find(actor_id))
        throw RejectedError("waiver needs a known actor identity");
    if (!cx_.active || !cx_.evaluated)
        throw ConflictError("no commissioning awaiting waivers");
    auto it = std::find_if(cx_.items.begin(), cx_.items.end(),
                           [&](const CommissioningItem& i) { return i.point_id == point_id; });
    if (it == cx_.items.end())
        throw NotFoundError("no commissioning item for " + point_id);
    if (it->status != "fail")
        throw ConflictError(point_id + " is " + it->status + ", not failed");
    it->status = "waived";
    auto rec = it->record;
    rec.waived = true;
    if (const auto* existing = registry()->by_point(point_id)) {
        rec.device_id = existing->device_id;
        bkr_->update_device(rec);
    } else {
        bkr_->register_device(rec);
    }
    record(json{{"type", "waiver"}, {"tick", t}, {"target", point_id}, {"actor_id", actor_id}});
    finish_commissioning(t);
    return describe_locked("status");
}

json Building::commission()
{
    std::lock_guard lk(mu_);
    if (machine_.mode() == Mode::Initializing && !cx_.active)
        start_probe(tick_, false);
    json out = describe_locked("status")["commissioning"];
    out["report"] = describe_locked("commissioning");
    return out;
}

json Building::tenant_comfort(const std::string& zone_id, double min, double max, const std::string& actor_id)
{
    std::lock_guard lk(mu_);
    const auto* actor = iface_.directory().find(actor_id);
    if (!actor)
        throw RejectedError("comfort request needs a known actor identity");
    if (!(min < max) || min < config_.comfort_limits.min || max > config_.comfort_limits.max)
        throw ValidationError(fmt::format("comfort band [{}, {}] outside the manager limits [{}, {}]", min, max,
                                          config_.comfort_limits.min, config_.comfort_limits.max));
    sim_.set_comfort_band(zone_id, Range{min, max});
    const auto t = now_locked();
    const json rec{{"type", "tenant_comfort"},          {"tick", t},          {"target", zone_id},
                   {"band", json::array({min, max})}, {"actor_id", actor_id}};
    record(rec);
    return rec;
}

std::vector<json> Building::journal() const { return bkr_->journal(); }

std::vector<cdo::ChangeEvent> Building::events() const
{
    std::lock_guard lk(mu_);
    return events_;
}

std::vector<iface::ActionTicket> Building::tickets() const
{
    std::lock_guard lk(mu_);
    return iface_.tickets();
}

std::vector<ActuatorCommand> Building::commands() const { return commands_.history(); }

std::size_t Building::optimizations() const
{
    std::lock_guard lk(mu_);
    return optimizations_;
}

std::size_t Building::ocx_chains_closed() const
{
    std::lock_guard lk(mu_);
    return ocx_closed_;
}

}  // namespace sb::autonomic
