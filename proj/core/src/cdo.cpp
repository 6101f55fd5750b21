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

#include "sb/cdo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <spdlog/spdlog.h>

namespace sb::cdo {

Severity parse_severity(const std::string& s)
{
    if (s == "Info")
        return Severity::Info;
    if (s == "Warning")
        return Severity::Warning;
    if (s == "Critical")
        return Severity::Critical;
    throw ValidationError("unknown severity '" + s + "'");
}

void to_json(json& j, const Evidence& e)
{
    j = json{{"statistic", e.statistic}, {"value", e.value}, {"threshold", e.threshold}, {"window", e.window}};
}

void from_json(const json& j, Evidence& e)
{
    e.statistic = j.at("statistic").get<std::string>();
    e.value = j.at("value").get<double>();
    e.threshold = j.at("threshold").get<double>();
    e.window = j.at("window").get<int>();
}

void to_json(json& j, const ChangeEvent& e)
{
    j = json{{"event_id", e.event_id},       {"kind", e.kind},
             {"target", e.target},           {"system", e.system},
             {"system_kind", e.system_kind}, {"detected_at", e.detected_at},
             {"evidence", e.evidence},       {"severity", e.severity}};
}

void from_json(const json& j, ChangeEvent& e)
{
    e.event_id = j.at("event_id").get<std::string>();
    e.kind = j.at("kind").get<ChangeKind>();
    e.target = j.at("target").get<std::string>();
    e.system = j.value("system", std::string{});
    e.system_kind = j.value("system_kind", std::string{});
    e.detected_at = j.at("detected_at").get<Tick>();
    e.evidence = j.at("evidence").get<Evidence>();
    e.severity = j.at("severity").get<Severity>();
}

void to_json(json& j, const Notice& n)
{
    j = json{{"kind", n.kind},         {"target", n.target}, {"system", n.system},
             {"severity", n.severity}, {"detail", n.detail}, {"at", n.at}};
}

double DetectorConfig::k_for(const std::string& cls) const
{
    const auto it = classes.find(cls);
    return it != classes.end() && it->second.k ? *it->second.k : k;
}

int DetectorConfig::persistence_for(const std::string& cls) const
{
    const auto it = classes.find(cls);
    return it != classes.end() && it->second.persistence ? *it->second.persistence : persistence;
}

double DetectorConfig::tolerance_for(const std::string& cls) const
{
    const auto it = classes.find(cls);
    return it != classes.end() && it->second.abs_tolerance ? *it->second.abs_tolerance : default_abs_tolerance;
}

void to_json(json& j, const DetectorConfig& c)
{
    j = json{{"window", c.window},
             {"persistence", c.persistence},
             {"k", c.k},
             {"suspect_fraction", c.suspect_fraction},
             {"default_abs_tolerance", c.default_abs_tolerance}};
    json classes = json::object();
    for (const auto& [cls, p] : c.classes) {
        json e = json::object();
        if (p.k)
            e["k"] = *p.k;
        if (p.persistence)
            e["persistence"] = *p.persistence;
        if (p.abs_tolerance)
            e["abs_tolerance"] = *p.abs_tolerance;
        classes[cls] = e;
    }
    j["classes"] = classes;
}

void from_json(const json& j, DetectorConfig& c)
{
    c.window = j.value("window", c.window);
    c.persistence = j.value("persistence", c.persistence);
    c.k = j.value("k", c.k);
    c.suspect_fraction = j.value("suspect_fraction", c.suspect_fraction);
    c.default_abs_tolerance = j.value("default_abs_tolerance", c.default_abs_tolerance);
    if (j.contains("classes")) {
        for (const auto& [cls, e] : j["classes"].items()) {
            ClassParams p;
            if (e.contains("k"))
                p.k = e["k"].get<double>();
            if (e.contains("persistence"))
                p.persistence = e["persistence"].get<int>();
            if (e.contains("abs_tolerance"))
                p.abs_tolerance = e["abs_tolerance"].get<double>();
            c.classes[cls] = p;
        }
    }
    if (c.window <= 0 || c.persistence <= 0 || c.k <= 0)
        throw ValidationError("detector window, persistence and k must be positive");
}

std::vector<Finding> ZScorePersistenceDetector::evaluate(const std::deque<Sample>& series,
                                                         const bkr::DeviceRecord& device,
                                                         const DetectorConfig& config, bool drift_enabled) const
{
    std::vector<Finding> out;
    const auto n = static_cast<int>(series.size());
    if (n == 0)
        return out;
    const int w = std::min(config.window, n);
    const auto& range = device.operating_range;

    double max_excess = 0.0;
    double sum = 0.0;
    int suspect = 0;
    for (int i = n - w; i < n; ++i) {
        const auto& s = series[static_cast<std::size_t>(i)];
        max_excess = std::max(max_excess, range.excess(s.value));
        sum += s.value;
        suspect += s.quality == Quality::Suspect ? 1 : 0;
    }
    const double mean = sum / w;
    if (max_excess > 0.0) {
        out.push_back({ChangeKind::Fault, {"range_excess", max_excess, 0.0, w}, Severity::Critical, false});
        return out;
    }
    if (range.excess(mean) > 0.0) {
        out.push_back({ChangeKind::Fault, {"mean_range_excess", range.excess(mean), 0.0, w}, Severity::Critical, false});
        return out;
    }
    const double frac = static_cast<double>(suspect) / w;
    if (w == config.window && frac > config.suspect_fraction) {
        out.push_back({ChangeKind::Fault, {"suspect_fraction", frac, config.suspect_fraction, w}, Severity::Warning, false});
        return out;
    }

    if (!drift_enabled || device.baseline.sample_count == 0)
        return out;
    const int p = config.persistence_for(device.device_class);
    const int need = config.window + p - 1;
    if (n < need)
        return out;
    const bool degenerate = device.baseline.std <= 0.0;
    const double threshold =
        degenerate ? config.tolerance_for(device.device_class) : config.k_for(device.device_class) * device.baseline.std;

    // prefix sums over the trailing `need` samples
    std::vector<double> prefix(static_cast<std::size_t>(need) + 1, 0.0);
    for (int i = 0; i < need; ++i) {
        const double v = series[static_cast<std::size_t>(n - need + i)].value;
        if (!range.contains(v))
            return out;
        prefix[static_cast<std::size_t>(i) + 1] = prefix[static_cast<std::size_t>(i)] + v;
    }
    double latest_dev = 0.0;
    for (int j = 0; j < p; ++j) {
        const int end = need - j;  // exclusive, in prefix coordinates
        const double m = (prefix[static_cast<std::size_t>(end)] - prefix[static_cast<std::size_t>(end - config.window)]) /
                         config.window;
        const double dev = std::abs(m - device.baseline.mean);
        if (!(dev > threshold))
            return out;
        if (j == 0)
            latest_dev = dev;
    }
    out.push_back({ChangeKind::ConceptDrift,
                   {degenerate ? "mean_shift_abs" : "mean_shift", latest_dev, threshold, config.window},
                   Severity::Info,
                   degenerate});
    return out;
}

std::map<std::string, std::vector<Finding>> detect(const std::vector<StateVector>& window,
                                                   const bkr::Registry& registry, const DetectorConfig& config,
                                                   const PointDetector& detector)
{
    std::map<std::string, std::vector<Finding>> out;
    if (static_cast<int>(window.size()) < config.window)
        return out;
    for (const auto& [point, device_id] : registry.point_owner) {
        const auto& device = registry.devices.at(device_id);
        if (device.baseline.sample_count == 0)
            continue;
        std::deque<Sample> series;
        for (const auto& sv : window)
            if (const auto it = sv.values.find(point); it != sv.values.end())
                series.push_back({sv.tick, it->second.value, it->second.quality});
        auto f = detector.evaluate(series, device, config, true);
        if (!f.empty())
            out.emplace(point, std::move(f));
    }
    return out;
}

ChangeDetector::ChangeDetector(DetectorConfig config, std::shared_ptr<const PointDetector> detector)
    : config_(std::move(config)), detector_(std::move(detector))
{
    if (!detector_)
        detector_ = std::make_shared<ZScorePersistenceDetector>();
}

ChangeDetector::Output ChangeDetector::observe(const StateVector& sv, const bkr::Registry& registry)
{
    Output out;
    const bool any_baseline = std::any_of(registry.devices.begin(), registry.devices.end(),
                                          [](const auto& d) { return d.second.baseline.sample_count > 0; });
    if (!any_baseline) {
        if (!commissioning_notice_sent_) {
            commissioning_notice_sent_ = true;
            out.notices.push_back({"CommissioningNeeded", "", "", Severity::Warning,
                                   "no baselines in the registry; detection suppressed", sv.tick});
        }
        return out;
    }

    for (const auto& [point, device_id] : registry.point_owner) {
        const auto& device = registry.devices.at(device_id);
        point_system_[point] = device.system;
        if (device.baseline.sample_count == 0 || device.waived)
            continue;
        const auto v = sv.values.find(point);
        if (v == sv.values.end())
            continue;
        if (const auto a = armed_from_.find(point); a != armed_from_.end() && sv.tick < a->second)
            continue;
        auto& series = series_[point];
        series.push_back({sv.tick, v->second.value, v->second.quality});
        const auto cap = static_cast<std::size_t>(std::max(config_.window, config_.history_for(device.device_class)));
        while (series.size() > cap)
            series.pop_front();

        bool drift_enabled = true;
        for (const auto& key : {std::string{}, device.system})
            if (const auto s = drift_suppressed_until_.find(key); s != drift_suppressed_until_.end() && sv.tick < s->second)
                drift_enabled = false;

        for (const auto& f : detector_->evaluate(series, device, config_, drift_enabled)) {
            if (f.degenerate_baseline && warned_degenerate_.insert(point).second) {
                spdlog::warn("cdo: {} has a zero-std baseline; using absolute tolerance {}", point,
                             f.evidence.threshold);
                out.notices.push_back({"DegenerateBaseline", point, device.system, Severity::Info,
                                       "zero-std baseline, absolute tolerance applied", sv.tick});
            }
            if (!open_keys_.insert({point, f.kind}).second)
                continue;
            char id[32];
            std::snprintf(id, sizeof(id), "ev-%06llu", static_cast<unsigned long long>(next_id_++));
            ChangeEvent ev{id, f.kind, point, device.system, device.system_kind, sv.tick, f.evidence, f.severity};
            open_.emplace(ev.event_id, ev);
            out.events.push_back(std::move(ev));
        }
    }
    return out;
}

void ChangeDetector::resolve(const std::string& event_id, Tick at)
{
    const auto it = open_.find(event_id);
    if (it == open_.end())
        throw NotFoundError("no open event " + event_id);
    const auto point = it->second.target;
    open_keys_.erase({point, it->second.kind});
    open_.erase(it);
    armed_from_[point] = at;
    series_.erase(point);
}

void ChangeDetector::rearm(const std::string& system, Tick at)
{
    for (const auto& [point, sys] : point_system_) {
        if (!system.empty() && sys != system)
            continue;
        armed_from_[point] = at;
        series_.erase(point);
    }
}

void ChangeDetector::suppress_drift(const std::string& system, Tick until) { drift_suppressed_until_[system] = until; }

std::vector<ChangeEvent> ChangeDetector::open_events() const
{
    std::vector<ChangeEvent> out;
    for (const auto& [id, ev] : open_)
        out.push_back(ev);
    return out;
}

std::optional<ChangeEvent> ChangeDetector::find(const std::string& event_id) const
{
    const auto it = open_.find(event_id);
    if (it == open_.end())
        return std::nullopt;
    return it->second;
}

// Optimization

std::size_t SearchSpace::size() const
{
    if (windows.empty())
        return 0;
    std::size_t n = 1;
    for (const auto& w : windows)
        n *= w.candidates.size();
    return n;
}

void SearchSpace::validate() const
{
    if (windows.empty())
        throw ValidationError("search space for " + system + " has no windows");
    int expect = 0;
    for (const auto& w : windows) {
        if (w.start_hour != expect || !(w.end_hour > w.start_hour))
            throw ValidationError("search windows for " + system + " must partition [0, 24) in order");
        if (w.candidates.empty())
            throw ValidationError("search window without candidates for " + system);
        if (operating_range)
            for (double c : w.candidates)
                if (!operating_range->contains(c))
                    throw ValidationError("candidate setpoint outside operating range for " + system);
        expect = w.end_hour;
    }
    if (expect != 24)
        throw ValidationError("search windows for " + system + " must end at hour 24");
}

void to_json(json& j, const SearchWindow& w)
{
    j = json{{"start_hour", w.start_hour}, {"end_hour", w.end_hour}, {"candidates", w.candidates}};
}

void from_json(const json& j, SearchWindow& w)
{
    w.start_hour = j.at("start_hour").get<int>();
    w.end_hour = j.at("end_hour").get<int>();
    w.candidates = j.at("candidates").get<std::vector<double>>();
}

void to_json(json& j, const SearchSpace& s)
{
    j = json{{"system", s.system}, {"actuator", s.actuator}, {"unit", s.unit}, {"windows", s.windows}};
    if (s.operating_range)
        j["operating_range"] = *s.operating_range;
}

void from_json(const json& j, SearchSpace& s)
{
    s.system = j.at("system").get<std::string>();
    s.actuator = j.value("actuator", s.system);
    s.unit = j.value("unit", std::string{"degC"});
    s.windows = j.at("windows").get<std::vector<SearchWindow>>();
    if (j.contains("operating_range"))
        s.operating_range = j["operating_range"].get<Range>();
}

void to_json(json& j, const ParameterSchedule& s)
{
    j = json{{"system", s.system},
             {"entries", s.entries},
             {"unit", s.unit},
             {"objective_value", s.objective_value},
             {"established_at", s.established_at}};
}

void from_json(const json& j, ParameterSchedule& s)
{
    s.system = j.at("system").get<std::string>();
    s.entries = j.at("entries").get<std::vector<ScheduleEntry>>();
    s.unit = j.value("unit", std::string{"degC"});
    s.objective_value = j.value("objective_value", 0.0);
    s.established_at = j.value("established_at", Tick{0});
}

void to_json(json& j, const OptimizerConfig& c)
{
    j = json{{"budget", c.budget},
             {"comfort_fraction", c.comfort_fraction},
             {"evaluator_retries", c.evaluator_retries},
             {"max_descent_passes", c.max_descent_passes}};
}

void from_json(const json& j, OptimizerConfig& c)
{
    c.budget = j.value("budget", c.budget);
    c.comfort_fraction = j.value("comfort_fraction", c.comfort_fraction);
    c.evaluator_retries = j.value("evaluator_retries", c.evaluator_retries);
    c.max_descent_passes = j.value("max_descent_passes", c.max_descent_passes);
}

bool better(double energy_a, const std::vector<double>& a, double energy_b, const std::vector<double>& b)
{
    const double tol = 1e-9 * std::max({1.0, std::abs(energy_a), std::abs(energy_b)});
    if (energy_a < energy_b - tol)
        return true;
    if (energy_a > energy_b + tol)
        return false;
    const double sa = std::accumulate(a.begin(), a.end(), 0.0);
    const double sb = std::accumulate(b.begin(), b.end(), 0.0);
    if (sa != sb)
        return sa < sb;
    return a < b;
}

std::vector<ScheduleEntry> to_entries(const SearchSpace& space, const std::vector<double>& setpoints)
{
    std::vector<ScheduleEntry> out;
    for (std::size_t i = 0; i < space.windows.size(); ++i)
        out.push_back({space.windows[i].start_hour, space.windows[i].end_hour, setpoints.at(i)});
    return out;
}

namespace {

struct Search {
    const SearchSpace& space;
    const Evaluator& evaluator;
    const OptimizerConfig& config;
    std::map<std::vector<double>, std::optional<Evaluation>> cache;
    std::size_t evaluations = 0;
    bool failed = false;
    std::string failure;

    std::optional<Evaluation> eval(const std::vector<double>& setpoints)
    {
        if (const auto it = cache.find(setpoints); it != cache.end())
            return it->second;
        std::optional<Evaluation> result;
        for (int attempt = 0; attempt <= config.evaluator_retries; ++attempt) {
            try {
                ++evaluations;
                result = evaluator(to_entries(space, setpoints));
                break;
            } catch (const std::exception& e) {
                failure = e.what();
                spdlog::warn("cdo: evaluator failed on attempt {}: {}", attempt + 1, e.what());
            }
        }
        if (!result)
            failed = true;
        cache[setpoints] = result;
        return result;
    }

    [[nodiscard]] bool feasible(const Evaluation& e) const
    {
        return e.min_comfort_fraction + 1e-12 >= config.comfort_fraction;
    }
};

}  // namespace

OptimizeResult optimize(const SearchSpace& space, const Evaluator& evaluator, const ParameterSchedule& incumbent,
                        Tick now, const OptimizerConfig& config)
{
    space.validate();
    Search s{space, evaluator, config, {}, 0, false, {}};
    std::optional<std::vector<double>> best;
    double best_energy = 0.0;
    const auto consider = [&](const std::vector<double>& cand) {
        const auto e = s.eval(cand);
        if (!e || !s.feasible(*e))
            return false;
        if (!best || better(e->energy_kwh, cand, best_energy, *best)) {
            best = cand;
            best_energy = e->energy_kwh;
            return true;
        }
        return false;
    };

    OptimizeResult result;
    const std::size_t n = space.size();
    if (n <= config.budget) {
        std::vector<std::size_t> idx(space.windows.size(), 0);
        for (std::size_t k = 0; k < n && !s.failed; ++k) {
            std::vector<double> cand;
            for (std::size_t w = 0; w < idx.size(); ++w)
                cand.push_back(space.windows[w].candidates[idx[w]]);
            consider(cand);
            for (std::size_t w = idx.size(); w-- > 0;) {
                if (++idx[w] < space.windows[w].candidates.size())
                    break;
                idx[w] = 0;
            }
        }
    } else {
        result.exhaustive = false;
        std::vector<double> cur;
        for (const auto& w : space.windows) {
            const double v = sim::schedule_value(incumbent.entries, w.start_hour, w.candidates.front());
            cur.push_back(*std::min_element(w.candidates.begin(), w.candidates.end(), [&](double a, double b) {
                return std::abs(a - v) < std::abs(b - v) || (std::abs(a - v) == std::abs(b - v) && a < b);
            }));
        }
        consider(cur);
        for (int pass = 0; pass < config.max_descent_passes && !s.failed; ++pass) {
            bool improved = false;
            for (std::size_t w = 0; w < space.windows.size() && !s.failed; ++w) {
                auto base = best ? *best : cur;
                for (double c : space.windows[w].candidates) {
                    auto cand = base;
                    cand[w] = c;
                    improved |= consider(cand);
                }
            }
            if (!improved)
                break;
        }
    }

    result.evaluations = s.evaluations;
    if (s.failed) {
        result.status = OptimizeStatus::EvaluatorFailed;
        result.schedule = incumbent;
        result.detail = s.failure;
        return result;
    }
    if (!best) {
        result.status = OptimizeStatus::Infeasible;
        result.schedule = incumbent;
        result.detail = "no candidate keeps every zone within its comfort band for the required fraction";
        return result;
    }
    result.schedule.system = space.system;
    result.schedule.unit = space.unit;
    result.schedule.entries = to_entries(space, *best);
    result.schedule.objective_value = best_energy;
    result.schedule.established_at = now;
    return result;
}

SimEvaluator::SimEvaluator(sim::SimWorld twin, std::string actuator, Tick horizon)
    : twin_(std::move(twin)), actuator_(std::move(actuator)), horizon_(horizon)
{
    twin_.set_emit(false);
    twin_.forget_scenario();
}

Evaluation SimEvaluator::operator()(const std::vector<ScheduleEntry>& schedule) const
{
    sim::SimWorld w = twin_;
    ActuatorCommand cmd;
    cmd.command_id = "eval";
    cmd.issuer = "optimizer";
    cmd.actuator_id = actuator_;
    cmd.verb = "set_schedule";
    cmd.schedule = schedule;
    const double e0 = w.energy().hvac_kwh;
    const auto& zones = w.config().zones;
    std::vector<Tick> in_band(zones.size(), 0);
    for (Tick t = 0; t < horizon_; ++t) {
        auto r = w.step(t == 0 ? std::vector<ActuatorCommand>{cmd} : std::vector<ActuatorCommand>{});
        if (!r.rejected.empty())
            throw RejectedError(r.rejected.front());
        for (std::size_t i = 0; i < zones.size(); ++i)
            if (zones[i].comfort_band.contains(w.zones()[i].temp))
                ++in_band[i];
    }
    Evaluation e;
    e.energy_kwh = w.energy().hvac_kwh - e0;
    for (const auto c : in_band)
        e.min_comfort_fraction = std::min(e.min_comfort_fraction, static_cast<double>(c) / static_cast<double>(horizon_));
    return e;
}

// ETL

void to_json(json& j, const EtlReport& r)
{
    j = json{{"kind", "etl"},
             {"exported", json::array({r.from, r.to})},
             {"rows_written", r.rows_written},
             {"hours", r.hours},
             {"exported_ticks", r.exported_ticks},
             {"evicted", r.evicted}};
}

EtlReport etl_cycle(bkr::Bkr& bkr, const EtlOptions& options)
{
    EtlReport report;
    const auto latest = bkr.latest_rt();
    const auto oldest = bkr.rt_oldest();
    if (!latest || !oldest)
        return report;
    const auto tph = bkr.config().ticks_per_hour;
    const auto wm = bkr.export_watermark();
    const Tick from = wm ? *wm : (*oldest / tph) * tph;
    const Tick to = ((latest->tick + 1) / tph) * tph;
    report.from = from;
    report.to = std::max(from, to);

    for (Tick h0 = from; h0 < to; h0 += tph) {
        if (options.crash_after_hours && report.hours >= *options.crash_after_hours)
            return report;  // simulated crash: watermark not advanced
        const auto slice = bkr.read_rt(h0, h0 + tph);
        std::map<std::string, std::vector<double>> values;
        for (const auto& sv : slice.vectors)
            for (const auto& [p, v] : sv.values)
                values[p].push_back(v.value);
        std::vector<bkr::AggregateRow> rows;
        for (const auto& [p, xs] : values) {
            const auto b = bkr::compute_baseline(xs);
            rows.push_back({p, h0 / tph, b.sample_count, b.mean, *std::min_element(xs.begin(), xs.end()),
                            *std::max_element(xs.begin(), xs.end()), b.std});
        }
        report.rows_written += bkr.write_hist(rows);
        report.exported_ticks += static_cast<std::int64_t>(slice.vectors.size());
        ++report.hours;
    }
    if (to > from || !wm)
        bkr.set_export_watermark(std::max(from, to));
    report.evicted = bkr.evict_rt();
    if (report.hours > 0 || report.evicted > 0)
        bkr.append_report(json(report));
    return report;
}

}  // namespace sb::cdo
