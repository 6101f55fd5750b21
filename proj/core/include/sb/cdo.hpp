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

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sb/bkr.hpp"
#include "sb/simulator.hpp"
#include "sb/state_vector.hpp"

/// Change detection, parameter-space search and batch ETL.
namespace sb::cdo {

enum class ChangeKind { Fault, ConceptDrift };
enum class Severity { Info, Warning, Critical };

NLOHMANN_JSON_SERIALIZE_ENUM(ChangeKind, {{ChangeKind::Fault, "Fault"}, {ChangeKind::ConceptDrift, "ConceptDrift"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Severity,
                             {{Severity::Info, "Info"}, {Severity::Warning, "Warning"}, {Severity::Critical, "Critical"}})

Severity parse_severity(const std::string& s);

struct Evidence {
    std::string statistic;
    double value = 0.0;
    double threshold = 0.0;
    int window = 0;

    bool operator==(const Evidence&) const = default;
};

struct ChangeEvent {
    std::string event_id;
    ChangeKind kind = ChangeKind::Fault;
    std::string target;  // point id
    std::string system;
    std::string system_kind;
    Tick detected_at = 0;
    Evidence evidence;
    Severity severity = Severity::Info;

    bool operator==(const ChangeEvent&) const = default;
};

void to_json(json& j, const Evidence& e);
void from_json(const json& j, Evidence& e);
void to_json(json& j, const ChangeEvent& e);
void from_json(const json& j, ChangeEvent& e);

/// Out-of-band conditions that are not changes in the building itself
/// (missing baselines, degenerate baselines, infeasible searches).
struct Notice {
    std::string kind;
    std::string target;
    std::string system;
    Severity severity = Severity::Warning;
    std::string detail;
    Tick at = 0;
};

void to_json(json& j, const Notice& n);

struct ClassParams {
    std::optional<double> k;
    std::optional<int> persistence;
    std::optional<double> abs_tolerance;
};

struct DetectorConfig {
    int window = 30;
    int persistence = 10;
    double k = 4.0;
    double suspect_fraction = 0.5;
    double default_abs_tolerance = 0.5;
    std::map<std::string, ClassParams> classes;  // keyed by device class

    [[nodiscard]] double k_for(const std::string& cls) const;
    [[nodiscard]] int persistence_for(const std::string& cls) const;
    [[nodiscard]] double tolerance_for(const std::string& cls) const;
    /// Samples needed before drift can be evaluated.
    [[nodiscard]] int history_for(const std::string& cls) const { return window + persistence_for(cls) - 1; }
};

void to_json(json& j, const DetectorConfig& c);
void from_json(const json& j, DetectorConfig& c);

struct Sample {
    Tick tick = 0;
    double value = 0.0;
    Quality quality = Quality::Good;
};

struct Finding {
    ChangeKind kind = ChangeKind::Fault;
    Evidence evidence;
    Severity severity = Severity::Info;
    bool degenerate_baseline = false;
};

/// Pluggable per-point detector. `series` is ordered oldest first and only
/// holds samples the caller considers armed.
class PointDetector {
public:
    virtual ~PointDetector() = default;
    [[nodiscard]] virtual std::vector<Finding> evaluate(const std::deque<Sample>& series,
                                                        const bkr::DeviceRecord& device, const DetectorConfig& config,
                                                        bool drift_enabled) const = 0;
};

/// Fault: any windowed sample or the windowed mean outside the operating
/// range (Critical), or Suspect fraction above the limit (Warning).
/// ConceptDrift: in range, with the rolling mean more than k baseline std
/// (or the class tolerance when std is zero) from the baseline mean for each
/// of the last `persistence` ticks (Info).
class ZScorePersistenceDetector final : public PointDetector {
public:
    [[nodiscard]] std::vector<Finding> evaluate(const std::deque<Sample>& series, const bkr::DeviceRecord& device,
                                                const DetectorConfig& config, bool drift_enabled) const override;
};

/// Stateless batch form: findings at the newest vector of `window`, per point.
std::map<std::string, std::vector<Finding>> detect(const std::vector<StateVector>& window,
                                                   const bkr::Registry& registry, const DetectorConfig& config,
                                                   const PointDetector& detector);

/// Streaming detector with event bookkeeping: at most one open event per
/// (target, kind); resolving an event re-arms the target from that tick.
class ChangeDetector {
public:
    explicit ChangeDetector(DetectorConfig config = {}, std::shared_ptr<const PointDetector> detector = nullptr);

    struct Output {
        std::vector<ChangeEvent> events;
        std::vector<Notice> notices;
    };

    Output observe(const StateVector& sv, const bkr::Registry& registry);

    void resolve(const std::string& event_id, Tick at);
    /// Clears history for every point of `system` (all systems when empty)
    /// so detection restarts from `at`.
    void rearm(const std::string& system, Tick at);
    /// Suppresses drift detection on `system` (all when empty) until `until`.
    void suppress_drift(const std::string& system, Tick until);

    [[nodiscard]] std::vector<ChangeEvent> open_events() const;
    [[nodiscard]] std::optional<ChangeEvent> find(const std::string& event_id) const;
    [[nodiscard]] const DetectorConfig& config() const noexcept { return config_; }
    [[nodiscard]] std::uint64_t events_emitted() const noexcept { return next_id_ - 1; }

private:
    DetectorConfig config_;
    std::shared_ptr<const PointDetector> detector_;
    std::map<std::string, std::deque<Sample>> series_;
    std::map<std::string, Tick> armed_from_;
    std::map<std::string, std::string> point_system_;
    std::map<std::string, ChangeEvent> open_;  // by event id
    std::set<std::pair<std::string, ChangeKind>> open_keys_;
    std::map<std::string, Tick> drift_suppressed_until_;  // by system, "" = all
    std::set<std::string> warned_degenerate_;
    bool commissioning_notice_sent_ = false;
    std::uint64_t next_id_ = 1;
};

// Optimization

struct SearchWindow {
    int start_hour = 0;
    int end_hour = 24;
    std::vector<double> candidates;
};

struct SearchSpace {
    std::string system;
    std::string actuator;
    std::string unit = "degC";
    std::vector<SearchWindow> windows;
    std::optional<Range> operating_range;

    [[nodiscard]] std::size_t size() const;
    /// Throws ValidationError when windows do not partition [0, 24) or a
    /// candidate falls outside the operating range.
    void validate() const;
};

void to_json(json& j, const SearchWindow& w);
void from_json(const json& j, SearchWindow& w);
void to_json(json& j, const SearchSpace& s);
void from_json(const json& j, SearchSpace& s);

struct ParameterSchedule {
    std::string system;
    std::vector<ScheduleEntry> entries;
    std::string unit = "degC";
    double objective_value = 0.0;
    Tick established_at = 0;
};

void to_json(json& j, const ParameterSchedule& s);
void from_json(const json& j, ParameterSchedule& s);

struct Evaluation {
    double energy_kwh = 0.0;
    double min_comfort_fraction = 1.0;
};

using Evaluator = std::function<Evaluation(const std::vector<ScheduleEntry>&)>;

struct OptimizerConfig {
    std::size_t budget = 64;
    double comfort_fraction = 0.95;
    int evaluator_retries = 1;
    int max_descent_passes = 8;
};

void to_json(json& j, const OptimizerConfig& c);
void from_json(const json& j, OptimizerConfig& c);

enum class OptimizeStatus { Optimal, Infeasible, EvaluatorFailed };

struct OptimizeResult {
    OptimizeStatus status = OptimizeStatus::Optimal;
    ParameterSchedule schedule;
    bool exhaustive = true;
    std::size_t evaluations = 0;
    std::string detail;
};

/// Candidate order used by every search: lower energy, then lower setpoint
/// sum, then lexicographically lower setpoints in window order. Energies
/// within 1e-9 relative are equal.
bool better(double energy_a, const std::vector<double>& a, double energy_b, const std::vector<double>& b);

/// Feasible schedule of minimum evaluated energy. Exhaustive when the grid
/// fits the budget, coordinate descent from `incumbent` otherwise. No
/// feasible candidate returns `incumbent` with status Infeasible.
OptimizeResult optimize(const SearchSpace& space, const Evaluator& evaluator, const ParameterSchedule& incumbent,
                        Tick now, const OptimizerConfig& config = {});

std::vector<ScheduleEntry> to_entries(const SearchSpace& space, const std::vector<double>& setpoints);

/// Digital-twin evaluator: runs a silent copy of the world for `horizon`
/// ticks with the candidate applied as the actuator's schedule. Objective is
/// HVAC electrical energy (chiller, chilled-water pump, boiler).
class SimEvaluator {
public:
    SimEvaluator(sim::SimWorld twin, std::string actuator, Tick horizon = 1440);
    Evaluation operator()(const std::vector<ScheduleEntry>& schedule) const;

private:
    sim::SimWorld twin_;
    std::string actuator_;
    Tick horizon_;
};

// ETL

struct EtlReport {
    Tick from = 0;  // inclusive
    Tick to = 0;    // exclusive
    std::size_t rows_written = 0;
    std::size_t hours = 0;
    std::int64_t exported_ticks = 0;
    std::size_t evicted = 0;
};

void to_json(json& j, const EtlReport& r);

struct EtlOptions {
    /// Fault hook: stop after writing this many hours, before the watermark
    /// moves.
    std::optional<std::size_t> crash_after_hours;
};

/// Exports every complete, un-exported hour of the real-time zone as
/// per-point hourly aggregates, advances the watermark, evicts, and records
/// the report in the historical zone.
EtlReport etl_cycle(bkr::Bkr& bkr, const EtlOptions& options = {});

}  // namespace sb::cdo
